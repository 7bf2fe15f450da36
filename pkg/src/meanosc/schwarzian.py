"""Pre-Schwarzian and Schwarzian diagnostics for locally univalent maps.

Maps come from a closed-form registry (Mobius, log and power branches,
exponentials, pole perturbations, and their compositions) carrying
derivatives up to third order, because the Schwarzian amplifies derivative
noise quadratically; complex central differences exist only as a
cross-check.  Lower half-plane maps are handled by the conjugation
g~(z) = conj(g(conj z)), so every classifier runs on the upper half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .carleson import MeasureDensity, Support
from .geometry import HalfPlanePoint
from .profiles import LimitProfile, ProfileConfig, make_profile
from .quadrature import integrate2d

H, L, D = "H", "L", "D"


@dataclass(frozen=True)
class AnalyticMap:
    """Registry entry with derivatives through third order.

    kinds: 'mobius' (a, b, c, d), 'log' (pole), 'power' (exponent, pole),
    'exp' (rate), 'pole_perturb' (eps, pole), 'compose' (outer, inner),
    'conjugate' (inner) for the lower half-plane device.
    """

    kind: str
    params: tuple = ()
    domain: str = H

    def derivs(self, z):
        """(f, f', f'', f''') at z (complex array)."""
        z = np.asarray(z, dtype=complex)
        k = self.kind
        if k == "mobius":
            a, b, c, d = self.params
            den = c * z + d
            det = a * d - b * c
            return ((a * z + b) / den, det / den ** 2,
                    -2 * c * det / den ** 3, 6 * c * c * det / den ** 4)
        if k == "log":
            (p,) = self.params
            w = z - p
            return np.log(w), 1.0 / w, -1.0 / w ** 2, 2.0 / w ** 3
        if k == "power":
            kk, p = self.params
            w = z - p
            return (w ** kk, kk * w ** (kk - 1),
                    kk * (kk - 1) * w ** (kk - 2),
                    kk * (kk - 1) * (kk - 2) * w ** (kk - 3))
        if k == "exp":
            (lam,) = self.params
            e = np.exp(lam * z)
            return e, lam * e, lam * lam * e, lam ** 3 * e
        if k == "pole_perturb":
            eps, p = self.params
            w = z - p
            return (z + eps / w, 1.0 - eps / w ** 2,
                    2.0 * eps / w ** 3, -6.0 * eps / w ** 4)
        if k == "compose":
            outer, inner = self.params
            g0, g1, g2, g3 = inner.derivs(z)
            f0, f1, f2, f3 = outer.derivs(g0)
            return (f0, f1 * g1,
                    f2 * g1 ** 2 + f1 * g2,
                    f3 * g1 ** 3 + 3 * f2 * g1 * g2 + f1 * g3)
        if k == "conjugate":
            (inner,) = self.params
            c0, c1, c2, c3 = inner.derivs(np.conjugate(z))
            return (np.conjugate(c0), np.conjugate(c1),
                    np.conjugate(c2), np.conjugate(c3))
        raise ValueError(f"unknown map kind {self.kind!r}")

    def __call__(self, z):
        return self.derivs(z)[0]

    def to_json(self):
        if self.kind == "compose":
            return {"kind": "compose", "outer": self.params[0].to_json(),
                    "inner": self.params[1].to_json(), "domain": self.domain}
        if self.kind == "conjugate":
            return {"kind": "conjugate", "inner": self.params[0].to_json(),
                    "domain": self.domain}
        return {"kind": self.kind, "params": [_c2j(p) for p in self.params],
                "domain": self.domain}

    @staticmethod
    def from_json(d):
        kind = d["kind"]
        dom = d.get("domain", H)
        if kind == "compose":
            return AnalyticMap("compose", (AnalyticMap.from_json(d["outer"]),
                                           AnalyticMap.from_json(d["inner"])), dom)
        if kind == "conjugate":
            return AnalyticMap("conjugate", (AnalyticMap.from_json(d["inner"]),), dom)
        return AnalyticMap(kind, tuple(_j2c(p) for p in d["params"]), dom)


def _c2j(p):
    if isinstance(p, complex):
        return {"re": p.real, "im": p.imag}
    return p


def _j2c(p):
    if isinstance(p, dict) and "re" in p:
        return complex(p["re"], p["im"])
    return p


def mobius_map(a, b, c, d, domain=H) -> AnalyticMap:
    return AnalyticMap("mobius", (complex(a), complex(b), complex(c), complex(d)),
                       domain)


def identity_map(domain=H) -> AnalyticMap:
    return mobius_map(1, 0, 0, 1, domain)


def pole_perturbation(eps: float, pole: complex, domain=H) -> AnalyticMap:
    return AnalyticMap("pole_perturb", (complex(eps), complex(pole)), domain)


def log_branch(pole: complex, domain=H) -> AnalyticMap:
    return AnalyticMap("log", (complex(pole),), domain)


def power_branch(exponent: float, pole: complex, domain=H) -> AnalyticMap:
    return AnalyticMap("power", (float(exponent), complex(pole)), domain)


def conjugated(inner: AnalyticMap) -> AnalyticMap:
    """The upper half-plane version of a lower half-plane map."""
    return AnalyticMap("conjugate", (inner,), H)


def compose_maps(outer: AnalyticMap, inner: AnalyticMap) -> AnalyticMap:
    return AnalyticMap("compose", (outer, inner), inner.domain)


def pre_schwarzian(f: AnalyticMap, z) -> complex | np.ndarray:
    """N_f = f''/f'."""
    _, f1, f2, _ = f.derivs(z)
    if np.any(np.asarray(f1) == 0):
        raise ArithmeticError("vanishing derivative: map not locally univalent here")
    out = f2 / f1
    return out if np.ndim(out) else complex(out)


def schwarzian(f: AnalyticMap, z) -> complex | np.ndarray:
    """S_f = N_f' - N_f^2/2 = f'''/f' - (3/2)(f''/f')^2."""
    _, f1, f2, f3 = f.derivs(z)
    if np.any(np.asarray(f1) == 0):
        raise ArithmeticError("vanishing derivative: map not locally univalent here")
    out = f3 / f1 - 1.5 * (f2 / f1) ** 2
    return out if np.ndim(out) else complex(out)


def pre_schwarzian_fd(f: AnalyticMap, z: complex, h: float = 1e-5) -> complex:
    """Central-difference fallback with one Richardson step (cross-check only)."""

    def d1(h):
        return (f(z + h) - f(z - h)) / (2 * h)

    def d2(h):
        return (f(z + h) - 2 * f(z) + f(z - h)) / (h * h)

    f1 = (4 * d1(h / 2) - d1(h)) / 3
    f2 = (4 * d2(h / 2) - d2(h)) / 3
    return f2 / f1


# Norm profiles (A-space and Bloch) -------------------------------------------


def _probe_cloud(j_max: int = 10, nx: int = 33):
    ys = 2.0 ** np.arange(-j_max, j_max + 1, 0.5)
    pts = []
    for y in ys:
        span = max(4.0, 4.0 * y)
        for x in np.linspace(-span, span, nx):
            pts.append(complex(x, y))
    return np.asarray(pts)


@dataclass(frozen=True)
class NormProfile:
    norm_kind: str           # 'A' (sup y^2 |f|) or 'Bloch' (sup y |f'|)
    norm: float
    residuals: tuple[float, ...]
    exhaustion: tuple[float, ...]  # the n of K_n = [-n, n] x [1/n, n]
    verdict: str
    threshold: float


def norm_profile(values_at, kind: str, j_max: int = 10,
                 config: ProfileConfig = ProfileConfig()) -> NormProfile:
    """Ladder norm and compact-exhaustion residuals for a point functional.

    `values_at(pts)` returns the weighted magnitudes (y^2 |f| or y |f'|) at
    the complex probe points; the little-space verdict requires the
    residuals over the exhaustion complements to decay.
    """
    pts = _probe_cloud(j_max)
    vals = np.asarray(values_at(pts), dtype=float)
    norm = float(vals.max())
    ns = 2.0 ** np.arange(0, j_max)
    residuals = []
    for n in ns:
        outside = ((np.abs(pts.real) > n) | (pts.imag < 1.0 / n) | (pts.imag > n))
        residuals.append(float(vals[outside].max()) if outside.any() else 0.0)
    thr = config.threshold(norm)
    prof = make_profile("exhaustion", ns, residuals, thr, config, norm)
    return NormProfile(kind, norm, tuple(residuals), tuple(float(n) for n in ns),
                       prof.verdict, thr)


def a_norm_profile(f: AnalyticMap, **kw) -> NormProfile:
    return norm_profile(lambda pts: pts.imag ** 2 * np.abs(f(pts)), "A", **kw)


def bloch_norm_profile(f: AnalyticMap, **kw) -> NormProfile:
    """Bloch profile of log f' (y |N_f|)."""
    return norm_profile(lambda pts: pts.imag * np.abs(pre_schwarzian(f, pts)),
                        "Bloch", **kw)


def schwarzian_a_profile(f: AnalyticMap, **kw) -> NormProfile:
    return norm_profile(lambda pts: pts.imag ** 2 * np.abs(schwarzian(f, pts)),
                        "A", **kw)


# Identity checks --------------------------------------------------------------


def gamma_zeta_map(zeta: complex) -> AnalyticMap:
    return mobius_map(1.0, -zeta, 1.0, -zeta.conjugate())


def gamma_zeta_inverse_map(zeta: complex) -> AnalyticMap:
    return mobius_map(-zeta.conjugate(), zeta, -1.0, 1.0)


def composition_identity_check(g: AnalyticMap, zeta: complex, z: complex):
    """Both sides of N_g = (N_{g o gamma_zeta^{-1}} o gamma_zeta) gamma_zeta' + N_{gamma_zeta}."""
    lhs = pre_schwarzian(g, z)
    gz = gamma_zeta_map(zeta)
    g_zeta = compose_maps(g, gamma_zeta_inverse_map(zeta))
    w = gz(z)
    _, gz1, _, _ = gz.derivs(z)
    rhs = pre_schwarzian(g_zeta, w) * gz1 + pre_schwarzian(gz, z)
    return lhs, rhs


def bergman_identity_check(phi: AnalyticMap, tol: float = 1e-9):
    """Both sides (and ratio) of the weighted Bergman comparability on D.

    lhs = int |phi|^2 (1-|w|^2) dm, rhs = |phi(0)|^2 + int |phi'|^2 (1-|w|^2)^3 dm.
    """

    def lhs_fn(R, TH):
        W = R * np.exp(1j * TH)
        return np.abs(phi(W)) ** 2 * (1.0 - R * R) * R

    def rhs_fn(R, TH):
        W = R * np.exp(1j * TH)
        _, p1, _, _ = phi.derivs(W)
        return np.abs(p1) ** 2 * (1.0 - R * R) ** 3 * R

    lhs = integrate2d(lhs_fn, 0.0, 1.0, 0.0, 2.0 * math.pi, tol=tol)
    rhs = abs(phi(0j)) ** 2 + integrate2d(rhs_fn, 0.0, 1.0, 0.0, 2.0 * math.pi, tol=tol)
    return lhs, rhs, lhs / rhs


def j_diagnostic(g: AnalyticMap, zeta: complex, tol: float = 1e-7,
                 max_half: float = 4096.0) -> float:
    """J(zeta) = int over H of |N_g|^2 y |gamma_zeta'| dm, by widening boxes."""
    eta = zeta.imag

    def fn(X, Y):
        n = pre_schwarzian(g, X + 1j * Y)
        ker = 2.0 * eta / ((X - zeta.real) ** 2 + (Y + eta) ** 2)
        return np.abs(n) ** 2 * Y * ker

    half = max(8.0, 4.0 * abs(zeta))
    total = integrate2d(fn, zeta.real - half, zeta.real + half, 0.0, half,
                        tol=tol, rel=1e-6)
    while half < max_half:
        half *= 2.0
        new = integrate2d(fn, zeta.real - half, zeta.real + half, 0.0, half,
                          tol=tol, rel=1e-6)
        if abs(new - total) < max(tol, 1e-6 * abs(new)):
            return new
        total = new
    return total


def j_diagnostic_disk_form(g: AnalyticMap, zeta: complex,
                           tol: float = 1e-7) -> float:
    """The same J(zeta) after moving to the disk:
    (1/2) int over D of (1-|w|^2) |N_{g_zeta}(w) - N_{gamma_zeta^{-1}}(w)|^2 dm."""
    inv = gamma_zeta_inverse_map(zeta)
    g_zeta = compose_maps(g, inv)

    def fn(R, TH):
        W = R * np.exp(1j * TH)
        diff = pre_schwarzian(g_zeta, W) - pre_schwarzian(inv, W)
        return 0.5 * (1.0 - R * R) * np.abs(diff) ** 2 * R

    return integrate2d(fn, 0.0, 1.0, 0.0, 2.0 * math.pi, tol=tol, rel=1e-6)


@dataclass(frozen=True)
class JProfile:
    small: LimitProfile
    large: LimitProfile
    translation: LimitProfile
    norm: float


def j_profile(g: AnalyticMap, j_max: int = 6, tol: float = 1e-6,
              config: ProfileConfig = ProfileConfig()) -> JProfile:
    """J(zeta) over the three boundary regimes (the CMOA-style test)."""
    etas_small = 2.0 ** -np.arange(0, j_max + 1)
    etas_large = 2.0 ** np.arange(0, j_max + 1)
    xi_probes = (0.0, 1.0, -2.0)

    def sup_eta(eta):
        return max(j_diagnostic(g, complex(xi, eta), tol) for xi in xi_probes)

    small_vals = [sup_eta(float(e)) for e in etas_small]
    large_vals = [sup_eta(float(e)) for e in etas_large]
    offsets = 2.0 ** np.arange(0, j_max + 3)
    trans_vals = [max(j_diagnostic(g, complex(s * float(o) * u, h), tol)
                      for u in (1.0, 1.5) for s in (1, -1) for h in (0.5, 2.0))
                  for o in offsets]
    norm = float(max(max(small_vals), max(large_vals), max(trans_vals)))
    thr = config.threshold(norm)
    return JProfile(
        make_profile("small-scale", etas_small, small_vals, thr, config, norm),
        make_profile("large-scale", etas_large, large_vals, thr, config, norm),
        make_profile("translation", offsets, trans_vals, thr, config, norm),
        norm,
    )


# Densities for the Carleson classifier ---------------------------------------


def _on_upper(g: AnalyticMap) -> AnalyticMap:
    return conjugated(g) if g.domain == L else g


def schwarzian_carleson_density(g: AnalyticMap) -> MeasureDensity:
    """|S_g|^2 |y|^3 dm for the corollary's condition (3) (on H via conjugation)."""
    gu = _on_upper(g)

    def fn(X, Y):
        return np.abs(schwarzian(gu, X + 1j * Y)) ** 2 * Y ** 3

    return MeasureDensity(H, fn=fn, support=Support("all"),
                          name=f"|S|^2y^3({g.kind})")


def logderiv_cmoa_density(g: AnalyticMap) -> MeasureDensity:
    """|N_g|^2 |y| dm, the computable surrogate for log g' in CMOA (condition (4))."""
    gu = _on_upper(g)

    def fn(X, Y):
        return np.abs(pre_schwarzian(gu, X + 1j * Y)) ** 2 * Y

    return MeasureDensity(H, fn=fn, support=Support("all"),
                          name=f"|N|^2y({g.kind})")
