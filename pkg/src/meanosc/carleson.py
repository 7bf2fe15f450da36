"""Carleson box masses, the strongly-vanishing classifier, Mobius-kernel
tests, Cayley transport of measures, and the Fefferman-Stein density bridge.

A measure is given by a nonnegative density w against area measure, either
closed form (vectorized callable) or sampled on a rectilinear grid with
bilinear interpolation.  Classification runs the same three-limit trend
rule as the oscillation module on the box ratios lambda(Q_I)/|I|; the
verdict lattice is CMs => CM0 => CM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import _kernels
from .descriptors import Interval, IntervalLadder
from .geometry import cayley_inverse_deriv, gamma_zeta_abs_deriv, tau_abs_deriv
from .poisson import grad_extension
from .profiles import (
    GROWS, INCONCLUSIVE, PERSISTS, VANISHES, LimitProfile, ProfileConfig,
    make_profile,
)
from .quadrature import DivergenceError, integrate2d

H, L, D = "H", "L", "D"

NOT_CARLESON = "not-Carleson"
CM = "CM"
CM0 = "CM0"
CMS = "CMs"


@dataclass(frozen=True)
class Support:
    """Where the density may be nonzero.

    kinds: 'all' (whole domain), 'box' (x0,x1,y0,y1), 'strip' (y0 < y < y1,
    any x), 'disk' (|w| < r0, disk domain only).  `bound` is an optional
    uniform bound on the density used for truncation of improper integrals.
    """

    kind: str = "all"
    box: tuple[float, float, float, float] | None = None
    strip: tuple[float, float] | None = None
    r0: float | None = None
    bound: float | None = None

    def clip_box(self, x0, x1, y0, y1):
        """Intersect a query box with the support (None = empty)."""
        if self.kind == "box":
            bx0, bx1, by0, by1 = self.box
            x0, x1 = max(x0, bx0), min(x1, bx1)
            y0, y1 = max(y0, by0), min(y1, by1)
        elif self.kind == "strip":
            y0, y1 = max(y0, self.strip[0]), min(y1, self.strip[1])
        elif self.kind == "disk":
            r = self.r0
            x0, x1 = max(x0, -r), min(x1, r)
            y0, y1 = max(y0, -r), min(y1, r)
        if x1 <= x0 or y1 <= y0:
            return None
        return (x0, x1, y0, y1)

    def to_json(self):
        out = {"kind": self.kind}
        if self.box is not None:
            out["box"] = list(self.box)
        if self.strip is not None:
            out["strip"] = list(self.strip)
        if self.r0 is not None:
            out["r0"] = self.r0
        if self.bound is not None:
            out["bound"] = self.bound
        return out

    @staticmethod
    def from_json(d):
        d = dict(d)
        if "box" in d:
            d["box"] = tuple(d["box"])
        if "strip" in d:
            d["strip"] = tuple(d["strip"])
        return Support(**d)


@dataclass(frozen=True)
class MeasureDensity:
    """d(lambda) = w dm on the tagged domain."""

    domain: str  # 'H', 'L' or 'D'
    fn: Callable | None = None                  # vectorized w(x, y)
    grid: tuple | None = None                   # (xs, ys, vals[iy, ix])
    support: Support = Support()
    singular_floor: bool = False                # density blows up toward y=0
    name: str = ""

    @property
    def is_grid(self) -> bool:
        return self.grid is not None

    def eval(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_grid:
            xs, ys, vals = self.grid
            fx = np.clip(np.searchsorted(xs, x) - 1, 0, len(xs) - 2)
            fy = np.clip(np.searchsorted(ys, y) - 1, 0, len(ys) - 2)
            tx = np.clip((x - xs[fx]) / (xs[fx + 1] - xs[fx]), 0.0, 1.0)
            ty = np.clip((y - ys[fy]) / (ys[fy + 1] - ys[fy]), 0.0, 1.0)
            v = (vals[fy, fx] * (1 - ty) * (1 - tx)
                 + vals[fy, fx + 1] * (1 - ty) * tx
                 + vals[fy + 1, fx] * ty * (1 - tx)
                 + vals[fy + 1, fx + 1] * ty * tx)
            inside = ((x >= xs[0]) & (x <= xs[-1]) & (y >= ys[0]) & (y <= ys[-1]))
            return np.where(inside, v, 0.0)
        return self.fn(x, y)


def zero_density(domain: str = H) -> MeasureDensity:
    return MeasureDensity(domain, fn=lambda x, y: np.zeros(np.broadcast(x, y).shape),
                          support=Support("box", box=(0, 0, 0, 0)), name="zero")


def grid_density(xs, ys, vals, domain: str = H, **kw) -> MeasureDensity:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (len(ys), len(xs)):
        raise ValueError("grid vals must be indexed [iy, ix]")
    sup = Support("box", box=(float(xs[0]), float(xs[-1]), float(ys[0]), float(ys[-1])),
                  bound=float(np.max(vals)))
    return MeasureDensity(domain, grid=(xs, ys, vals), support=sup, **kw)


@dataclass(frozen=True)
class CarlesonBox:
    """Q_I = I x (0, |I|)."""

    base: Interval

    @property
    def height(self) -> float:
        return self.base.length


def box_mass(lam: MeasureDensity, box: CarlesonBox, tol: float = 1e-9,
             rel: float = 1e-6) -> float:
    """Mass of the density over the Carleson box (2-D adaptive quadrature)."""
    region = lam.support.clip_box(box.base.lo, box.base.hi, 0.0, box.height)
    if region is None:
        return 0.0
    x0, x1, y0, y1 = region
    if lam.is_grid:
        xs, ys, vals = lam.grid
        return _kernels.integrate_bilinear_box(xs, ys, vals, x0, x1, y0, y1)
    return integrate2d(lambda X, Y: lam.eval(X, Y), x0, x1, y0, y1,
                       tol=tol, rel=rel)


def _grid_min_scale(lam: MeasureDensity) -> float:
    if not lam.is_grid:
        return 0.0
    xs, ys, _ = lam.grid
    return 4.0 * float(ys[0])


@dataclass(frozen=True)
class CarlesonReport:
    norm: float                 # ladder max of lambda(Q_I)/|I|
    small: LimitProfile
    large: LimitProfile
    translation: LimitProfile
    verdict: str
    threshold: float

    def is_cm(self) -> bool:
        return self.verdict in (CM, CM0, CMS)

    def is_cm0(self) -> bool:
        return self.verdict in (CM0, CMS)

    def is_cms(self) -> bool:
        return self.verdict == CMS


def _ratio(lam, interval: Interval, tol, rel) -> float:
    return box_mass(lam, CarlesonBox(interval), tol, rel) / interval.length


def carleson_profile(lam: MeasureDensity, ladder: IntervalLadder | None = None,
                     tol: float = 1e-9, rel: float = 1e-5,
                     config: ProfileConfig = ProfileConfig()) -> CarlesonReport:
    """Box-ratio profiles over the ladder and the CM/CM0/CMs/not verdict."""
    if ladder is None:
        ladder = IntervalLadder()
    min_scale = _grid_min_scale(lam)

    def sup_at(length: float) -> float:
        return max(_ratio(lam, I, tol, rel) for I in ladder.intervals_at(length))

    small_lengths = [float(s) for s in ladder.small_scale_lengths() if s >= min_scale]
    large_lengths = [float(s) for s in ladder.large_scale_lengths()]
    small_vals = [sup_at(s) for s in small_lengths]
    large_vals = [sup_at(s) for s in large_lengths]

    offsets = ladder.translation_offsets()
    per_length = {}
    for Ln in ladder.translation_lengths:
        if Ln < min_scale:
            continue
        vals = []
        for off in offsets:
            cands = []
            for u in (1.0, 1.25, 1.5, 1.75):
                c = ladder.center_radius + float(off) * u
                cands += [Interval(c, Ln), Interval(-c, Ln)]
            vals.append(max(_ratio(lam, I, tol, rel) for I in cands))
        per_length[Ln] = vals
    trans_vals = [max(per_length[Ln][j] for Ln in per_length)
                  for j in range(len(offsets))]

    norm = float(max(max(small_vals), max(large_vals), max(trans_vals)))
    thr = config.threshold(norm)
    small = make_profile("small-scale", small_lengths, small_vals, thr, config, norm)
    large = make_profile("large-scale", large_lengths, large_vals, thr, config, norm)
    trans = make_profile("translation", offsets, trans_vals, thr, config, norm,
                         per_length=per_length)

    verdicts = (small.verdict, large.verdict, trans.verdict)
    if GROWS in verdicts or norm > config.norm_ceiling:
        verdict = NOT_CARLESON
    elif INCONCLUSIVE in verdicts:
        verdict = INCONCLUSIVE
    elif all(v == VANISHES for v in verdicts):
        verdict = CMS
    elif small.verdict == VANISHES:
        verdict = CM0
    elif small.verdict == PERSISTS:
        verdict = CM
    else:
        verdict = INCONCLUSIVE
    return CarlesonReport(norm, small, large, trans, verdict, thr)


# Mobius-kernel integral tests -----------------------------------------------


def _halfplane_kernel_integral(lam: MeasureDensity, zeta: complex,
                               tol: float = 1e-7, rel: float = 1e-4) -> float:
    """integral over H of |gamma_zeta'(z)| d(lambda)."""
    sup = lam.support
    if sup.kind in ("box", "disk"):
        region = sup.clip_box(-np.inf, np.inf, 0.0, np.inf)
        x0, x1, y0, y1 = region
    elif sup.kind == "strip":
        if sup.bound is None:
            raise DivergenceError("strip-supported density needs a declared bound "
                                  "for kernel truncation")
        y0, y1 = sup.strip
        # truncate x by the closed-form kernel tail bound
        eta, xi = zeta.imag, zeta.real
        X = 16.0
        while 4.0 * eta * sup.bound * (y1 - y0) / X > 0.01 * tol + 1e-14:
            X *= 2.0
            if X > 1e14:
                break
        x0, x1 = xi - X, xi + X
    else:
        raise DivergenceError("kernel test needs compact, strip or disk support")

    def fn(X, Y):
        return lam.eval(X, Y) * gamma_zeta_abs_deriv(zeta, X, Y)

    return integrate2d(fn, x0, x1, y0, y1, tol=tol, rel=rel)


@dataclass(frozen=True)
class MobiusKernelProfiles:
    small: LimitProfile
    large: LimitProfile
    translation: LimitProfile
    norm: float


def mobius_kernel_test_h(lam: MeasureDensity, j_max: int = 8,
                         xi_probes: tuple[float, ...] = (0.0, 1.0, -2.0),
                         tol: float = 1e-7,
                         config: ProfileConfig = ProfileConfig(),
                         ) -> MobiusKernelProfiles:
    """Profiles of zeta -> integral |gamma_zeta'| d(lambda) in the three regimes."""

    def sup_at_eta(eta: float) -> float:
        return max(_halfplane_kernel_integral(lam, complex(xi, eta), tol)
                   for xi in xi_probes)

    etas_small = 2.0 ** -np.arange(0, j_max + 1)
    small_vals = [sup_at_eta(float(e)) for e in etas_small]
    etas_large = 2.0 ** np.arange(0, j_max + 1)
    large_vals = [sup_at_eta(float(e)) for e in etas_large]
    offsets = 2.0 ** np.arange(0, j_max + 3)
    trans_vals = []
    for off in offsets:
        trans_vals.append(max(
            _halfplane_kernel_integral(lam, complex(s * float(off) * u, h), tol)
            for u in (1.0, 1.5) for s in (1.0, -1.0) for h in (0.25, 1.0, 4.0)))

    norm = float(max(max(small_vals), max(large_vals), max(trans_vals)))
    thr = config.threshold(norm)
    return MobiusKernelProfiles(
        make_profile("small-scale", etas_small, small_vals, thr, config, norm),
        make_profile("large-scale", etas_large, large_vals, thr, config, norm),
        make_profile("translation", offsets, trans_vals, thr, config, norm),
        norm,
    )


def _disk_kernel_integral(lam: MeasureDensity, w0: complex,
                          tol: float = 1e-7, rel: float = 1e-4) -> float:
    """integral over D of |tau_w0'(w)| d(lambda), in polar coordinates."""
    r1 = lam.support.r0 if lam.support.kind == "disk" else 1.0

    def fn(R, TH):
        U = R * np.cos(TH)
        V = R * np.sin(TH)
        return lam.eval(U, V) * tau_abs_deriv(w0, U, V) * R

    return integrate2d(fn, 0.0, r1, 0.0, 2.0 * math.pi, tol=tol, rel=rel)


def mobius_kernel_test_d(lam: MeasureDensity, j_max: int = 10,
                         n_angles: int = 8, tol: float = 1e-7,
                         config: ProfileConfig = ProfileConfig()) -> LimitProfile:
    """Profile of the disk kernel integral as |w0| -> 1 (CM0 test on D)."""
    radii = 1.0 - 2.0 ** -np.arange(0, j_max + 1)
    angles = 2.0 * math.pi * (np.arange(n_angles) + 0.5) / n_angles
    vals = []
    for rho in radii:
        vals.append(max(
            _disk_kernel_integral(lam, rho * complex(math.cos(a), math.sin(a)), tol)
            for a in angles))
    norm = float(max(vals))
    thr = config.threshold(norm)
    return make_profile("disk-boundary", radii, vals, thr, config, norm)


# Cayley transport (conformal invariance of CMs) ------------------------------


def transport_d_to_h(lam: MeasureDensity) -> MeasureDensity:
    """nu with d(nu)(z) = u(gamma(z)) |gamma'(z)| dm(z) on H."""
    if lam.domain != D:
        raise ValueError("transport_d_to_h needs a disk density")

    def fn(X, Y):
        Z = X + 1j * Y
        W = (Z - 1j) / (Z + 1j)
        mod = 2.0 / np.abs(Z + 1j) ** 2
        return lam.eval(W.real, W.imag) * mod

    if lam.support.kind == "disk" and lam.support.r0 < 1.0:
        r0 = lam.support.r0
        cy = (1.0 + r0 * r0) / (1.0 - r0 * r0)
        R = 2.0 * r0 / (1.0 - r0 * r0)
        sup = Support("box", box=(-R, R, cy - R, cy + R), bound=None)
    else:
        sup = Support("all")
    return MeasureDensity(H, fn=fn, support=sup,
                          name=f"transported({lam.name})")


def transport_h_to_d(lam: MeasureDensity) -> MeasureDensity:
    """Inverse transport: u(w) = v(gamma^{-1}(w)) |(gamma^{-1})'(w)|."""
    if lam.domain != H:
        raise ValueError("transport_h_to_d needs a half-plane density")

    def fn(U, V):
        W = U + 1j * V
        bad = np.abs(1.0 - W) < 1e-300
        Ws = np.where(bad, 0.0, W)
        Z = 1j * (1.0 + Ws) / (1.0 - Ws)
        mod = np.abs(cayley_inverse_deriv(Ws))
        vals = np.where(Z.imag > 0, lam.eval(Z.real, np.maximum(Z.imag, 1e-300)), 0.0)
        return np.where(bad, 0.0, vals * mod)

    return MeasureDensity(D, fn=fn, support=Support("all"),
                          name=f"transported({lam.name})")


def transport_consistency(lam: MeasureDensity, z0: complex,
                          tol: float = 2e-7) -> tuple[float, float]:
    """Both sides of the transport identity at z0.

    Left: half-plane kernel integral of the transported density; right: disk
    automorphism kernel integral of the original density at gamma(z0).
    Two independent quadratures; the caller asserts agreement.
    """
    nu = transport_d_to_h(lam)
    lhs = _halfplane_kernel_integral(nu, z0, tol=tol, rel=0.0)
    w0 = (z0 - 1j) / (z0 + 1j)
    rhs = _disk_kernel_integral(lam, w0, tol=tol, rel=0.0)
    return lhs, rhs


# Fefferman-Stein bridge -------------------------------------------------------


def _fs_grid_axes(f, k_lo=-14, k_hi=15, per_octave=2):
    anchors = sorted({0.0, *f.breakpoints, *f.singularities})
    R = max(f.active_radius, 1.0)
    xs = set(np.linspace(-R - 2.0, R + 2.0, int(8 * (R + 2)) + 1))
    for a in anchors:
        for k in range(-15, 4):
            for m in (1.0, 1.5):
                xs.add(a + m * 2.0 ** k)
                xs.add(a - m * 2.0 ** k)
    for j in range(1, 16):
        for m in (1.0, 1.375, 1.75):
            xs.add(m * 2.0 ** j + R)
            xs.add(-m * 2.0 ** j - R)
    xs = np.asarray(sorted(xs))
    ks = np.arange(k_lo * per_octave, k_hi * per_octave + 1) / per_octave
    ys = 2.0 ** ks
    return xs, ys


def fefferman_stein_density(f, tol: float = 1e-6, grid_axes=None) -> MeasureDensity:
    """|grad P_f|^2 y dm as a grid density (CMO <-> CMs bridge input).

    The gradient is sampled on a dyadically refined grid (dense columns near
    the function's breakpoints, log-spaced rows) and interpolated bilinearly;
    pointwise values for oracle checks should use poisson.grad_density.
    """
    from .geometry import HalfPlanePoint

    if grid_axes is None:
        xs, ys = _fs_grid_axes(f)
    else:
        xs, ys = grid_axes
    vals = np.empty((len(ys), len(xs)))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            gx, gy = grad_extension(f, HalfPlanePoint(float(x), float(y)), tol=tol)
            vals[iy, ix] = (gx * gx + gy * gy) * y
    return grid_density(xs, ys, vals, domain=H, name=f"fs({f.body.to_json()['kind']})")
