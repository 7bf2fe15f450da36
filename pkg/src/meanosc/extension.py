"""Quasisymmetric homeomorphisms and the mollifier-convolution extension.

A homeomorphism is stored as h(0) plus the log-derivative a = log h', so it
is increasing by construction: h(x) = h(0) + integral of e^a.  The
extension rho = phi_y * k + i psi_y * k uses one even and one odd polynomial
mollifier normalized by the moment conditions (total mass 1, first odd
moment -1); its Wirtinger derivatives are convolutions of e^a against the
derived complex windows, and the Beltrami coefficient is their ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .carleson import MeasureDensity, grid_density
from .descriptors import (
    Const, FunctionDescriptor, Interval, Scale, Sum, Tabulated, constant,
)
from .program import ProgramBuilder
from .quadrature import integrate

_CHUNK = 0.25
_GL_CHUNK = leggauss(24)
_GL_REST = leggauss(12)


class Homeomorphism:
    """Increasing map h with h' = e^a for a descriptor a = log h'."""

    def __init__(self, logderiv: FunctionDescriptor, base: float = 0.0):
        self.logderiv = logderiv
        self.base = float(base)
        self._half_range = 0.0
        self._edges = None
        self._cum = None

    @cached_property
    def _exp_prog(self):
        b = ProgramBuilder()
        self.logderiv.body.emit(b, None)
        b.exp()
        return b.finish()

    def deriv(self, x):
        return self._exp_prog(np.asarray(x, dtype=float))

    def _rebuild(self, half: float) -> None:
        """Cumulative integrals of e^a at chunk edges covering [-half, half].

        Edges are the chunk grid unioned with the log-derivative's
        breakpoints, so every edge interval is smooth for the quadrature.
        """
        half = _CHUNK * math.ceil(half / _CHUNK)
        grid = np.arange(-half, half + 0.5 * _CHUNK, _CHUNK)
        anchors = (*self.logderiv.breakpoints, *self.logderiv.singularities)
        interior = [p for p in anchors if -half < p < half]
        if len(anchors) <= 16:
            # cluster edges dyadically around kinks so the edge intervals stay
            # smooth for the fixed-order rules; dense tables skip this (their
            # knots are already the structure)
            for p in anchors:
                for k in range(1, 22):
                    for s in (1.0, -1.0):
                        q = p + s * 2.0 ** -k
                        if -half < q < half:
                            interior.append(q)
        edges = np.unique(np.concatenate([grid, interior, [0.0]]))
        nodes, weights = _GL_CHUNK
        halfw = 0.5 * (edges[1:] - edges[:-1])
        mid = edges[:-1] + halfw
        pts = mid[:, None] + halfw[:, None] * nodes[None, :]
        vals = (self._exp_prog(pts) @ weights) * halfw
        cum = np.concatenate([[0.0], np.cumsum(vals)])
        i0 = int(np.searchsorted(edges, 0.0))
        self._edges = edges
        self._cum = cum - cum[i0]
        self._half_range = half

    def _ensure(self, lo: float, hi: float) -> None:
        need = max(abs(lo), abs(hi), 1.0)
        if need > self._half_range:
            self._rebuild(2.0 ** math.ceil(math.log2(need)))

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        self._ensure(float(flat.min()), float(flat.max()))
        idx = np.clip(np.searchsorted(self._edges, flat, side="right") - 1,
                      0, len(self._edges) - 2)
        starts = self._edges[idx]
        bases = self._cum[idx]
        nodes, weights = _GL_REST
        half = 0.5 * (flat - starts)
        pts = (starts + half)[:, None] + half[:, None] * nodes[None, :]
        rest = (self._exp_prog(pts) @ weights) * half
        out = (self.base + bases + rest).reshape(np.shape(x))
        return out if out.shape else float(out)

    __call__ = eval

    def inverse_eval(self, v):
        """Solve h(x) = v: interp-seeded Newton on the cached edge table,
        with a bisection fallback for entries Newton cannot polish."""
        v = np.asarray(v, dtype=float)
        flat = np.atleast_1d(v).ravel()
        half = max(self._half_range, 1.0)
        while True:
            self._ensure(-half, half)
            hv = self.base + self._cum
            if flat.min() >= hv[0] and flat.max() <= hv[-1]:
                break
            if half > 2.0 ** 40:
                raise ArithmeticError("inverse target outside reachable range")
            half *= 2.0
        x = np.interp(flat, hv, self._edges)
        scale = 1.0 + np.abs(flat)
        for _ in range(6):
            d = np.maximum(np.asarray(self.deriv(x), dtype=float), 1e-300)
            x = np.clip(x - (self.eval(x) - flat) / d,
                        self._edges[0], self._edges[-1])
        bad = np.abs(self.eval(x) - flat) > 1e-10 * scale
        if bad.any():
            x[bad] = self._bisect(flat[bad])
        out = x.reshape(np.shape(v))
        return out if out.shape else float(out)

    def _bisect(self, targets):
        lo = np.full_like(targets, float(self._edges[0]))
        hi = np.full_like(targets, float(self._edges[-1]))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.eval(mid) <= targets
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


def identity_homeo() -> Homeomorphism:
    return Homeomorphism(constant(0.0), 0.0)


def qs_ratio(h: Homeomorphism, x: float, t: float) -> float:
    """Three-point distortion (h(x+t) - h(x)) / (h(x) - h(x-t))."""
    if t <= 0:
        raise ValueError("t must be positive")
    vals = h.eval(np.asarray([x - t, x, x + t]))
    return float((vals[2] - vals[1]) / (vals[1] - vals[0]))


def strong_qs_check(h: Homeomorphism, I: Interval, subsets):
    """((|h(A)|/|h(I)|, |A|/|I|) for A a finite union of subintervals of I."""
    pts = []
    alen = 0.0
    for a in subsets:
        if a.lo < I.lo - 1e-12 or a.hi > I.hi + 1e-12:
            raise ValueError("subset leaves the interval")
        pts += [a.lo, a.hi]
        alen += a.length
    vals = h.eval(np.asarray(pts + [I.lo, I.hi]))
    ha = float(sum(vals[2 * i + 1] - vals[2 * i] for i in range(len(subsets))))
    hi_len = float(vals[-1] - vals[-2])
    return ha / hi_len, alen / I.length


def power_flow(h: Homeomorphism, t: float) -> Homeomorphism:
    """h_t with log-derivative t*a and the same basepoint."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("flow parameter must lie in [0, 1]")
    if t == 1.0:
        return Homeomorphism(h.logderiv, h.base)
    if t == 0.0:
        return Homeomorphism(constant(0.0), h.base)
    return Homeomorphism(FunctionDescriptor(Scale(t, h.logderiv.body)), h.base)


def _tab_knots(span: float, anchors, n_uniform: int = 1025,
               dense: tuple[float, float, int] | None = None):
    xs = set(np.linspace(-span, span, n_uniform))
    if dense is not None:
        lo, hi, n = dense
        xs.update(np.linspace(lo, hi, n))
    for a in anchors:
        for k in range(-16, 3):
            for m in (1.0, 1.5):
                for s in (1.0, -1.0):
                    p = a + s * m * 2.0 ** k
                    if -span < p < span:
                        xs.add(p)
    return np.asarray(sorted(xs))


def _tabulate(fn, knots, zero_outside: bool) -> FunctionDescriptor:
    ys = np.asarray(fn(knots), dtype=float)
    return FunctionDescriptor(Tabulated(tuple(knots), tuple(ys), zero_outside))


def factorize(h: Homeomorphism, n: int, span: float | None = None):
    """Small-norm factors k_N with h = k_n o ... o k_1.

    k_N = h_{t_N} o h_{t_{N-1}}^{-1} for t_N = N/n, so its log-derivative is
    (a/n) o h_{t_{N-1}}^{-1} and each factor carries 1/n of the oscillation.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return [Homeomorphism(h.logderiv, h.base)]
    a = h.logderiv
    if span is None:
        span = 2.0 * max(a.active_radius, 4.0) + 8.0
    anchors = (*a.breakpoints, *a.singularities)
    zero_out = a.tail.compact
    factors = [Homeomorphism(FunctionDescriptor(Scale(1.0 / n, a.body)), h.base)]
    act = max(a.active_radius, 1.0)
    for N in range(2, n + 1):
        s = (N - 1) / n
        h_s = power_flow(h, s)
        lo = float(h_s.eval(-span))
        hi = float(h_s.eval(span))
        supp = (float(h_s.eval(-act - 1.0)), float(h_s.eval(act + 1.0)), 16385)
        knots = _tab_knots(max(abs(lo), abs(hi)),
                           (float(h_s.eval(p)) for p in anchors), dense=supp)
        inv = h_s.inverse_eval(knots)
        ld = _tabulate(lambda xs, inv=inv: a.eval(inv) / n, knots, zero_out)
        base = float(power_flow(h, N / n).eval(h_s.inverse_eval(0.0)))
        factors.append(Homeomorphism(ld, base))
    return factors


def compose(g: Homeomorphism, f: Homeomorphism, span: float | None = None) -> Homeomorphism:
    """g o f, with log-derivative log g'(f(x)) + log f'(x)."""
    ag, af = g.logderiv, f.logderiv
    if span is None:
        hi = max(ag.active_radius, af.active_radius, 4.0)
        span = 2.0 * hi + 8.0
    knots = _tab_knots(span, (*af.breakpoints, *af.singularities))
    fx = f.eval(knots)
    zero_out = ag.tail.compact and af.tail.compact
    tab = _tabulate(lambda xs: ag.eval(fx), knots, zero_out)
    ld = FunctionDescriptor(Sum((tab.body, af.body)))
    return Homeomorphism(ld, float(g.eval(f.base)))


def invert(f: Homeomorphism, span: float | None = None) -> Homeomorphism:
    """f^{-1}, with log-derivative -a(f^{-1}(x))."""
    a = f.logderiv
    if span is None:
        lo = float(f.eval(-2.0 * max(a.active_radius, 4.0) - 8.0))
        hi = float(f.eval(2.0 * max(a.active_radius, 4.0) + 8.0))
        span = max(abs(lo), abs(hi))
    knots = _tab_knots(span, (float(f.eval(p)) for p in (*a.breakpoints,
                                                         *a.singularities)))
    inv = f.inverse_eval(knots)
    ld = _tabulate(lambda xs: -a.eval(inv), knots, a.tail.compact)
    return Homeomorphism(ld, float(f.inverse_eval(0.0)))


def pullback(u: FunctionDescriptor, h: Homeomorphism,
             span: float | None = None) -> FunctionDescriptor:
    """u o h as a descriptor (tabulated)."""
    if span is None:
        span = 2.0 * max(u.active_radius, h.logderiv.active_radius, 4.0) + 8.0
    knots = _tab_knots(span, (*h.logderiv.breakpoints, *h.logderiv.singularities))
    hx = h.eval(knots)
    return _tabulate(lambda xs: u.eval(hx), knots, u.tail.compact)


# Mollifiers -------------------------------------------------------------------

_PHI_C = 35.0 / 32.0     # normalizes integral of (1-x^2)^3 over [-1, 1]
_PSI_C = 315.0 / 32.0    # normalizes -integral of x * psi to 1


@dataclass(frozen=True)
class MollifierPair:
    """phi even, psi odd, both supported on [-1, 1], C^2 at the endpoints."""

    phi_scale: float = _PHI_C
    psi_scale: float = _PSI_C

    def phi(self, u):
        u = np.asarray(u, dtype=float)
        w = np.maximum(1.0 - u * u, 0.0) ** 3
        return self.phi_scale * w

    def psi(self, u):
        u = np.asarray(u, dtype=float)
        w = np.maximum(1.0 - u * u, 0.0) ** 3
        return -self.psi_scale * u * w

    # complex windows for the Wirtinger derivatives of the extension
    def alpha(self, u):
        return 0.5 * (1.0 - 1j * np.asarray(u)) * (self.phi(u) + 1j * self.psi(u))

    def beta(self, u):
        return 0.5 * (1.0 + 1j * np.asarray(u)) * (self.phi(u) + 1j * self.psi(u))


def mollifier_moments(m: MollifierPair, tol: float = 1e-12):
    """(integral phi, integral psi, integral x psi) -- must be (1, 0, -1)."""
    b = ProgramBuilder()
    b.x().min_const(1.0).max_const(-1.0).poly((-1.0, 0.0, 3.0, 0.0, -3.0, 0.0, 1.0))
    b.const(m.phi_scale).mul()
    phi_prog = b.finish()
    m0_phi = integrate(phi_prog, -1.0, 1.0, tol=tol)
    nodes, weights = leggauss(40)
    psi_vals = m.psi(nodes)
    m0_psi = float(psi_vals @ weights)
    m1_psi = float((nodes * psi_vals) @ weights)
    return m0_phi, m0_psi, m1_psi


def window_moments(m: MollifierPair):
    """(integral alpha, integral beta) -- must be (0, 1)."""
    nodes, weights = leggauss(40)
    a = m.alpha(nodes) @ weights
    b = m.beta(nodes) @ weights
    return complex(a), complex(b)


# The extension itself ---------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    x_lo: float = -8.0
    x_hi: float = 8.0
    n_cols: int = 512
    y_min: float = 2.0 ** -10
    y_max: float = 4.0
    rows_per_octave: int = 4
    anchor_cols: tuple[float, ...] = ()  # dyadic column refinement near these

    def xs(self) -> np.ndarray:
        xs = set(np.linspace(self.x_lo, self.x_hi, self.n_cols))
        for a in self.anchor_cols:
            for k in range(-12, 3):
                for mlt in (1.0, 1.5):
                    for s in (1.0, -1.0):
                        p = a + s * mlt * 2.0 ** k
                        if self.x_lo < p < self.x_hi:
                            xs.add(p)
            xs.add(a)
        return np.asarray(sorted(xs))

    def ys(self) -> np.ndarray:
        k0 = math.log2(self.y_min)
        k1 = math.log2(self.y_max)
        n = int(round((k1 - k0) * self.rows_per_octave)) + 1
        return 2.0 ** np.linspace(k0, k1, n)


@dataclass
class ExtensionField:
    xs: np.ndarray
    ys: np.ndarray
    rho: np.ndarray    # complex, [iy, ix]
    dbar: np.ndarray | None = None
    d: np.ndarray | None = None


def _conv_row(sample_fn, window_fn, xs: np.ndarray, y: float,
              n_nodes: int = 32, tol: float = 1e-9, n_max: int = 256):
    """integral over [-1,1] of window(u) * sample(x - y u) du for every column."""
    prev = None
    n = n_nodes
    while True:
        nodes, weights = leggauss(n)
        pts = xs[:, None] - y * nodes[None, :]
        vals = sample_fn(pts)
        w = window_fn(nodes) * weights
        out = vals @ w
        if prev is not None and np.max(np.abs(out - prev)) < tol:
            return out
        if n >= n_max:
            return out
        prev = out
        n *= 2


def semmes_extend(k: Homeomorphism, m: MollifierPair | None = None,
                  grid: GridSpec | None = None) -> ExtensionField:
    """rho(x, y) = (phi_y * k)(x) + i (psi_y * k)(x) on the grid."""
    if m is None:
        m = MollifierPair()
    if grid is None:
        grid = GridSpec()
    xs = grid.xs()
    ys = grid.ys()
    rho = np.empty((len(ys), len(xs)), dtype=complex)
    for iy, y in enumerate(ys):
        re = _conv_row(k.eval, m.phi, xs, float(y))
        im = _conv_row(k.eval, m.psi, xs, float(y))
        rho[iy] = re + 1j * im
    return ExtensionField(xs, ys, rho)


def alpha_beta_fields(k: Homeomorphism, m: MollifierPair | None = None,
                      grid: GridSpec | None = None,
                      field: ExtensionField | None = None) -> ExtensionField:
    """Wirtinger derivatives dbar(rho) = alpha_y * e^a, d(rho) = beta_y * e^a."""
    if m is None:
        m = MollifierPair()
    if grid is None:
        grid = GridSpec()
    if field is None:
        field = semmes_extend(k, m, grid)
    xs, ys = field.xs, field.ys
    dbar = np.empty((len(ys), len(xs)), dtype=complex)
    d = np.empty_like(dbar)
    for iy, y in enumerate(ys):
        dbar[iy] = (_conv_row(k.deriv, lambda u: m.alpha(u).real, xs, float(y))
                    + 1j * _conv_row(k.deriv, lambda u: m.alpha(u).imag, xs, float(y)))
        d[iy] = (_conv_row(k.deriv, lambda u: m.beta(u).real, xs, float(y))
                 + 1j * _conv_row(k.deriv, lambda u: m.beta(u).imag, xs, float(y)))
    field.dbar = dbar
    field.d = d
    return field


@dataclass(frozen=True)
class BeltramiField:
    xs: np.ndarray
    ys: np.ndarray
    mu: np.ndarray
    sup_mu: float
    density: MeasureDensity  # |mu|^2 / y as a grid density


class DegenerateJacobianError(ArithmeticError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def beltrami(field: ExtensionField, floor: float = 1e-12) -> BeltramiField:
    """mu = dbar(rho) / d(rho), plus the Carleson density |mu|^2/y."""
    if field.dbar is None or field.d is None:
        raise ValueError("run alpha_beta_fields first")
    mod = np.abs(field.d)
    if mod.min() <= floor:
        iy, ix = np.unravel_index(int(np.argmin(mod)), mod.shape)
        raise DegenerateJacobianError(
            f"|d rho| below floor at x={field.xs[ix]:.6g}, y={field.ys[iy]:.6g}",
            witness=(float(field.xs[ix]), float(field.ys[iy])))
    mu = field.dbar / field.d
    w = (np.abs(mu) ** 2) / field.ys[:, None]
    dens = grid_density(field.xs, field.ys, w, domain="H", name="|mu|^2/y")
    return BeltramiField(field.xs, field.ys, mu, float(np.abs(mu).max()), dens)
