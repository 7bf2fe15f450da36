"""Closed-form and tabulated boundary functions, intervals and ladders.

A FunctionDescriptor wraps a small expression tree (constants, affine,
indicators, sign, log|x|, |x|^p, polynomial bumps and ramps, sines, sums,
clips, tabulated data, and the circle-to-line pullback used by the Cayley
transport) and compiles it to a stack program.  Alongside the pointwise
values it carries the structure quadrature needs: breakpoints, singular
points, an active radius for ladder placement, and a tail model
(two-sided limits plus a residual envelope) that makes improper integrals
against the Poisson kernel honestly boundable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .program import Program, ProgramBuilder
from .quadrature import Integrand

# residual envelope component kinds
ENV_DECAY = "decay"      # amp * (radius/|x|)^q
ENV_OSC = "osc"          # periodic-ish zero-mean residual, amp bound, param = frequency
ENV_BOUNDED = "bounded"  # amp
ENV_LOG = "log"          # amp * log|x|   (radius >= e)
ENV_POWER = "power"      # amp * |x|^p, 0 < p < 1
ENV_DIVERGENT = "divergent"


@dataclass(frozen=True)
class EnvComponent:
    kind: str
    amp: float
    param: float = 1.0  # decay rate q, frequency, or power exponent p


@dataclass(frozen=True)
class Tail:
    """Behavior of f outside [-radius, radius].

    f(t) = (left or right limit) + residual, with the residual bounded by the
    sum of the envelope components.
    """

    left: float
    right: float
    radius: float
    envs: tuple[EnvComponent, ...] = ()

    @property
    def compact(self) -> bool:
        return not self.envs and self.left == 0.0 and self.right == 0.0

    @property
    def divergent(self) -> bool:
        return any(e.kind == ENV_DIVERGENT for e in self.envs)

    @property
    def has_osc(self) -> bool:
        return any(e.kind == ENV_OSC for e in self.envs)

    def scaled(self, c: float) -> "Tail":
        a = abs(c)
        return Tail(c * self.left, c * self.right, self.radius,
                    tuple(EnvComponent(e.kind, a * e.amp, e.param) for e in self.envs))


def _tail(left, right, radius, *envs) -> Tail:
    envs = tuple(e for e in envs if e.amp != 0.0 or e.kind == ENV_DIVERGENT)
    if any(e.kind == ENV_LOG for e in envs):
        radius = max(radius, math.e)
    return Tail(left, right, radius, envs)


def sum_tails(tails: list[Tail]) -> Tail:
    radius = max([t.radius for t in tails] + [1.0])
    envs = tuple(e for t in tails for e in t.envs)
    return _tail(sum(t.left for t in tails), sum(t.right for t in tails),
                 radius, *envs)


# Body nodes -----------------------------------------------------------------


class Body:
    """Base expression node; subclasses are tiny frozen dataclasses."""

    def emit(self, b: ProgramBuilder, var_slot: int | None) -> None:
        raise NotImplementedError

    def breakpoints(self):
        return ()

    def singularities(self):
        return ()

    def tail(self) -> Tail:
        raise NotImplementedError

    def active_radius(self) -> float:
        return 1.0

    def suggest_step(self) -> float | None:
        """Panel width hint for oscillatory bodies (None = no hint)."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


def _var(b: ProgramBuilder, var_slot):
    if var_slot is None:
        b.x()
    else:
        b.pick(b.height - 1 - var_slot)


@dataclass(frozen=True)
class Const(Body):
    value: float

    def emit(self, b, var_slot):
        b.const(self.value)

    def tail(self):
        return Tail(self.value, self.value, 1.0)

    def to_json(self):
        return {"kind": "const", "value": self.value}


@dataclass(frozen=True)
class Affine(Body):
    slope: float
    intercept: float = 0.0

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.const(self.slope).mul().const(self.intercept).add()

    def tail(self):
        if self.slope == 0.0:
            return Tail(self.intercept, self.intercept, 1.0)
        return _tail(0.0, 0.0, 1.0, EnvComponent(ENV_DIVERGENT, math.inf))

    def active_radius(self):
        return 4.0

    def to_json(self):
        return {"kind": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class Indicator(Body):
    lo: float
    hi: float

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.indicator(self.lo, self.hi)

    def breakpoints(self):
        return (self.lo, self.hi)

    def tail(self):
        return Tail(0.0, 0.0, max(abs(self.lo), abs(self.hi), 1.0))

    def active_radius(self):
        return max(abs(self.lo), abs(self.hi), 1.0)

    def to_json(self):
        return {"kind": "indicator", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class SignFn(Body):
    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.sign()

    def breakpoints(self):
        return (0.0,)

    def tail(self):
        return Tail(-1.0, 1.0, 1.0)

    def active_radius(self):
        return 4.0

    def to_json(self):
        return {"kind": "sign"}


@dataclass(frozen=True)
class LogAbs(Body):
    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.log_abs()

    def singularities(self):
        return (0.0,)

    def tail(self):
        return _tail(0.0, 0.0, math.e, EnvComponent(ENV_LOG, 1.0))

    def active_radius(self):
        return 4.0

    def to_json(self):
        return {"kind": "log_abs"}


@dataclass(frozen=True)
class PowAbs(Body):
    """|x|^p, optionally signed: sign(x) |x|^p."""

    power: float
    signed: bool = False

    def emit(self, b, var_slot):
        _var(b, var_slot)
        if self.signed:
            b.dup().sign().swap().abs().pow_const(self.power).mul()
        else:
            b.abs().pow_const(self.power)

    def breakpoints(self):
        return (0.0,) if self.power > 0 else ()

    def singularities(self):
        return (0.0,) if self.power < 0 else ()

    def tail(self):
        p = self.power
        if p < 0:
            return _tail(0.0, 0.0, 1.0, EnvComponent(ENV_DECAY, 1.0, -p))
        if p < 1:
            return _tail(0.0, 0.0, 1.0, EnvComponent(ENV_POWER, 1.0, p))
        return _tail(0.0, 0.0, 1.0, EnvComponent(ENV_DIVERGENT, math.inf))

    def active_radius(self):
        return 4.0

    def to_json(self):
        return {"kind": "pow_abs", "power": self.power, "signed": self.signed}


_BUMP_POLY = (-1.0, 0.0, 3.0, 0.0, -3.0, 0.0, 1.0)  # (1-u^2)^3
_STEP_POLY = (-5 / 32, 0.0, 21 / 32, 0.0, -35 / 32, 0.0, 35 / 32, 0.5)


@dataclass(frozen=True)
class Bump(Body):
    """C^2 bump height*(1-u^2)^3 with u = (x-center)/width, support width 1 each side."""

    center: float = 0.0
    width: float = 1.0
    height: float = 1.0

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.const(self.center).sub().const(self.width).div()
        b.min_const(1.0).max_const(-1.0).poly(_BUMP_POLY)
        b.const(self.height).mul()

    def breakpoints(self):
        return (self.center - self.width, self.center + self.width)

    def tail(self):
        return Tail(0.0, 0.0, abs(self.center) + self.width)

    def active_radius(self):
        return abs(self.center) + self.width

    def to_json(self):
        return {"kind": "bump", "center": self.center, "width": self.width,
                "height": self.height}


@dataclass(frozen=True)
class SmoothStep(Body):
    """C^2 ramp from 0 to 1 across [center-width, center+width]."""

    center: float = 0.0
    width: float = 1.0

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.const(self.center).sub().const(self.width).div()
        b.min_const(1.0).max_const(-1.0).poly(_STEP_POLY)

    def breakpoints(self):
        return (self.center - self.width, self.center + self.width)

    def tail(self):
        return Tail(0.0, 1.0, abs(self.center) + self.width)

    def active_radius(self):
        return abs(self.center) + self.width

    def to_json(self):
        return {"kind": "smooth_step", "center": self.center, "width": self.width}


@dataclass(frozen=True)
class Sine(Body):
    freq: float = 1.0
    phase: float = 0.0

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.const(self.freq).mul().const(self.phase).add().sin()

    def tail(self):
        return _tail(0.0, 0.0, 1.0, EnvComponent(ENV_OSC, 1.0, abs(self.freq)))

    def active_radius(self):
        return max(8.0, 4.0 * 2.0 * math.pi / abs(self.freq))

    def suggest_step(self):
        return math.pi / abs(self.freq)

    def to_json(self):
        return {"kind": "sine", "freq": self.freq, "phase": self.phase}


@dataclass(frozen=True)
class Scale(Body):
    factor: float
    inner: Body

    def emit(self, b, var_slot):
        self.inner.emit(b, var_slot)
        b.const(self.factor).mul()

    def breakpoints(self):
        return self.inner.breakpoints()

    def singularities(self):
        return self.inner.singularities()

    def tail(self):
        return self.inner.tail().scaled(self.factor)

    def active_radius(self):
        return self.inner.active_radius()

    def suggest_step(self):
        return self.inner.suggest_step()

    def to_json(self):
        return {"kind": "scale", "factor": self.factor, "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Sum(Body):
    terms: tuple[Body, ...]

    def emit(self, b, var_slot):
        self.terms[0].emit(b, var_slot)
        for t in self.terms[1:]:
            t.emit(b, var_slot)
            b.add()

    def breakpoints(self):
        return tuple(p for t in self.terms for p in t.breakpoints())

    def singularities(self):
        return tuple(p for t in self.terms for p in t.singularities())

    def tail(self):
        return sum_tails([t.tail() for t in self.terms])

    def active_radius(self):
        return max(t.active_radius() for t in self.terms)

    def suggest_step(self):
        steps = [s for s in (t.suggest_step() for t in self.terms) if s is not None]
        return min(steps) if steps else None

    def to_json(self):
        return {"kind": "sum", "terms": [t.to_json() for t in self.terms]}


@dataclass(frozen=True)
class Clip(Body):
    """min(max(inner, lo), hi); absorbs inner singularities into kinks."""

    inner: Body
    lo: float
    hi: float

    def emit(self, b, var_slot):
        self.inner.emit(b, var_slot)
        b.min_const(self.hi).max_const(self.lo)

    def breakpoints(self):
        pts = list(self.inner.breakpoints()) + list(self.inner.singularities())
        pts += self._crossings()
        return tuple(pts)

    def singularities(self):
        return ()

    def _crossings(self):
        # exact clip-crossing radii for (scaled) log|x|, the corpus use case
        inner = self.inner
        c = 1.0
        if isinstance(inner, Scale):
            c, inner = inner.factor, inner.inner
        if isinstance(inner, LogAbs) and c != 0.0:
            out = []
            for bound in (self.lo, self.hi):
                try:
                    r = math.exp(bound / c)
                except OverflowError:
                    continue
                if 1e-300 < r < 1e300:
                    out += [-r, r]
            return out
        return []

    def tail(self):
        t = self.inner.tail()
        growing = any(e.kind in (ENV_LOG, ENV_POWER, ENV_DIVERGENT) for e in t.envs)
        span = self.hi - self.lo

        def side(limit):
            if growing:
                # every corpus body under a clip grows to +inf on both sides
                return self.hi
            return min(max(limit, self.lo), self.hi)

        radius = t.radius
        for r in self._crossings():
            radius = max(radius, abs(r))
        if growing:
            envs = ()
        else:
            envs = tuple(
                EnvComponent(e.kind, min(e.amp, span), e.param) for e in t.envs)
        return _tail(side(t.left), side(t.right), radius, *envs)

    def active_radius(self):
        return max([self.inner.active_radius()] + [abs(r) for r in self._crossings()])

    def suggest_step(self):
        return self.inner.suggest_step()

    def to_json(self):
        return {"kind": "clip", "lo": self.lo, "hi": self.hi,
                "inner": self.inner.to_json()}


@dataclass(frozen=True)
class ArgAffine(Body):
    """inner(scale*x + shift)."""

    inner: Body
    scale: float
    shift: float = 0.0

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.const(self.scale).mul().const(self.shift).add()
        slot = b.height - 1
        self.inner.emit(b, slot)
        b.swap().pop()

    def _pull(self, pts):
        return tuple((p - self.shift) / self.scale for p in pts)

    def breakpoints(self):
        return self._pull(self.inner.breakpoints())

    def singularities(self):
        return self._pull(self.inner.singularities())

    def tail(self):
        t = self.inner.tail()
        s = self.scale
        radius = (t.radius + abs(self.shift)) / abs(s)
        left, right = (t.left, t.right) if s > 0 else (t.right, t.left)
        envs = []
        for e in t.envs:
            if e.kind == ENV_LOG:
                envs.append(EnvComponent(ENV_LOG,
                    e.amp * (1.0 + abs(math.log(abs(s))) + abs(self.shift)), e.param))
                radius = max(radius, math.e)
            elif e.kind == ENV_POWER:
                envs.append(EnvComponent(ENV_POWER, e.amp * (2.0 * abs(s)) ** e.param,
                                         e.param))
            elif e.kind == ENV_DECAY:
                envs.append(EnvComponent(ENV_DECAY, e.amp, e.param))
                radius = max(radius, 2.0 * t.radius / abs(s))
            elif e.kind == ENV_OSC:
                envs.append(EnvComponent(ENV_OSC, e.amp, e.param * abs(s)))
            else:
                envs.append(e)
        return _tail(left, right, radius, *envs)

    def active_radius(self):
        return (self.inner.active_radius() + abs(self.shift)) / abs(self.scale)

    def suggest_step(self):
        s = self.inner.suggest_step()
        return None if s is None else s / abs(self.scale)

    def to_json(self):
        return {"kind": "arg_affine", "scale": self.scale, "shift": self.shift,
                "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Tabulated(Body):
    """Piecewise-linear table; outside the knots either zero or clamped."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    zero_outside: bool = True

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.table(self.xs, self.ys, self.zero_outside)

    def breakpoints(self):
        return self.xs

    def tail(self):
        r = max(abs(self.xs[0]), abs(self.xs[-1]), 1.0)
        if self.zero_outside:
            return Tail(0.0, 0.0, r)
        return Tail(self.ys[0], self.ys[-1], r)

    def active_radius(self):
        return max(abs(self.xs[0]), abs(self.xs[-1]), 1.0)

    def to_json(self):
        return {"kind": "tabulated", "xs": list(self.xs), "ys": list(self.ys),
                "zero_outside": self.zero_outside}


_THETA_POLY_NOTE = "theta(t) = pi + 2*atan(t), the Cayley boundary angle"


@dataclass(frozen=True)
class CirclePullback(Body):
    """g(theta(t)) for a circle function g; theta is the Cayley boundary angle."""

    circle: Body

    def emit(self, b, var_slot):
        _var(b, var_slot)
        b.atan().const(2.0).mul().const(math.pi).add()
        slot = b.height - 1
        self.circle.emit(b, slot)
        b.swap().pop()

    def breakpoints(self):
        out = []
        for th in self.circle.breakpoints():
            if 0.0 < th < 2.0 * math.pi:
                out.append(math.tan((th - math.pi) / 2.0))
        return tuple(out)

    def tail(self):
        # theta -> 2*pi (fromm below) as t -> +inf and -> 0+ as t -> -inf,
        # with |theta - limit| ~ 2/|t|; the residual envelope estimates the
        # circle function's variation rate numerically
        b = ProgramBuilder()
        self.circle.emit(b, None)
        prog = b.finish()
        th = np.linspace(1e-4, 2 * np.pi - 1e-4, 4096)
        vals = prog(th)
        slope = float(np.max(np.abs(np.diff(vals))) / (th[1] - th[0]))
        limit = float(prog(np.asarray(2 * np.pi - 1e-9)))
        return _tail(limit, limit, 8.0,
                     EnvComponent(ENV_DECAY, 8.0 * max(slope, 1e-12), 1.0))

    def active_radius(self):
        return 16.0

    def to_json(self):
        return {"kind": "circle_pullback", "circle": self.circle.to_json()}


_BODY_KINDS = {
    "const": Const, "affine": Affine, "indicator": Indicator, "sign": SignFn,
    "log_abs": LogAbs, "pow_abs": PowAbs, "bump": Bump, "smooth_step": SmoothStep,
    "sine": Sine, "scale": Scale, "sum": Sum, "clip": Clip,
    "arg_affine": ArgAffine, "tabulated": Tabulated, "circle_pullback": CirclePullback,
}


def body_from_json(d: dict) -> Body:
    kind = d.get("kind")
    if kind not in _BODY_KINDS:
        raise ValueError(f"unknown body kind {kind!r}")
    d = dict(d)
    d.pop("kind")
    if kind == "sum":
        return Sum(tuple(body_from_json(t) for t in d["terms"]))
    for key in ("inner", "circle"):
        if key in d:
            d[key] = body_from_json(d[key])
    if kind == "tabulated":
        d["xs"] = tuple(d["xs"])
        d["ys"] = tuple(d["ys"])
    return _BODY_KINDS[kind](**d)


# The descriptor itself ------------------------------------------------------


@dataclass(frozen=True)
class FunctionDescriptor:
    """A real function of one real variable with evaluation structure."""

    body: Body

    @cached_property
    def program(self) -> Program:
        b = ProgramBuilder()
        self.body.emit(b, None)
        return b.finish()

    def eval(self, x):
        return self.program(x)

    __call__ = eval

    @cached_property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.body.breakpoints())))

    @cached_property
    def singularities(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.body.singularities())))

    @cached_property
    def tail(self) -> Tail:
        return self.body.tail()

    @cached_property
    def active_radius(self) -> float:
        return self.body.active_radius()

    @cached_property
    def fine_step(self) -> float | None:
        return self.body.suggest_step()

    def integrand(self) -> Integrand:
        return Integrand(self.program, self.breakpoints, self.singularities,
                         self.fine_step)

    def shifted_abs_power(self, c: float, r: float) -> Integrand:
        """Integrand |f(x) - c|^r, the mean-oscillation residual."""
        b = ProgramBuilder()
        self.body.emit(b, None)
        b.const(c).sub().abs()
        if r != 1.0:
            b.pow_const(r)
        return Integrand(b.finish(), self.breakpoints, self.singularities,
                         self.fine_step)

    def exp_scaled(self, s: float) -> Integrand:
        """Integrand e^{s f(x)} for the Muckenhoupt quantities."""
        b = ProgramBuilder()
        self.body.emit(b, None)
        if s != 1.0:
            b.const(s).mul()
        b.exp()
        return Integrand(b.finish(), self.breakpoints, self.singularities,
                         self.fine_step)

    def plus(self, other: "FunctionDescriptor") -> "FunctionDescriptor":
        return FunctionDescriptor(Sum((self.body, other.body)))

    def scaled(self, c: float) -> "FunctionDescriptor":
        return FunctionDescriptor(Scale(c, self.body))

    def arg_affine(self, scale: float, shift: float = 0.0) -> "FunctionDescriptor":
        return FunctionDescriptor(ArgAffine(self.body, scale, shift))

    def to_json(self) -> dict:
        return {"body": self.body.to_json()}

    @staticmethod
    def from_json(d: dict) -> "FunctionDescriptor":
        return FunctionDescriptor(body_from_json(d["body"]))


# convenience constructors used across the test corpus
def constant(c: float) -> FunctionDescriptor:
    return FunctionDescriptor(Const(c))


def sign_function() -> FunctionDescriptor:
    return FunctionDescriptor(SignFn())


def indicator(lo: float, hi: float) -> FunctionDescriptor:
    return FunctionDescriptor(Indicator(lo, hi))


def log_abs(scale: float = 1.0) -> FunctionDescriptor:
    body = LogAbs() if scale == 1.0 else Scale(scale, LogAbs())
    return FunctionDescriptor(body)


def clipped_log_abs(scale: float = 1.0, bound: float = 16.0) -> FunctionDescriptor:
    return FunctionDescriptor(Clip(Scale(scale, LogAbs()), -bound, bound))


def bump(center: float = 0.0, width: float = 1.0, height: float = 1.0) -> FunctionDescriptor:
    return FunctionDescriptor(Bump(center, width, height))


def sine(freq: float = 1.0, phase: float = 0.0) -> FunctionDescriptor:
    return FunctionDescriptor(Sine(freq, phase))


def tabulated(xs, ys, zero_outside: bool = True) -> FunctionDescriptor:
    return FunctionDescriptor(Tabulated(tuple(map(float, xs)), tuple(map(float, ys)),
                                        zero_outside))


# Intervals and ladders -------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    center: float
    length: float

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("interval length must be positive")

    @property
    def lo(self) -> float:
        return self.center - 0.5 * self.length

    @property
    def hi(self) -> float:
        return self.center + 0.5 * self.length

    @staticmethod
    def from_endpoints(lo: float, hi: float) -> "Interval":
        return Interval(0.5 * (lo + hi), hi - lo)

    def dilate(self, a: float) -> "Interval":
        return Interval(self.center, a * self.length)

    def translate(self, x0: float) -> "Interval":
        return Interval(self.center + x0, self.length)


@dataclass(frozen=True)
class IntervalLadder:
    """Dyadic scales x centers, plus outward translation probes.

    Discretizes the three limit regimes (|I| -> 0, |I| -> infinity,
    I translated to infinity); the ladder max is a lower bound for any
    supremum over all intervals and is documented as such.
    """

    k_min: int = -12
    k_max: int = 12
    n_centers: int = 17
    center_radius: float = 8.0
    translation_j_max: int = 14
    translation_lengths: tuple[float, ...] = (0.25, 1.0, 4.0)

    def __post_init__(self):
        if not (self.k_min < 0 < self.k_max):
            raise ValueError("ladder must straddle unit scale (k_min < 0 < k_max)")
        if self.n_centers < 1:
            raise ValueError("need at least one center per scale")

    @staticmethod
    def for_function(f: FunctionDescriptor, **kw) -> "IntervalLadder":
        return IntervalLadder(center_radius=max(f.active_radius, 1.0), **kw)

    def scales(self) -> np.ndarray:
        return 2.0 ** np.arange(self.k_min, self.k_max + 1)

    def centers(self, length: float) -> np.ndarray:
        half = self.center_radius + length
        return np.linspace(-half, half, self.n_centers)

    def intervals_at(self, length: float):
        return [Interval(c, length) for c in self.centers(length)]

    def small_scale_lengths(self) -> np.ndarray:
        return 2.0 ** np.arange(-1, self.k_min - 1, -1)

    def large_scale_lengths(self) -> np.ndarray:
        return 2.0 ** np.arange(1, self.k_max + 1)

    def translation_offsets(self) -> np.ndarray:
        return 2.0 ** np.arange(0, self.translation_j_max + 1)

    def all_intervals(self):
        out = []
        for length in self.scales():
            out.extend(self.intervals_at(float(length)))
        for length in self.translation_lengths:
            for off in self.translation_offsets():
                out.append(Interval(self.center_radius + off, float(length)))
                out.append(Interval(-self.center_radius - off, float(length)))
        return out

    def to_json(self) -> dict:
        return {
            "k_min": self.k_min, "k_max": self.k_max,
            "n_centers": self.n_centers, "center_radius": self.center_radius,
            "translation_j_max": self.translation_j_max,
            "translation_lengths": list(self.translation_lengths),
        }

    @staticmethod
    def from_json(d: dict) -> "IntervalLadder":
        d = dict(d)
        if "translation_lengths" in d:
            d["translation_lengths"] = tuple(d["translation_lengths"])
        return IntervalLadder(**d)
