"""Named test corpora shared by the verify driver and the test suite.

Each corpus pairs a name with the expected classification where the theory
pins one down; the verify pipelines compare left- and right-hand classifiers
entry by entry.
"""

from __future__ import annotations

import math

import numpy as np

from . import descriptors as D
from . import schwarzian as S
from .carleson import MeasureDensity, Support
from .extension import Homeomorphism


def spline_descriptor(n_knots: int = 301) -> D.FunctionDescriptor:
    """Noise-free tabulated entry: smooth compactly supported samples."""
    xs = np.linspace(-3.0, 3.0, n_knots)
    ys = (np.maximum(1.0 - (xs / 3.0) ** 2, 0.0) ** 3) * (1.0 + 0.3 * np.sin(2.0 * xs))
    ys[0] = ys[-1] = 0.0
    return D.tabulated(xs, ys, zero_outside=True)


def function_corpus():
    """The nine-function corpus with known three-limit classifications."""
    return [
        ("zero", D.constant(0.0), "CMO-like"),
        ("const", D.constant(2.5), "CMO-like"),
        ("bump", D.bump(height=1.0), "CMO-like"),
        ("sin", D.sine(), "VMO-like"),
        ("sign", D.sign_function(), "BMO-only"),
        ("chi01", D.indicator(0.0, 1.0), "BMO-only"),
        ("log_abs", D.log_abs(1.0), "BMO-only"),
        ("half_log_abs", D.log_abs(0.5), "BMO-only"),
        ("bump_plus_sin", D.bump().plus(D.sine()), "VMO-like"),
        ("spline", spline_descriptor(), "CMO-like"),
    ]


def circle_corpus():
    """Circle functions with known VMO(S^1) status (angle variable in [0, 2pi))."""
    cos1 = D.FunctionDescriptor(D.Sine(1.0, math.pi / 2.0))
    trig = D.FunctionDescriptor(D.Sum((
        D.Sine(1.0, 0.0), D.Scale(0.5, D.Sine(2.0, 0.3)), D.Scale(0.25, D.Sine(3.0, 1.0)),
    )))
    smoothed_arc = D.FunctionDescriptor(D.Sum((
        D.SmoothStep(1.5, 0.2), D.Scale(-1.0, D.SmoothStep(3.5, 0.2)),
    )))
    raw_arc = D.FunctionDescriptor(D.Indicator(1.5, 3.5))
    return [
        ("cos", cos1, True),
        ("trig_poly", trig, True),
        ("smoothed_arc", smoothed_arc, True),
        ("raw_arc", raw_arc, False),
    ]


def _disk_bump(cx: float, cy: float, r: float):
    def fn(x, y):
        d2 = (np.asarray(x) - cx) ** 2 + (np.asarray(y) - cy) ** 2
        return np.maximum(1.0 - d2 / (r * r), 0.0) ** 2

    rad = math.hypot(cx, cy) + r
    return MeasureDensity("D", fn=fn, support=Support("disk", r0=min(rad, 1.0), bound=1.0))


def disk_density_corpus():
    """Disk measures with known CM0(D) status."""
    ring = MeasureDensity(
        "D",
        fn=lambda x, y: np.maximum(1.0 - ((np.sqrt(x ** 2 + y ** 2) - 0.6) / 0.2) ** 2,
                                   0.0) ** 2,
        support=Support("disk", r0=0.8, bound=1.0), name="ring")
    uniform = MeasureDensity("D", fn=lambda x, y: np.ones(np.broadcast(x, y).shape),
                             support=Support("disk", r0=1.0, bound=1.0), name="uniform")
    zero = MeasureDensity("D", fn=lambda x, y: np.zeros(np.broadcast(x, y).shape),
                          support=Support("disk", r0=0.5, bound=0.0), name="zero")
    return [
        ("zero", zero, True),
        ("uniform", uniform, True),
        ("center_bump", _disk_bump(0.0, 0.0, 0.5), True),
        ("offset_bump", _disk_bump(0.3, -0.2, 0.3), True),
        ("ring", ring, True),
    ]


def strip_density() -> MeasureDensity:
    """y restricted to the unit strip: CM0(H) but not CMs(H); ratio min(|I|,1)^2/2."""
    return MeasureDensity(
        "H", fn=lambda x, y: np.where(np.asarray(y) < 1.0, np.asarray(y, dtype=float), 0.0),
        support=Support("strip", strip=(0.0, 1.0), bound=1.0), name="strip")


def homeomorphism_corpus():
    """Log-derivatives for the boundary-correspondence suite."""
    spline = spline_descriptor(201)
    return [
        ("identity", D.constant(0.0), "CMO-like"),
        ("bump_010", D.bump(height=0.10), "CMO-like"),
        ("bump_005", D.bump(height=0.05), "CMO-like"),
        ("spline_small", D.FunctionDescriptor(D.Scale(0.1, spline.body)), "CMO-like"),
        ("half_log_clip", D.clipped_log_abs(0.5, 16.0), "BMO-only"),
        ("log_clip", D.clipped_log_abs(1.0, 16.0), "BMO-only"),
    ]


def make_homeo(logderiv: D.FunctionDescriptor) -> Homeomorphism:
    return Homeomorphism(logderiv, 0.0)


def analytic_map_corpus():
    """Registry maps with known CMs status of |S|^2 y^3 (and |N|^2 y).

    Non-affine Mobius maps are excluded: they are the Teichmueller-trivial
    factor on which the Schwarzian condition is blind by design.
    """
    return [
        ("affine", S.mobius_map(2.0, 1.0, 0.0, 1.0), True),
        ("affine_shift", S.mobius_map(1.0, -3.0, 0.0, 1.0), True),
        ("pole_010", S.pole_perturbation(0.10, -2j), True),
        ("pole_005", S.pole_perturbation(0.05, -1j), True),
        ("log_boundary", S.log_branch(0j), False),
        ("log_interior", S.log_branch(-1j), False),
    ]
