"""Mean-oscillation functionals, BMO/VMO/CMO classification, A_p weights.

The supremum over all intervals is approximated by a ladder maximum and is
therefore a lower bound of the true value; stability of the result under
ladder refinement is the testable surrogate (see the test suite).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .descriptors import FunctionDescriptor, Interval, IntervalLadder
from .profiles import (
    INCONCLUSIVE, LimitProfile, ProfileConfig, combine_class, make_profile,
)
from .quadrature import DivergenceError, integrate

DEFAULT_TOL = 1e-9


def interval_mean(f: FunctionDescriptor, I: Interval, tol: float = DEFAULT_TOL) -> float:
    """(1/|I|) * integral of f over I."""
    return integrate(f.integrand(), I.lo, I.hi, tol=tol * I.length) / I.length


def mean_oscillation(f: FunctionDescriptor, I: Interval, r: float = 1.0,
                     tol: float = DEFAULT_TOL) -> float:
    """M_r(I) = (1/|I|) * integral over I of |f - mean|^r."""
    if r < 1.0:
        raise ValueError("exponent must be >= 1")
    c = interval_mean(f, I, tol)
    v = integrate(f.shifted_abs_power(c, r), I.lo, I.hi, tol=tol * I.length) / I.length
    return max(v, 0.0)


def _sup_over(f, intervals, r, tol, workers: int = 1) -> float:
    vals = _map_intervals(lambda I: mean_oscillation(f, I, r, tol), intervals, workers)
    return float(max(vals)) if vals else 0.0


def _map_intervals(fn, items, workers: int = 1):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    out = [None] * len(items)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, it): k for k, it in enumerate(items)}
        for fut, k in futures.items():
            out[k] = fut.result()
    return out


def bmo_norm(f: FunctionDescriptor, ladder: IntervalLadder | None = None,
             r: float = 1.0, tol: float = DEFAULT_TOL, workers: int = 1) -> float:
    """Ladder maximum of M_r; a lower bound for the supremum over all intervals."""
    if ladder is None:
        ladder = IntervalLadder.for_function(f)
    return _sup_over(f, ladder.all_intervals(), r, tol, workers)


def _translation_centers(ladder: IntervalLadder, offset: float) -> list[float]:
    shell = [offset * u for u in (1.0, 1.25, 1.5, 1.75)]
    base = ladder.center_radius
    return [base + s for s in shell] + [-(base + s) for s in shell]


@dataclass(frozen=True)
class OscillationProfiles:
    small: LimitProfile
    large: LimitProfile
    translation: LimitProfile
    norm: float
    threshold: float

    def as_tuple(self):
        return (self.small, self.large, self.translation)


def vanishing_profile(f: FunctionDescriptor, ladder: IntervalLadder | None = None,
                      r: float = 1.0, tol: float = DEFAULT_TOL,
                      config: ProfileConfig = ProfileConfig(),
                      workers: int = 1) -> OscillationProfiles:
    """Profiles for the three vanishing regimes of the CMO test."""
    if ladder is None:
        ladder = IntervalLadder.for_function(f)

    small_lengths = ladder.small_scale_lengths()
    large_lengths = ladder.large_scale_lengths()

    def sup_at(length: float) -> float:
        return _sup_over(f, ladder.intervals_at(length), r, tol, workers)

    small_vals = [sup_at(float(L)) for L in small_lengths]
    large_vals = [sup_at(float(L)) for L in large_lengths]

    offsets = ladder.translation_offsets()
    per_length: dict[float, list[float]] = {}
    for L in ladder.translation_lengths:
        vals = []
        for off in offsets:
            cands = [Interval(c, L) for c in _translation_centers(ladder, float(off))]
            vals.append(_sup_over(f, cands, r, tol, workers))
        per_length[L] = vals
    trans_vals = [max(per_length[L][j] for L in ladder.translation_lengths)
                  for j in range(len(offsets))]

    norm = float(max(max(small_vals), max(large_vals), max(trans_vals)))
    thr = config.threshold(norm)

    small = make_profile("small-scale", small_lengths, small_vals, thr, config, norm)
    large = make_profile("large-scale", large_lengths, large_vals, thr, config, norm)
    trans = make_profile("translation", offsets, trans_vals, thr, config, norm,
                         per_length=per_length)
    return OscillationProfiles(small, large, trans, norm, thr)


@dataclass(frozen=True)
class Classification:
    verdict: str
    norm: float
    profiles: OscillationProfiles


def classify(f: FunctionDescriptor, ladder: IntervalLadder | None = None,
             r: float = 1.0, tol: float = DEFAULT_TOL,
             config: ProfileConfig = ProfileConfig(),
             workers: int = 1) -> Classification:
    """BMO-only / VMO-like / CMO-like / not-BMO via the three-limit test."""
    profs = vanishing_profile(f, ladder, r, tol, config, workers)
    verdict = combine_class(profs.small, profs.large, profs.translation,
                            profs.norm, config)
    return Classification(verdict, profs.norm, profs)


def ap_test(f: FunctionDescriptor, I: Interval, p: float,
            tol: float = DEFAULT_TOL) -> float:
    """Muckenhoupt A_p quantity of the weight e^f on one interval (>= 1)."""
    if p <= 1.0:
        raise ValueError("A_p requires p > 1")
    try:
        m1 = integrate(f.exp_scaled(1.0), I.lo, I.hi, tol=tol * I.length) / I.length
        m2 = integrate(f.exp_scaled(-1.0 / (p - 1.0)), I.lo, I.hi,
                       tol=tol * I.length) / I.length
    except DivergenceError as e:
        raise DivergenceError(
            f"A_p integral diverges on [{I.lo:.6g}, {I.hi:.6g}]: {e}",
            witness=I) from e
    return m1 * m2 ** (p - 1.0)


def a_infinity_profile(f: FunctionDescriptor, ladder: IntervalLadder | None = None,
                       p: float = 2.0, tol: float = DEFAULT_TOL,
                       workers: int = 1) -> float:
    """Ladder supremum of the A_p quantity (finite for CMO-like f)."""
    if ladder is None:
        ladder = IntervalLadder.for_function(f)
    vals = _map_intervals(lambda I: ap_test(f, I, p, tol), ladder.all_intervals(),
                          workers)
    return float(max(vals))
