"""Limit profiles and the finite-ladder verdict rule.

The asymptotic statements being tested are limits (scale to zero, scale to
infinity, translation to infinity); a finite ladder can only certify a
trend, so the rule is explicit and configurable: a profile "vanishes" when
its last `tail_m` values sit below a threshold tied to the global scale of
the quantity and do not trend upward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VANISHES = "vanishes"
PERSISTS = "persists"
INCONCLUSIVE = "inconclusive"
GROWS = "grows"


@dataclass(frozen=True)
class ProfileConfig:
    tail_m: int = 4
    vanish_factor: float = 1e-2
    growth_ratio: float = 4.0
    growth_level: float = 10.0
    norm_ceiling: float = 1e3

    def threshold(self, reference: float) -> float:
        return self.vanish_factor * max(reference, 1.0)


@dataclass(frozen=True)
class LimitProfile:
    """Ordered (parameter, sup-value) samples for one limit regime."""

    regime: str
    params: tuple[float, ...]
    values: tuple[float, ...]
    verdict: str
    witness: float  # parameter achieving the max residual
    threshold: float
    per_length: dict = field(default_factory=dict, compare=False)

    @property
    def max_value(self) -> float:
        return max(self.values) if self.values else 0.0


def judge(values, threshold: float, config: ProfileConfig, reference: float = 1.0) -> str:
    """Apply the trend rule to an ordered profile (limit direction last)."""
    v = np.asarray(values, dtype=float)
    m = config.tail_m
    if len(v) < m:
        return INCONCLUSIVE
    tail = v[-m:]
    if np.all(tail < threshold):
        slack = np.maximum(0.05 * tail[:-1], 1e-3 * threshold)
        if np.all(tail[1:] <= tail[:-1] + slack) or np.all(tail < 0.05 * threshold):
            return VANISHES
        return INCONCLUSIVE
    increasing = np.all(tail[1:] > tail[:-1])
    if increasing and tail[-1] >= config.growth_ratio * tail[0] \
            and tail[-1] >= config.growth_level * max(reference, 1.0):
        return GROWS
    if np.all(tail >= threshold):
        return PERSISTS
    return INCONCLUSIVE


def make_profile(regime: str, params, values, threshold: float,
                 config: ProfileConfig, reference: float = 1.0,
                 per_length: dict | None = None) -> LimitProfile:
    params = tuple(float(p) for p in params)
    values = tuple(float(v) for v in values)
    verdict = judge(values, threshold, config, reference)
    if per_length:
        sub = {k: judge(vs, threshold, config, reference) for k, vs in per_length.items()}
        # the combined verdict must not mask a persisting reference length
        if verdict == VANISHES and any(s != VANISHES for s in sub.values()):
            verdict = INCONCLUSIVE if all(s != PERSISTS for s in sub.values()) else PERSISTS
    else:
        sub = {}
    witness = params[int(np.argmax(values))] if values else float("nan")
    return LimitProfile(regime, params, values, verdict, witness, threshold, sub)


# Class verdicts shared by the oscillation and Poisson classifiers
CMO_LIKE = "CMO-like"
VMO_LIKE = "VMO-like"
BMO_ONLY = "BMO-only"
NOT_BMO = "not-BMO"


def combine_class(small: LimitProfile, large: LimitProfile, trans: LimitProfile,
                  norm: float, config: ProfileConfig) -> str:
    """Three-limit classification (vanish at small scale, large scale, translation)."""
    verdicts = (small.verdict, large.verdict, trans.verdict)
    if GROWS in verdicts or norm > config.norm_ceiling:
        return NOT_BMO
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    if all(v == VANISHES for v in verdicts):
        return CMO_LIKE
    if small.verdict == VANISHES:
        return VMO_LIKE
    if small.verdict == PERSISTS:
        return BMO_ONLY
    return INCONCLUSIVE
