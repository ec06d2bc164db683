"""Cross-checks run by ``pulse-seek verify``.

Each check compares an observed value against an expected one at a stated
tolerance and records the outcome; nothing here raises on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .multi_receiver import (
    mean_time_multistage,
    plan_multistage,
    regime_boundaries,
    saturation_point,
    single_receiver_boundaries,
)
from .multi_target import composition_invariance_check, prob_k_in_aperture
from .oracle import mc_count_histogram, mc_region_probability

PROB_GRID_N = (2, 3, 5, 8)
PROB_GRID_L = (0.1, 0.3, 0.5, 0.7)
REGION_GRID_N = (2, 3, 4)


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "observed": self.observed, "expected": self.expected,
                "tolerance": self.tolerance, "passed": self.passed}


def cell_seed(seed: int, *cell) -> int:
    """Independent per-cell seed derived from the run seed and cell coordinates."""
    key = [int(seed)] + [int(round(c * 1_000_000)) for c in cell]
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


def _sigma_check(name, value, stderr, expected, sigmas=3.0) -> Check:
    tol = sigmas * stderr
    ok = abs(value - expected) <= tol if stderr > 0 else math.isclose(value, expected, abs_tol=1e-12)
    return Check(name, value, expected, tol, bool(ok))


def prob24_checks(trials: int, seed: int, region: bool = True) -> list[Check]:
    checks = []
    for n in PROB_GRID_N:
        for l in PROB_GRID_L:
            hist = mc_count_histogram(n, l, trials, cell_seed(seed, n, l))
            for k in range(1, n + 1):
                p = hist[k] / trials
                expected = prob_k_in_aperture(n, k, l)
                # binomial spread under the null, so rare counts of zero are judged fairly
                se = math.sqrt(expected * (1 - expected) / trials)
                checks.append(_sigma_check(f"mc_prob_k n={n} k={k} l={l}", p, se, expected))
    if region:
        for n in REGION_GRID_N:
            for l in PROB_GRID_L:
                for k in range(1, n + 1):
                    est = mc_region_probability(n, k, l, trials, cell_seed(seed, n, k, l, 1))
                    checks.append(_sigma_check(f"mc_region n={n} k={k} l={l}", est.value, est.stderr,
                                               prob_k_in_aperture(n, k, l)))
    return checks


def composition_checks(cases: int = 500, seed: int = 0, tol: float = 1e-12) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for _ in range(cases):
        n = int(rng.integers(1, 21))
        l1, l2 = sorted(rng.uniform(1e-6, 1 - 1e-6, 2), reverse=True)
        if l1 == l2:
            continue
        two_stage, direct = composition_invariance_check(n, float(l1), float(l2))
        diff = float(np.max(np.abs(two_stage - direct)))
        checks.append(Check(f"composition n={n} l1={l1:.6g} l2={l2:.6g}", diff, 0.0, tol, diff < tol))
    return checks


def boundary_checks(max_n: int = 6, max_m: int = 8, tol: float = 1e-9) -> list[Check]:
    """Mean time agrees on both sides of every regime boundary."""
    checks = []
    for n in range(2, max_n + 1):
        for M in range(1, max_m + 1):
            lower, _ = regime_boundaries(n, M)
            if lower < 1e-300:
                continue
            stretched = mean_time_multistage(n, M, lower)
            checks.append(Check(f"n={n} M={M}->{M + 1} transition", stretched, M + 1.0, tol,
                                abs(stretched - (M + 1)) <= tol))
            sat = saturation_point(n, M)
            at_sat = mean_time_multistage(n, M, sat)
            checks.append(Check(f"n={n} M={M} saturation", at_sat, float(M), tol, abs(at_sat - M) <= tol))
            below = plan_multistage(n, 1.0, lower * (1 - 1e-12)).mean_time
            above = plan_multistage(n, 1.0, lower * (1 + 1e-12)).mean_time
            checks.append(Check(f"n={n} M={M} plan continuity", below, above, 1e-6, abs(below - above) <= 1e-6))
    for M in range(1, max_m + 1):
        q, _ = single_receiver_boundaries(M)
        left = mean_time_multistage(1, M, q)
        right = mean_time_multistage(1, M + 1, q)
        checks.append(Check(f"n=1 M={M}->{M + 1} transition", left, right, tol, abs(left - right) <= tol))
    return checks
