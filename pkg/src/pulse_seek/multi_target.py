"""Localizing the first of ``n`` uniformly placed sources with one receiver.

Arc lengths are fractions of the unit circle.  The in-aperture count at a
registration follows a shifted binomial law, which makes the mean time of a
ladder scan a simple sum over rungs; the optimal rungs solve a second-order
recurrence that is integrated by shooting on the first rung.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._workers import worker_count
from .core import ApertureLadder
from .errors import (
    AllInfeasible,
    ApertureOrderViolation,
    EpsilonOutOfRange,
    KOutOfRange,
    LadderInvalid,
    LOutOfRange,
    NoSolution,
    NOutOfRange,
)

SHOOT_GRID = 4000
LANDING_TOL = 1e-10
TIE_TOL = 1e-9


def prob_k_in_aperture(n: int, k: int, l: float) -> float:
    """P(exactly ``k`` sources in an aperture of arc ``l`` at a registration).

    The initiator is always inside; each of the other ``n - 1`` sources is
    inside independently with probability ``l``.
    """
    if n < 1:
        raise NOutOfRange("n must be >= 1")
    if not 1 <= k <= n:
        raise KOutOfRange(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0 < l <= 1:
        raise LOutOfRange(f"need 0 < l <= 1, got {l}")
    return math.comb(n - 1, k - 1) * l ** (k - 1) * (1 - l) ** (n - k)


def count_distribution(n: int, l: float) -> np.ndarray:
    """``prob_k_in_aperture(n, k, l)`` for ``k = 1..n``."""
    return np.array([prob_k_in_aperture(n, k, l) for k in range(1, n + 1)])


def composition_invariance_check(n: int, l1: float, l2: float) -> tuple[np.ndarray, np.ndarray]:
    """Two-stage count law versus a direct scan with the narrower aperture.

    Returns ``(two_stage, direct)`` indexed by ``k - 1``; the two agree, so
    the first aperture leaves no trace on the count distribution.
    """
    if not 0 < l2 < l1 < 1:
        raise ApertureOrderViolation(f"need 0 < l2 < l1 < 1, got l1={l1}, l2={l2}")
    first = count_distribution(n, l1)
    ratio = l2 / l1
    two_stage = np.zeros(n)
    for k in range(1, n + 1):
        two_stage[k - 1] = math.fsum(first[i - 1] * prob_k_in_aperture(i, k, ratio) for i in range(k, n + 1))
    return two_stage, count_distribution(n, l2)


def step_mean_time(n: int, l_prev: float, l_cur: float, lam: float = 1.0) -> float:
    """Mean time of one rung: scanning arc ``l_prev`` with aperture ``l_cur``."""
    if not 0 < l_cur < l_prev <= 1:
        raise ApertureOrderViolation(f"need 0 < l_cur < l_prev <= 1, got {l_prev}, {l_cur}")
    return (1.0 - (1.0 - l_prev) ** n) / (n * lam * l_cur)


def total_mean_time(n: int, ladder: ApertureLadder, lam: float = 1.0) -> float:
    """Mean time to localize the first of ``n`` sources down ``ladder``."""
    w = ladder.widths
    if not math.isclose(w[0], 1.0, rel_tol=0, abs_tol=1e-12):
        raise LadderInvalid("multi-target ladders start at the full unit circle")
    return math.fsum(step_mean_time(n, a, b, lam) for a, b in zip(w, w[1:]))


def _ladder_tau(n: int, widths) -> float:
    w = np.asarray(widths, dtype=float)
    return float(np.sum((1.0 - (1.0 - w[:-1]) ** n) / w[1:])) / n


def _shoot(n: int, epsilon: float, m: int, l1):
    """Integrate the stationarity recurrence from ``(1, l1)`` out to ``l_m``.

    Returns the rung array (shape ``(m + 1, len(l1))``) and a mask of starts
    whose interior rungs stay strictly decreasing and above ``epsilon``.
    """
    l1 = np.atleast_1d(np.asarray(l1, dtype=float))
    rungs = np.empty((m + 1, l1.size))
    rungs[0], rungs[1] = 1.0, l1
    ok = (l1 > epsilon) & (l1 < 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for i in range(1, m):
            prev, cur = rungs[i - 1], rungs[i]
            nxt = n * cur**2 * (1.0 - cur) ** (n - 1) / (1.0 - (1.0 - prev) ** n)
            rungs[i + 1] = nxt
            ok &= np.isfinite(nxt) & (nxt < cur)
            if i < m - 1:
                ok &= nxt > epsilon
    return rungs, ok


def stationarity_residuals(n: int, ladder: ApertureLadder) -> np.ndarray:
    """``l_{i+1}`` minus the recurrence prediction at every interior rung."""
    w = np.asarray(ladder.widths)
    prev, cur, nxt = w[:-2], w[1:-1], w[2:]
    return nxt - n * cur**2 * (1.0 - cur) ** (n - 1) / (1.0 - (1.0 - prev) ** n)


def _solve_for_m(n: int, epsilon: float, m: int) -> tuple[ApertureLadder, float]:
    if m == 1:
        ladder = ApertureLadder((1.0, epsilon))
        return ladder, _ladder_tau(n, ladder.widths)

    # The landing rung is not monotone in l1 for n > 1 (the recurrence map
    # peaks at l = 2/(n+1)), so scan for every sign change and bisect each.
    grid = np.geomspace(epsilon, 1.0, SHOOT_GRID + 2)[1:-1]
    rungs, ok = _shoot(n, epsilon, m, grid)
    miss = rungs[-1] - epsilon
    candidates = []
    for j in np.flatnonzero(ok[:-1] & ok[1:] & (np.sign(miss[:-1]) != np.sign(miss[1:]))):
        a, b = grid[j], grid[j + 1]
        fa = miss[j]
        for _ in range(200):
            c = 0.5 * (a + b)
            if c in (a, b):
                break
            fc = _shoot(n, epsilon, m, c)[0][-1, 0] - epsilon
            if fc == 0:
                a = b = c
                break
            if np.sign(fc) == np.sign(fa):
                a, fa = c, fc
            else:
                b = c
        rung, good = _shoot(n, epsilon, m, 0.5 * (a + b))
        if not good[0] or abs(rung[-1, 0] - epsilon) > LANDING_TOL:
            continue
        widths = rung[:, 0].tolist()
        widths[-1] = epsilon
        candidates.append((_ladder_tau(n, widths), widths))
    if not candidates:
        raise NoSolution(f"no stationary {m}-step ladder for n={n}, epsilon={epsilon}")
    tau, widths = min(candidates, key=lambda c: c[0])
    return ApertureLadder(tuple(widths)), tau


def step_cap(epsilon: float) -> int:
    return math.ceil(-math.log(epsilon)) + 4


def optimize_ladder(n: int, epsilon: float, lam: float = 1.0) -> tuple[int, ApertureLadder, float]:
    """Time-optimal step count, ladder and mean time for ``n`` sources.

    Every step count up to ``step_cap(epsilon)`` is solved; counts without a
    stationary ladder are skipped, and near-ties go to the smaller count.
    """
    if n < 1:
        raise NOutOfRange("n must be >= 1")
    if not 0 < epsilon < 1:
        raise EpsilonOutOfRange(f"need 0 < epsilon < 1, got {epsilon}")
    ms = range(1, step_cap(epsilon) + 1)

    def attempt(m):
        try:
            return m, _solve_for_m(n, epsilon, m)
        except NoSolution:
            return m, None

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(attempt, ms))
    else:
        results = [attempt(m) for m in ms]

    best = None
    for m, res in results:
        if res is None:
            continue
        if best is None or res[1] < best[2] - TIE_TOL:
            best = (m, res[0], res[1])
    if best is None:
        raise AllInfeasible(f"no feasible ladder for n={n}, epsilon={epsilon}")
    m, ladder, tau = best
    return m, ladder, tau / lam
