"""Brute-force ground truth for the closed forms used by the planners.

Two Monte Carlo estimators of the in-aperture count law (direct geometric
simulation, and importance sampling of ranked point configurations) and a
generic projected-Newton minimizer for separable convex load allocations.

Random streams come from numpy's Philox4x64-10 counter-based generator keyed
by ``(seed, block)``; trials are drawn in fixed-size blocks, so estimates do
not depend on how many workers run them.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._workers import worker_count
from .errors import EpsilonOutOfRange, KOutOfRange, LOutOfRange, NotConverged, NOutOfRange

RNG_ALGORITHM = "philox4x64-10"
BLOCK = 1 << 16


def philox(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=[int(seed) & (2**64 - 1), int(stream) & (2**64 - 1)]))


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    trials: int
    seed: int
    algorithm: str = RNG_ALGORITHM

    def within(self, expected: float, sigmas: float = 3.0) -> bool:
        if self.stderr == 0:
            return math.isclose(self.value, expected, rel_tol=0, abs_tol=1e-12)
        return abs(self.value - expected) <= sigmas * self.stderr

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "trials": self.trials,
                "seed": self.seed, "algorithm": self.algorithm}


def _blocks(trials: int):
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]


def _run_blocks(fn, trials: int, seed: int):
    blocks = _blocks(trials)
    workers = worker_count()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda b: fn(philox(seed, b[0]), b[1]), blocks))
    return [fn(philox(seed, b), size) for b, size in blocks]


def _check_nkl(n: int, k: int, l: float, open_l: bool = False) -> None:
    if n < 1:
        raise NOutOfRange("n must be >= 1")
    if not 1 <= k <= n:
        raise KOutOfRange(f"need 1 <= k <= n, got k={k}, n={n}")
    if not (0 < l < 1 if open_l else 0 < l <= 1):
        raise LOutOfRange(f"aperture arc out of range: {l}")


def _aperture_counts(rng: np.random.Generator, size: int, n: int, l: float) -> np.ndarray:
    """Sources inside the aperture at the moment of a registration, per trial."""
    pts = rng.random((size, n))
    initiator = rng.integers(0, n, size)
    # Aperture centre uniform within l/2 of the initiator: the centre density
    # given the sources is then proportional to how many sources it covers.
    centre = pts[np.arange(size), initiator] + (rng.random(size) - 0.5) * l
    offset = np.mod(pts - centre[:, None] + 0.5 * l, 1.0)
    inside = offset < l
    inside[np.arange(size), initiator] = True
    return inside.sum(axis=1)


def mc_count_histogram(n: int, l: float, trials: int, seed: int) -> np.ndarray:
    """Counts of trials with exactly ``k`` sources in the aperture, ``k = 0..n``."""
    _check_nkl(n, 1, l)
    parts = _run_blocks(lambda rng, size: np.bincount(_aperture_counts(rng, size, n, l), minlength=n + 1),
                        trials, seed)
    return np.sum(parts, axis=0)


def mc_prob_k(n: int, k: int, l: float, trials: int, seed: int) -> McEstimate:
    """Estimate ``P_n(k, l)`` by simulating the aperture at registration time."""
    _check_nkl(n, k, l)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = int(mc_count_histogram(n, l, trials, seed)[k])
    p = hits / trials
    return McEstimate(p, math.sqrt(p * (1 - p) / trials), trials, seed)


def _region_weights(rng: np.random.Generator, size: int, n: int, k: int, l: float) -> np.ndarray:
    # Reference source at 0, the rest ranked clockwise: x[0] = 0 < x[1] < ... < x[n-1].
    x = np.zeros((size, n + 1))
    x[:, 1:n] = np.sort(rng.random((size, n - 1)), axis=1)
    x[:, n] = 1.0
    xk, xk1, xn = x[:, k - 1], x[:, k], x[:, n - 1]
    gap_before = 1.0 - xn
    if k == n:
        in_region = xk < l
        weight = l - xk
        factor = k / l
    else:
        in_region = (xk1 - xk <= gap_before) & (xk1 + gap_before > l) & (xk < l)
        weight = np.minimum(np.minimum(l - xk, xk1 - xk), xk1 - l + gap_before)
        factor = 2.0 * k / l
    return np.where(in_region, factor * weight, 0.0)


def mc_region_probability(n: int, k: int, l: float, trials: int, seed: int) -> McEstimate:
    """Estimate ``P_n(k, l)`` as an integral over ranked source positions.

    Sorted uniforms sample the ordered simplex with density ``(n-1)!``, which
    cancels the factorial in front of the integral; each draw contributes the
    length of aperture placements that capture exactly the run of ``k``
    sources starting at the reference one.
    """
    if n < 2:
        raise NOutOfRange("the ranked-region estimator needs n >= 2")
    _check_nkl(n, k, l, open_l=True)
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def block(rng, size):
        y = _region_weights(rng, size, n, k, l)
        return y.sum(), np.square(y).sum()

    parts = _run_blocks(block, trials, seed)
    s = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s / trials
    var = max(s2 / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    return McEstimate(mean, math.sqrt(var / trials), trials, seed)


def _project(z: np.ndarray, metric: np.ndarray, widths: np.ndarray, budget: float, caps: np.ndarray) -> np.ndarray:
    """Closest point (in the diagonal ``metric``) with ``sum(w x) = budget``, ``0 <= x <= caps``.

    ``x(s) = clip(z - s w / metric, 0, caps)`` is piecewise linear and
    nonincreasing in ``s``; locate the piece holding the budget exactly.
    """
    slope = widths / metric

    def used(s):
        return np.sum(widths * np.clip(z - s * slope, 0.0, caps), axis=-1)

    knots = np.unique(np.concatenate([(z - caps) / slope, z / slope]))
    vals = used(knots[:, None]) if knots.size else np.array([])
    # vals is nonincreasing along knots
    idx = np.searchsorted(-vals, -budget, side="left")
    if idx == 0:
        s = knots[0]
    elif idx >= len(knots):
        s = knots[-1]
    else:
        s0, s1 = knots[idx - 1], knots[idx]
        v0, v1 = vals[idx - 1], vals[idx]
        s = s0 if v0 == v1 else s0 + (budget - v0) * (s1 - s0) / (v1 - v0)
    return np.clip(z - s * slope, 0.0, caps)


def constrained_minimizer(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    widths,
    budget: float,
    caps,
    hessian_diag: Callable[[np.ndarray], np.ndarray] | None = None,
    x0=None,
    tol: float = 1e-13,
    max_iter: int = 5000,
) -> np.ndarray:
    """Minimize a convex separable load objective over the budget polytope.

    Feasible set: ``sum(widths * x) = budget`` and ``0 <= x <= caps``.
    Iterates scaled projected-gradient steps (projected Newton when a diagonal
    Hessian is supplied) with Armijo backtracking.
    """
    w = np.asarray(widths, dtype=float)
    caps = np.broadcast_to(np.asarray(caps, dtype=float), w.shape).copy()
    if budget < 0 or budget > float(np.sum(w * caps)) * (1 + 1e-12):
        raise EpsilonOutOfRange(f"budget {budget} is infeasible for caps totalling {np.sum(w * caps)}")
    ones = np.ones_like(w)
    x = _project(np.asarray(x0, float) if x0 is not None else np.full_like(w, budget / w.sum()), ones, w, budget, caps)
    fx = objective(x)
    for _ in range(max_iter):
        g = gradient(x)
        h = ones if hessian_diag is None else np.maximum(hessian_diag(x), 1e-12 * max(1.0, float(np.max(hessian_diag(x)))))
        step = 1.0
        while True:
            cand = _project(x - step * g / h, h, w, budget, caps)
            fc = objective(cand)
            decrease = float(np.dot(g, x - cand))
            if np.isfinite(fc) and fc <= fx - 1e-4 * decrease:
                break
            step *= 0.5
            if step < 1e-20:
                cand, fc = x, fx
                break
        moved = float(np.max(np.abs(cand - x)))
        x, fx = cand, fc
        if moved <= tol * max(1.0, float(np.max(np.abs(x)))):
            return x
    raise NotConverged(f"no convergence after {max_iter} iterations")


def periodic_objective(masses, lam: float = 1.0):
    """``(objective, gradient, hessian_diag)`` of the periodic mean time in ``phi``."""
    p = np.asarray(masses, dtype=float)

    def obj(phi):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, p / phi, 0.0)
        return float(np.sum(terms)) / lam if np.all(phi[p > 0] > 0) else math.inf

    def grad(phi):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > 0, -p / np.square(phi), 0.0) / lam

    def hess(phi):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > 0, 2 * p / phi**3, 0.0) / lam

    return obj, grad, hess


def survival_objective(masses, lam: float = 1.0):
    """``(objective, gradient, hessian_diag)`` of the no-registration probability in ``alpha``."""
    p = np.asarray(masses, dtype=float)

    def obj(alpha):
        return float(np.sum(p * np.exp(-lam * alpha)))

    def grad(alpha):
        return -lam * p * np.exp(-lam * alpha)

    def hess(alpha):
        return lam * lam * p * np.exp(-lam * alpha)

    return obj, grad, hess
