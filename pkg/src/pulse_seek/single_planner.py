"""Search strategies for one source observed by one receiver.

Covers the periodic one-step load (square-root allocation with clamping),
the general time-varying one-step load, uniform multistep aperture ladders,
and the recursive three-way split for arbitrary piecewise priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ApertureLadder, CumulativeLoad, LoadProfile, PriorDensity, validate_prior
from .errors import (
    EpsilonOutOfRange,
    GridMismatch,
    NegativeMass,
    NotNormalized,
    RootNotBracketed,
)


def _check_epsilon(epsilon: float, length: float) -> None:
    if not (0 < epsilon < length):
        raise EpsilonOutOfRange(f"need 0 < epsilon < L, got epsilon={epsilon}, L={length}")


def _spread_leftover(load: np.ndarray, widths: np.ndarray, empty: np.ndarray, leftover: float) -> None:
    # Budget left after saturating the support goes to zero-density cells,
    # where it costs nothing.
    if leftover > 0 and np.any(empty):
        load[empty] = leftover / widths[empty].sum()


def periodic_load_profile(prior: PriorDensity, epsilon: float) -> LoadProfile:
    """Optimal constant relative load ``phi`` for a periodic one-step search.

    ``phi`` is proportional to ``sqrt(f)``; cells where that exceeds one are
    pinned at one and the remaining budget is re-spread over the rest until
    nothing overflows.
    """
    prior = validate_prior(prior)
    _check_epsilon(epsilon, prior.length)
    f, w = prior.density, prior.widths
    root = np.sqrt(f)
    phi = np.zeros_like(f)
    clamped = np.zeros(len(f), dtype=bool)
    live = f > 0
    while True:
        free = live & ~clamped
        budget = epsilon - w[clamped].sum()
        norm = float(np.sum(root[free] * w[free]))
        if norm == 0 or budget <= 0:
            break
        phi[free] = budget * root[free] / norm
        over = free & (phi > 1.0)
        if not over.any():
            break
        clamped |= over
        phi[clamped] = 1.0
    phi[clamped] = 1.0
    _spread_leftover(phi, w, ~live, epsilon - float(np.sum(phi * w)))
    return LoadProfile(prior.breakpoints, tuple(phi.tolist()), float(epsilon))


def periodic_mean_time(prior: PriorDensity, profile: LoadProfile, lam: float) -> float:
    """Mean time to the first registration under a constant load profile."""
    prior = validate_prior(prior)
    if len(profile.grid) != len(prior.breakpoints) or not np.allclose(profile.grid, prior.breakpoints, rtol=0, atol=1e-12):
        raise GridMismatch("load profile and prior use different grids")
    f, w, phi = prior.density, prior.widths, np.asarray(profile.phi)
    searched = f > 0
    if np.any(phi[searched] <= 0):
        return math.inf
    return float(np.sum(f[searched] * w[searched] / phi[searched])) / lam


def discrete_beta_weights(masses) -> np.ndarray:
    """Dwell fractions ``sqrt(P_j) / sum sqrt(P)`` for a cyclic cell visit."""
    p = np.asarray(masses, dtype=float)
    if np.any(p < 0):
        raise NegativeMass("masses must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise NotNormalized(f"masses sum to {p.sum()}, expected 1")
    root = np.sqrt(p)
    return root / root.sum()


def _alpha_for(log_mu: float, log_f: np.ndarray, lam: float, t: float) -> np.ndarray:
    return np.clip((log_f + math.log(lam) - log_mu) / lam, 0.0, t)


def general_onestep_alpha(
    prior: PriorDensity, epsilon: float, lam: float, t: float, tol: float = 1e-10
) -> CumulativeLoad:
    """Optimal cumulative in-window time ``alpha(x, t)`` at elapsed time ``t``.

    ``alpha = clip(ln(lam f / mu) / lam, 0, t)`` with the multiplier ``mu``
    found by bisection on ``log mu`` so the budget ``epsilon * t`` is used
    exactly.
    """
    prior = validate_prior(prior)
    _check_epsilon(epsilon, prior.length)
    if t < 0:
        raise ValueError("t must be >= 0")
    f, w = prior.density, prior.widths
    alpha = np.zeros_like(f)
    if t == 0:
        return CumulativeLoad(prior.breakpoints, 0.0, tuple(alpha.tolist()), float(epsilon))

    live = f > 0
    budget = epsilon * t
    if w[live].sum() <= epsilon:
        alpha[live] = t
        _spread_leftover(alpha, w, ~live, budget - t * w[live].sum())
        return CumulativeLoad(prior.breakpoints, float(t), tuple(alpha.tolist()), float(epsilon))

    with np.errstate(divide="ignore"):
        log_f = np.log(f)

    def residual(log_mu):
        return float(np.sum(_alpha_for(log_mu, log_f, lam, t) * w)) - budget

    # At mu = lam*max(f) nothing is loaded; at mu = lam*min(f)*exp(-lam t)
    # every supported cell is full.
    hi = math.log(lam) + float(log_f[live].max())
    lo = math.log(lam) + float(log_f[live].min()) - lam * t
    r_lo, r_hi = residual(lo), residual(hi)
    if not (r_lo >= 0 >= r_hi):
        raise RootNotBracketed(f"budget residual {r_lo}, {r_hi} does not change sign")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) <= tol * max(1.0, budget) or hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            lo = hi = mid
            break
        if r > 0:
            lo = mid
        else:
            hi = mid
    alpha = _alpha_for(0.5 * (lo + hi), log_f, lam, t)
    return CumulativeLoad(prior.breakpoints, float(t), tuple(alpha.tolist()), float(epsilon))


def onestep_survival(prior: PriorDensity, load: CumulativeLoad, lam: float) -> float:
    """Probability that no pulse has been registered by time ``load.t``."""
    prior = validate_prior(prior)
    return float(np.sum(prior.masses * np.exp(-lam * np.asarray(load.alpha))))


def ladder_mean_time(ladder: ApertureLadder, lam: float) -> float:
    """Mean time of a single-source scan down the ladder: sum of width ratios."""
    return float(np.sum(ladder.ratios)) / lam


def geometric_ladder(length: float, epsilon: float, steps: int) -> ApertureLadder:
    ratio = epsilon / length
    widths = [length * ratio ** (i / steps) for i in range(steps + 1)]
    widths[0], widths[-1] = float(length), float(epsilon)
    return ApertureLadder(tuple(widths))


def uniform_multistep_ladder(L: float, epsilon: float, lam: float = 1.0) -> tuple[ApertureLadder, float]:
    """Best constant-ratio ladder for a uniform prior and its mean time.

    The step count is whichever of ``floor(ln(L/eps))`` and the next integer
    gives the smaller ``(n / lam) (L/eps)^(1/n)``; ties go to fewer steps.
    """
    _check_epsilon(epsilon, L)
    a = L / epsilon
    base = math.floor(math.log(a))
    candidates = [n for n in (base, base + 1) if n >= 1]
    best = min(candidates, key=lambda n: (n * a ** (1.0 / n), n))
    return geometric_ladder(L, epsilon, best), best * a ** (1.0 / best) / lam


@dataclass(frozen=True)
class StrategyComparison:
    optimal: float
    dichotomy: float
    trichotomy: float
    one_step: float

    @property
    def dichotomy_loss(self) -> float:
        return self.dichotomy / self.optimal - 1.0

    @property
    def trichotomy_loss(self) -> float:
        return self.trichotomy / self.optimal - 1.0

    @property
    def one_step_loss(self) -> float:
        return self.one_step / self.optimal - 1.0

    def to_dict(self) -> dict:
        return {
            "optimal": self.optimal,
            "dichotomy": self.dichotomy,
            "trichotomy": self.trichotomy,
            "one_step": self.one_step,
            "dichotomy_loss": self.dichotomy_loss,
            "trichotomy_loss": self.trichotomy_loss,
            "one_step_loss": self.one_step_loss,
        }


def compare_strategies(L: float, epsilon: float, lam: float = 1.0) -> StrategyComparison:
    """Asymptotic optimum versus halving, thirding and a single full scan.

    All three multistep figures use the continuous stage count ``log_b(L/eps)``.
    """
    _check_epsilon(epsilon, L)
    ln_a = math.log(L / epsilon)
    return StrategyComparison(
        optimal=math.e * ln_a / lam,
        dichotomy=2.0 * ln_a / (lam * math.log(2.0)),
        trichotomy=3.0 * ln_a / (lam * math.log(3.0)),
        one_step=L / (lam * epsilon),
    )


def split_depth(L: float, epsilon: float, base: int = 3) -> int:
    """Smallest ``d`` with ``L / base**d <= epsilon``."""
    depth, width = 0, float(L)
    while width > epsilon * (1 + 1e-12):
        width /= base
        depth += 1
    return depth


@dataclass(frozen=True)
class TrichotomyNode:
    path: tuple[int, ...]
    start: float
    width: float
    masses: tuple[float, float, float]
    betas: tuple[float, float, float]

    def child(self, i: int) -> tuple[float, float]:
        """``(start, width)`` of sub-segment ``i`` (0-based)."""
        w = self.width / 3.0
        return self.start + i * w, w

    def to_dict(self) -> dict:
        return {"path": list(self.path), "start": self.start, "width": self.width,
                "masses": list(self.masses), "betas": list(self.betas)}


@dataclass(frozen=True)
class TrichotomyPlan:
    """Recursive three-way split of ``(0, L)`` down to width ``epsilon``.

    Nodes are computed on demand: the tree has ``3**depth`` leaves, but a
    search only ever walks one root-to-leaf path.
    """

    prior: PriorDensity
    L: float
    epsilon: float
    depth: int

    @property
    def root(self) -> TrichotomyNode | None:
        return self.node(()) if self.depth > 0 else None

    def node(self, path=()) -> TrichotomyNode:
        path = tuple(path)
        if len(path) >= self.depth:
            raise IndexError(f"plan has {self.depth} levels")
        start, width = 0.0, float(self.L)
        for i in path:
            width /= 3.0
            start += i * width
        third = width / 3.0
        masses = tuple(self.prior.mass_between(start + i * third, start + (i + 1) * third) for i in range(3))
        total = sum(masses)
        if total > 0:
            betas = tuple(float(b) for b in discrete_beta_weights(np.asarray(masses) / total))
        else:
            betas = (1 / 3, 1 / 3, 1 / 3)
        return TrichotomyNode(path, start, width, masses, betas)

    def levels_along(self, x: float) -> list[TrichotomyNode]:
        """The nodes visited when the source sits at ``x``."""
        nodes, path = [], []
        for _ in range(self.depth):
            node = self.node(path)
            nodes.append(node)
            path.append(min(int((x - node.start) / (node.width / 3.0)), 2))
        return nodes

    @property
    def final_width(self) -> float:
        return self.L / 3**self.depth

    def to_dict(self) -> dict:
        root = self.root
        return {
            "kind": "trichotomy",
            "prior": self.prior.to_dict(),
            "L": self.L,
            "epsilon": self.epsilon,
            "depth": self.depth,
            "root": root.to_dict() if root else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TrichotomyPlan:
        return trichotomy_plan(PriorDensity.from_dict(d["prior"]), float(d["L"]), float(d["epsilon"]))


def trichotomy_plan(prior: PriorDensity, L: float, epsilon: float) -> TrichotomyPlan:
    prior = validate_prior(prior)
    if not math.isclose(prior.length, L, rel_tol=1e-12):
        raise GridMismatch("prior support must match L")
    if not epsilon > 0:
        raise EpsilonOutOfRange("epsilon must be positive")
    if epsilon >= L:
        return TrichotomyPlan(prior, float(L), float(epsilon), 0)
    return TrichotomyPlan(prior, float(L), float(epsilon), split_depth(L, epsilon))
