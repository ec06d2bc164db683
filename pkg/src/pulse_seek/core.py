"""Domain types shared by the planners, the oracle and the simulator.

Every type is a frozen dataclass holding tuples (or read-only arrays), so
instances can be passed between workers freely.  Each type round-trips
through a plain ``dict`` (``to_dict`` / ``from_dict``) which is the JSON
plan-file format used by the simulator and the CLI.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import (
    GridMismatch,
    LadderInvalid,
    NegativeDensity,
    NonPositiveLambda,
    NonPositiveLength,
    NOutOfRange,
    UnorderedBreakpoints,
    ZeroResponse,
)

UNIFORM = "uniform"
PIECEWISE = "piecewise_constant"

# Tolerances for the linear constraints on load profiles.
BUDGET_TOL = 1e-9
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class PriorDensity:
    """Piecewise-constant density over ``(0, L)``.

    ``breakpoints`` holds every cell boundary, ``0`` and ``L`` included, so
    ``len(values) == len(breakpoints) - 1``.  Use :meth:`uniform` or
    :meth:`piecewise` to get a checked, normalized instance.
    """

    kind: str
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    @classmethod
    def uniform(cls, length: float = 1.0) -> PriorDensity:
        return validate_prior(cls(UNIFORM, (0.0, float(length)), (1.0,)))

    @classmethod
    def piecewise(cls, breakpoints, values) -> PriorDensity:
        bps = tuple(float(b) for b in breakpoints)
        vals = tuple(float(v) for v in values)
        return validate_prior(cls(PIECEWISE, bps, vals))

    @classmethod
    def on_equal_cells(cls, values, length: float = 1.0) -> PriorDensity:
        """Density levels on ``len(values)`` equal-width cells of ``(0, L)``."""
        bps = np.linspace(0.0, length, len(values) + 1)
        bps[-1] = length
        return cls.piecewise(bps, values)

    @property
    def length(self) -> float:
        return self.breakpoints[-1]

    @property
    def edges(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    @property
    def density(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def masses(self) -> np.ndarray:
        return self.density * self.widths

    def mass_between(self, a: float, b: float) -> float:
        """Probability mass of ``(a, b)``, clipped to the support."""
        edges = self.edges
        lo = np.clip(a, edges[:-1], edges[1:])
        hi = np.clip(b, edges[:-1], edges[1:])
        return float(np.sum(self.density * np.maximum(hi - lo, 0.0)))

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw positions by inverse-CDF over the cells."""
        masses = self.masses
        cdf = np.concatenate([[0.0], np.cumsum(masses)])
        cdf /= cdf[-1]
        u = rng.random(size)
        cell = np.searchsorted(cdf, u, side="right") - 1
        cell = np.clip(cell, 0, len(masses) - 1)
        # Zero-mass cells have zero cdf width and can't be selected except by
        # exact ties, which searchsorted(side="right") already skips.
        frac = (u - cdf[cell]) / np.where(masses[cell] > 0, cdf[cell + 1] - cdf[cell], 1.0)
        x = self.edges[cell] + np.clip(frac, 0.0, 1.0) * self.widths[cell]
        return float(x) if size is None else x

    def to_dict(self) -> dict:
        return {"kind": self.kind, "breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> PriorDensity:
        kind = d.get("kind", PIECEWISE)
        if kind == UNIFORM and "breakpoints" not in d:
            return cls.uniform(d.get("length", 1.0))
        return validate_prior(cls(kind, tuple(d["breakpoints"]), tuple(d["values"])))


def validate_prior(prior: PriorDensity) -> PriorDensity:
    """Check ordering and signs; return a copy that integrates to one."""
    bps = np.asarray(prior.breakpoints, dtype=float)
    vals = np.asarray(prior.values, dtype=float)
    if prior.kind not in (UNIFORM, PIECEWISE):
        raise GridMismatch(f"unknown prior kind {prior.kind!r}")
    if bps.ndim != 1 or len(bps) < 2 or len(vals) != len(bps) - 1:
        raise GridMismatch("need len(values) == len(breakpoints) - 1 >= 1")
    if bps[0] != 0.0 or np.any(np.diff(bps) <= 0):
        raise UnorderedBreakpoints("breakpoints must start at 0 and strictly increase")
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        raise NegativeDensity("density levels must be finite and nonnegative")
    if prior.kind == UNIFORM and len(vals) != 1:
        raise GridMismatch("a uniform prior has a single cell")
    total = float(np.sum(vals * np.diff(bps)))
    if total <= 0:
        raise NegativeDensity("density has no mass")
    return PriorDensity(prior.kind, tuple(bps.tolist()), tuple((vals / total).tolist()))


@dataclass(frozen=True)
class SourceModel:
    """A Poisson pulsed source: intensity ``lam`` and a prior over ``(0, L)``."""

    lam: float
    prior: PriorDensity
    interval_length: float

    @classmethod
    def uniform(cls, lam: float = 1.0, length: float = 1.0) -> SourceModel:
        return validate(cls(lam, PriorDensity(UNIFORM, (0.0, float(length)), (1.0,)), length))

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "prior": self.prior.to_dict(), "interval_length": self.interval_length}

    @classmethod
    def from_dict(cls, d: dict) -> SourceModel:
        length = float(d.get("interval_length", 1.0))
        prior_d = d.get("prior") or {"kind": UNIFORM, "breakpoints": [0.0, length], "values": [1.0]}
        prior = PriorDensity(prior_d.get("kind", PIECEWISE), tuple(prior_d["breakpoints"]), tuple(prior_d["values"]))
        return validate(cls(float(d["lambda"]), prior, length))


def validate(model: SourceModel) -> SourceModel:
    """Reject invalid fields and renormalize the prior."""
    if not (model.lam > 0 and math.isfinite(model.lam)):
        raise NonPositiveLambda(f"lambda must be > 0, got {model.lam}")
    if not (model.interval_length > 0 and math.isfinite(model.interval_length)):
        raise NonPositiveLength(f"interval length must be > 0, got {model.interval_length}")
    prior = validate_prior(model.prior)
    if not math.isclose(prior.length, model.interval_length, rel_tol=1e-12):
        raise GridMismatch("prior support must end at the interval length")
    return replace(model, lam=float(model.lam), interval_length=float(model.interval_length), prior=prior)


@dataclass(frozen=True)
class LoadProfile:
    """Relative load per cell of a periodic one-step search."""

    grid: tuple[float, ...]
    phi: tuple[float, ...]
    epsilon: float

    def __post_init__(self):
        phi = np.asarray(self.phi)
        if len(self.grid) != len(phi) + 1:
            raise GridMismatch("grid must have one more boundary than phi")
        if np.any(phi < -1e-15) or np.any(phi > 1 + 1e-12):
            raise ValueError("relative load must lie in [0, 1]")
        used = float(np.sum(phi * np.diff(self.grid)))
        if abs(used - self.epsilon) > BUDGET_TOL:
            raise ValueError(f"load integrates to {used}, expected {self.epsilon}")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.asarray(self.grid))

    def to_dict(self) -> dict:
        return {"grid": list(self.grid), "phi": list(self.phi), "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict) -> LoadProfile:
        return cls(tuple(d["grid"]), tuple(d["phi"]), float(d["epsilon"]))


@dataclass(frozen=True)
class CumulativeLoad:
    """Accumulated in-window time per cell at elapsed time ``t``."""

    grid: tuple[float, ...]
    t: float
    alpha: tuple[float, ...]
    epsilon: float

    def __post_init__(self):
        alpha = np.asarray(self.alpha)
        if len(self.grid) != len(alpha) + 1:
            raise GridMismatch("grid must have one more boundary than alpha")
        scale = max(self.t, 1.0)
        if np.any(alpha < -1e-12 * scale) or np.any(alpha > self.t + 1e-12 * scale):
            raise ValueError("cumulative load must lie in [0, t]")
        used = float(np.sum(alpha * np.diff(self.grid)))
        if abs(used - self.epsilon * self.t) > BUDGET_TOL * scale:
            raise ValueError(f"cumulative load integrates to {used}, expected {self.epsilon * self.t}")

    def to_dict(self) -> dict:
        return {"grid": list(self.grid), "t": self.t, "alpha": list(self.alpha), "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict) -> CumulativeLoad:
        return cls(tuple(d["grid"]), float(d["t"]), tuple(d["alpha"]), float(d["epsilon"]))


@dataclass(frozen=True)
class ApertureLadder:
    """Aperture widths ``l_0 > l_1 > ... > l_m``; ``l_0`` is the full search length."""

    widths: tuple[float, ...]

    def __post_init__(self):
        w = self.widths
        if len(w) < 2:
            raise LadderInvalid("a ladder needs at least l_0 and l_m")
        if any(not (x > 0 and math.isfinite(x)) for x in w):
            raise LadderInvalid("aperture widths must be positive")
        if any(b >= a for a, b in zip(w, w[1:])):
            raise LadderInvalid(f"aperture widths must strictly decrease: {w}")

    @property
    def m(self) -> int:
        return len(self.widths) - 1

    @property
    def length(self) -> float:
        return self.widths[0]

    @property
    def epsilon(self) -> float:
        return self.widths[-1]

    @property
    def ratios(self) -> np.ndarray:
        w = np.asarray(self.widths)
        return w[:-1] / w[1:]

    def to_dict(self) -> dict:
        return {"widths": list(self.widths), "m": self.m}

    @classmethod
    def from_dict(cls, d: dict) -> ApertureLadder:
        return cls(tuple(float(x) for x in d["widths"]))


@dataclass(frozen=True, eq=False)
class ReceiverCodebook:
    """Binary assignment of segments to receiver viewing zones.

    ``matrix[i, j-1]`` is 1 when segment ``j`` lies in the zone of receiver
    ``i + 1``.  The array is read-only.
    """

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.uint8)
        if mat.ndim != 2 or mat.shape[0] != self.n:
            raise GridMismatch("codebook matrix must have one row per receiver")
        if mat.shape[1] > 2**self.n - 1:
            raise NOutOfRange(f"{mat.shape[1]} segments exceed 2^n - 1 = {2**self.n - 1}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def n_segments(self) -> int:
        return self.matrix.shape[1]

    def column(self, j: int) -> tuple[int, ...]:
        """Response pattern of segment ``j`` (1-based)."""
        return tuple(self.matrix[:, j - 1].tolist())

    def zone(self, i: int) -> tuple[int, ...]:
        """Segments (1-based) watched by receiver ``i`` (1-based)."""
        return tuple(int(j) + 1 for j in np.flatnonzero(self.matrix[i - 1]))

    def to_dict(self) -> dict:
        return {"n": self.n, "n_segments": self.n_segments, "matrix": self.matrix.T.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> ReceiverCodebook:
        cols = np.asarray(d["matrix"], dtype=np.uint8).reshape(-1, int(d["n"]))
        return cls(int(d["n"]), cols.T)


@dataclass(frozen=True)
class ReceiverResponse:
    """Which receivers fired on a registered pulse (``r_1 .. r_n``)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        seen = set(self.bits)
        if not seen <= {0, 1}:
            raise ValueError("response bits must be 0 or 1")
        if 1 not in seen:
            raise ZeroResponse("a registered pulse fires at least one receiver")

    def to_dict(self) -> dict:
        return {"bits": list(self.bits)}

    @classmethod
    def from_dict(cls, d: dict) -> ReceiverResponse:
        return cls(tuple(int(b) for b in d["bits"]))


@dataclass(frozen=True)
class StagePlan:
    """Multi-receiver schedule: ``M`` stages with aggregate windows ``W_1..W_M``.

    ``achieved_accuracy`` is ``W_M / (2^n - 1)``; in the saturated regimes it
    can be finer than the requested ``epsilon``.
    """

    n: int
    M: int
    windows: tuple[float, ...]
    epsilon: float
    mean_time: float
    L: float = 1.0
    lam: float = 1.0
    achieved_accuracy: float = field(default=float("nan"))

    def __post_init__(self):
        if len(self.windows) != self.M or self.M < 1:
            raise LadderInvalid("need exactly M windows")
        if any(b >= a for a, b in zip(self.windows, self.windows[1:])):
            raise LadderInvalid("stage windows must strictly decrease")
        if self.windows[0] > self.L * (1 + 1e-12):
            raise LadderInvalid("first window exceeds the search interval")
        if math.isnan(self.achieved_accuracy):
            object.__setattr__(self, "achieved_accuracy", self.windows[-1] / (2**self.n - 1))

    @property
    def segments_per_window(self) -> int:
        return 2**self.n - 1

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "M": self.M,
            "windows": list(self.windows),
            "epsilon": self.epsilon,
            "mean_time": self.mean_time,
            "L": self.L,
            "lambda": self.lam,
            "achieved_accuracy": self.achieved_accuracy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> StagePlan:
        return cls(
            int(d["n"]),
            int(d["M"]),
            tuple(float(w) for w in d["windows"]),
            float(d["epsilon"]),
            float(d["mean_time"]),
            float(d.get("L", 1.0)),
            float(d.get("lambda", 1.0)),
            float(d.get("achieved_accuracy", float("nan"))),
        )


@dataclass(frozen=True)
class TrialStats:
    trials: int
    mean: float
    stderr: float
    ci95: float

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @classmethod
    def from_samples(cls, samples) -> TrialStats:
        x = np.asarray(samples, dtype=float)
        sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        stderr = sd / math.sqrt(len(x))
        return cls(len(x), float(np.mean(x)), stderr, Z95 * stderr)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "mean": self.mean, "stderr": self.stderr, "ci95": self.ci95}

    @classmethod
    def from_dict(cls, d: dict) -> TrialStats:
        return cls(int(d["trials"]), float(d["mean"]), float(d["stderr"]), float(d["ci95"]))


Z95 = 1.959963984540054


def dumps(obj: Any, **kw) -> str:
    """Serialize any domain object (or a dict of them) to JSON."""
    return json.dumps(_plain(obj), **kw)


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj
