"""Discrete-event execution of search plans against random Poisson sources.

Two window models are available:

``thinning``
    The window offset is redrawn uniformly for every pulse, so each pulse is
    registered independently with probability ``window / segment``.  This is
    exactly the regime the closed-form mean times describe.
``literal``
    The window sweeps the segment at constant speed, advancing one window
    width every ``dwell`` time units.  It converges to ``thinning`` as
    ``lam * dwell -> 0``; slower sweeps are strictly slower to register.

Every trial draws from its own Philox stream keyed by ``(seed, trial_index)``,
so results do not depend on scheduling.
"""

from __future__ import annotations

import bisect
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Union

import numpy as np

from ._workers import worker_count
from .core import ApertureLadder, SourceModel, StagePlan, TrialStats
from .errors import DecodeError, LadderInvalid, PlanExhausted, ZeroResponse
from .multi_receiver import build_codebook, decode_segment, response_for
from .oracle import philox
from .single_planner import TrichotomyPlan

THINNING = "thinning"
LITERAL = "literal"
MODES = (THINNING, LITERAL)

Plan = Union[ApertureLadder, TrichotomyPlan, StagePlan]


class Event(NamedTuple):
    time: float
    position: float
    registered: bool
    stage: int
    window_start: float
    window_width: float


@dataclass(frozen=True)
class TrialTrace:
    events: tuple[Event, ...]
    final_interval: tuple[tuple[float, float], ...]
    elapsed: float
    sources: tuple[float, ...]
    target: int
    pulses_per_stage: tuple[int, ...]

    @property
    def final_width(self) -> float:
        return math.fsum(p[1] for p in self.final_interval)

    def contains_target(self, L: float, tol: float = 1e-9) -> bool:
        x = self.sources[self.target]
        return any((x - start) % L < length + tol or (start - x) % L < tol for start, length in self.final_interval)


@dataclass(frozen=True)
class Scenario:
    model: SourceModel
    plan: Plan
    n_sources: int = 1
    trials: int = 1000
    seed: int = 0
    mode: str = THINNING
    dwell: float = 1e-3
    epsilon: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n_sources < 1:
            raise ValueError("n_sources must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.dwell > 0:
            raise ValueError("dwell must be positive")
        if self.epsilon is not None and _plan_accuracy(self.plan) > self.epsilon * (1 + 1e-12):
            raise PlanExhausted(f"plan stops at {_plan_accuracy(self.plan)}, above epsilon={self.epsilon}")
        if self.n_sources > 1 and not isinstance(self.plan, ApertureLadder):
            raise ValueError("several sources are only simulated under ladder plans")
        if _plan_accuracy(self.plan) > self.model.interval_length * (1 + 1e-12):
            raise LadderInvalid("plan accuracy exceeds the interval length")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "plan": plan_to_dict(self.plan),
            "n_sources": self.n_sources,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "dwell": self.dwell,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        return cls(
            model=SourceModel.from_dict(d["model"]),
            plan=plan_from_dict(d["plan"]),
            n_sources=int(d.get("n_sources", 1)),
            trials=int(d.get("trials", 1000)),
            seed=int(d.get("seed", 0)),
            mode=d.get("mode", THINNING),
            dwell=float(d.get("dwell", 1e-3)),
            epsilon=d.get("epsilon"),
        )


def plan_to_dict(plan: Plan) -> dict:
    if isinstance(plan, ApertureLadder):
        return {"kind": "ladder", **plan.to_dict()}
    if isinstance(plan, StagePlan):
        return {"kind": "stage_plan", **plan.to_dict()}
    return plan.to_dict()


def plan_from_dict(d: dict) -> Plan:
    kind = d.get("kind")
    if kind == "ladder":
        return ApertureLadder.from_dict(d)
    if kind == "stage_plan":
        return StagePlan.from_dict(d)
    if kind == "trichotomy":
        return TrichotomyPlan.from_dict(d)
    raise ValueError(f"unknown plan kind {kind!r}")


def _plan_accuracy(plan: Plan) -> float:
    if isinstance(plan, ApertureLadder):
        return plan.epsilon
    if isinstance(plan, StagePlan):
        return plan.achieved_accuracy
    return plan.final_width


class _Stream:
    """Buffered uniforms from one Philox generator."""

    __slots__ = ("_rng", "_buf", "_pos")

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._buf = rng.random(64).tolist()
        self._pos = 0

    def uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._rng.random(256).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def exponential(self, rate: float) -> float:
        return -math.log1p(-self.uniform()) / rate


class _PriorSampler:
    """Scalar inverse-CDF sampling over the prior's cells."""

    def __init__(self, prior):
        masses = prior.masses
        self.cdf = (np.cumsum(masses) / masses.sum()).tolist()
        self.cdf[-1] = 1.0
        self.lo = [0.0] + self.cdf[:-1]
        self.edges = prior.edges.tolist()

    def __call__(self, stream: _Stream) -> float:
        u = stream.uniform()
        i = min(bisect.bisect_right(self.cdf, u), len(self.cdf) - 1)
        width = self.cdf[i] - self.lo[i]
        frac = (u - self.lo[i]) / width if width > 0 else 0.0
        a, b = self.edges[i], self.edges[i + 1]
        return a + min(max(frac, 0.0), 1.0) * (b - a)


@lru_cache(maxsize=64)
def _sampler(prior) -> _PriorSampler:
    return _PriorSampler(prior)


_codebook = lru_cache(maxsize=17)(build_codebook)


class _Segment:
    """A stretch of the search circle viewed as its own circle.

    ``pieces`` are ``(global_start, length)`` arcs in local order; a sub-window
    that wraps past the local end splits into more pieces.
    """

    __slots__ = ("pieces", "length", "L")

    def __init__(self, pieces, L: float):
        self.pieces = tuple(pieces)
        self.length = math.fsum(p[1] for p in self.pieces)
        self.L = L

    def to_global(self, u: float) -> float:
        for start, length in self.pieces:
            if u < length:
                return (start + u) % self.L
            u -= length
        start, length = self.pieces[-1]
        return (start + length) % self.L

    def _slice(self, u0: float, u1: float):
        out, offset = [], 0.0
        for start, length in self.pieces:
            lo, hi = max(u0, offset), min(u1, offset + length)
            if hi > lo:
                out.append(((start + lo - offset) % self.L, hi - lo))
            offset += length
        return out

    def sub(self, a: float, w: float) -> _Segment:
        S = self.length
        a %= S
        if a + w <= S:
            pieces = self._slice(a, a + w)
        else:
            pieces = self._slice(a, S) + self._slice(0.0, a + w - S)
        return _Segment(pieces, self.L)


class _Window:
    """Window placement for one stage, in local coordinates of the segment."""

    def __init__(self, scenario: Scenario, stream: _Stream, S: float, w: float, t0: float):
        self.literal = scenario.mode == LITERAL
        self.stream, self.S, self.w, self.t0 = stream, S, w, t0
        self.speed = w / scenario.dwell

    def offset(self, t: float) -> float:
        if self.literal:
            return (self.speed * (t - self.t0)) % self.S
        return self.stream.uniform() * self.S


def _check_ladder(ladder: ApertureLadder, model: SourceModel) -> None:
    if not math.isclose(ladder.length, model.interval_length, rel_tol=1e-12):
        raise LadderInvalid("ladder must start at the interval length")


def _run_ladder(sc: Scenario, stream: _Stream, record: bool) -> TrialTrace:
    ladder, model = sc.plan, sc.model
    _check_ladder(ladder, model)
    L, lam = model.interval_length, model.lam
    draw = _sampler(model.prior)
    sources = [draw(stream) for _ in range(sc.n_sources)]
    seg = _Segment([(0.0, L)], L)
    local = {i: x for i, x in enumerate(sources)}
    events, per_stage = [], []
    t, target = 0.0, 0
    for stage, w in enumerate(ladder.widths[1:], start=1):
        S = seg.length
        window = _Window(sc, stream, S, w, t)
        ids = list(local)
        pulses = 0
        while True:
            t += stream.exponential(lam * len(ids))
            emitter = ids[min(int(stream.uniform() * len(ids)), len(ids) - 1)]
            a = window.offset(t)
            hit = (local[emitter] - a) % S < w
            pulses += 1
            if record:
                events.append(Event(t, sources[emitter], hit, stage, seg.to_global(a), w))
            if hit:
                break
        per_stage.append(pulses)
        target = emitter
        moved = {i: (u - a) % S for i, u in local.items()}
        local = {i: v for i, v in moved.items() if v < w}
        local[emitter] = moved[emitter]
        seg = seg.sub(a, w)
    return TrialTrace(tuple(events), seg.pieces, t, tuple(sources), target, tuple(per_stage))


def _run_trichotomy(sc: Scenario, stream: _Stream, record: bool) -> TrialTrace:
    plan, model = sc.plan, sc.model
    x = _sampler(model.prior)(stream)
    events, per_stage, path = [], [], []
    t = 0.0
    start, width = 0.0, plan.L
    for level in range(plan.depth):
        node = plan.node(path)
        third = node.width / 3.0
        where = min(int((x - node.start) / third), 2)
        cum = np.cumsum(node.betas)
        t0, period = t, 3.0 * sc.dwell
        pulses = 0
        while True:
            t += stream.exponential(model.lam)
            if sc.mode == LITERAL:
                phase = ((t - t0) / period) % 1.0
            else:
                phase = stream.uniform()
            look = min(int(np.searchsorted(cum, phase, side="right")), 2)
            hit = look == where
            pulses += 1
            if record:
                events.append(Event(t, x, hit, level + 1, node.start + look * third, third))
            if hit:
                break
        per_stage.append(pulses)
        path.append(where)
        start, width = node.start + where * third, third
    return TrialTrace(tuple(events), ((start, width),), t, (x,), 0, tuple(per_stage))


def run_multireceiver_trial(sc: Scenario, trial_index: int = 0, record: bool = True) -> TrialTrace:
    """One search by ``n`` receivers following a :class:`StagePlan`."""
    stream = _Stream(philox(sc.seed, trial_index))
    return _run_stage_plan(sc, stream, record)


def _run_stage_plan(sc: Scenario, stream: _Stream, record: bool) -> TrialTrace:
    plan, model = sc.plan, sc.model
    L, lam = model.interval_length, model.lam
    codebook = _codebook(plan.n)
    N = plan.segments_per_window
    x = _sampler(model.prior)(stream)
    seg, u = _Segment([(0.0, L)], L), x
    events, per_stage = [], []
    t = 0.0
    for stage, W in enumerate(plan.windows, start=1):
        S = seg.length
        window = _Window(sc, stream, S, W, t)
        pulses = 0
        while True:
            t += stream.exponential(lam)
            a = window.offset(t)
            v = (u - a) % S
            hit = v < W
            pulses += 1
            if record:
                events.append(Event(t, x, hit, stage, seg.to_global(a), W))
            if hit:
                break
        per_stage.append(pulses)
        piece = W / N
        true_segment = min(int(v / piece), N - 1) + 1
        try:
            j = decode_segment(codebook, response_for(codebook, true_segment))
        except ZeroResponse as exc:
            raise DecodeError("registration produced an all-zero response") from exc
        if j != true_segment:
            raise DecodeError(f"decoded segment {j}, source is in {true_segment}")
        seg = seg.sub(a + (j - 1) * piece, piece)
        u = v - (j - 1) * piece
    return TrialTrace(tuple(events), seg.pieces, t, (x,), 0, tuple(per_stage))


def run_trial(scenario: Scenario, trial_index: int, record: bool = True) -> TrialTrace:
    """Simulate one search from the first pulse to the final narrowing."""
    stream = _Stream(philox(scenario.seed, trial_index))
    plan = scenario.plan
    if isinstance(plan, ApertureLadder):
        return _run_ladder(scenario, stream, record)
    if isinstance(plan, StagePlan):
        return _run_stage_plan(scenario, stream, record)
    if isinstance(plan, TrichotomyPlan):
        return _run_trichotomy(scenario, stream, record)
    raise TypeError(f"unsupported plan type {type(plan).__name__}")


def _elapsed_chunk(args) -> list[float]:
    scenario, lo, hi = args
    return [run_trial(scenario, i, record=False).elapsed for i in range(lo, hi)]


def elapsed_times(scenario: Scenario) -> np.ndarray:
    """Elapsed time of every trial, in trial-index order."""
    n = scenario.trials
    workers = worker_count()
    if workers <= 1 or n < 2000:
        return np.array(_elapsed_chunk((scenario, 0, n)))
    step = math.ceil(n / (4 * workers))
    chunks = [(scenario, lo, min(lo + step, n)) for lo in range(0, n, step)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_elapsed_chunk, chunks))
    return np.concatenate([np.asarray(p) for p in parts])


def run_trials(scenario: Scenario) -> TrialStats:
    return TrialStats.from_samples(elapsed_times(scenario))


def write_traces(scenario: Scenario, path, limit: int | None = None) -> None:
    """Per-pulse CSV of the first ``limit`` trials (all by default)."""
    count = scenario.trials if limit is None else min(limit, scenario.trials)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(["trial", *Event._fields])
        for i in range(count):
            for ev in run_trial(scenario, i).events:
                out.writerow([i, *ev])
