"""Search with ``n`` receivers whose joint response identifies a segment.

The canonical codebook lists every nonzero ``n``-bit column in increasing
order, so a response vector read as a binary number *is* the segment index.
Stage plans trade window size against stage count; each stage narrows the
search by ``2^n - 1`` segments of the aggregate window.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ReceiverCodebook, ReceiverResponse, StagePlan
from .errors import EpsilonOutOfRange, GridMismatch, NOutOfRange, RegimeViolation

MAX_RECEIVERS = 16
REL_TOL = 1e-12


def _segments(n: int) -> int:
    return 2**n - 1


def build_codebook(n: int) -> ReceiverCodebook:
    """Columns ``j = 1 .. 2^n - 1`` hold the binary digits of ``j``, MSB first."""
    if not 1 <= n <= MAX_RECEIVERS:
        raise NOutOfRange(f"need 1 <= n <= {MAX_RECEIVERS}, got {n}")
    j = np.arange(1, 2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)[:, None]
    return ReceiverCodebook(n, ((j[None, :] >> shifts) & 1).astype(np.uint8))


def decode_segment(codebook: ReceiverCodebook, response: ReceiverResponse) -> int:
    """Segment number ``sum r_i 2^(n-i)`` for the canonical codebook."""
    if len(response.bits) != codebook.n:
        raise GridMismatch(f"expected {codebook.n} response bits, got {len(response.bits)}")
    return int("".join(map(str, response.bits)), 2)


def response_for(codebook: ReceiverCodebook, segment: int) -> ReceiverResponse:
    """Receivers that fire when the source sits in ``segment`` (1-based)."""
    return ReceiverResponse(codebook.column(segment))


def single_tact_accuracy(n: int, L: float = 1.0) -> float:
    """Finest accuracy reachable when the search ends at the very first pulse."""
    if n < 1:
        raise NOutOfRange("need at least one receiver")
    return L / _segments(n)


def regime_boundaries(n: int, M: int) -> tuple[float, float]:
    """``(lower, upper)`` range of ``eps/L`` on which ``M`` stages are optimal.

    Below ``saturation_point(n, M)`` the plan uses the stretched windows of the
    interior regime; above it, full-coverage windows.  The lower end is where
    ``M`` stages and the fastest ``M + 1`` stages tie.
    """
    if n < 2:
        raise NOutOfRange("regime boundaries need n >= 2; use single_receiver_boundaries for n = 1")
    if M < 1:
        raise ValueError("M must be >= 1")
    N = _segments(n)
    lower = (M / (M + 1)) ** M / N**M
    upper = 1.0 if M == 1 else ((M - 1) / M) ** (M - 1) / N ** (M - 1)
    return lower, upper


def saturation_point(n: int, M: int) -> float:
    """``eps/L = 1/(2^n - 1)^M``: the interior windows reach full coverage."""
    return 1.0 / _segments(n) ** M


def single_receiver_boundaries(M: int) -> tuple[float, float]:
    """``(lower, upper)`` range of ``eps/L`` for ``M`` stages with one receiver."""
    if M < 1:
        raise ValueError("M must be >= 1")
    lower = (M / (M + 1)) ** (M * (M + 1))
    upper = 1.0 if M == 1 else ((M - 1) / M) ** (M * (M - 1))
    return lower, upper


def mean_time_multistage(n: int, M: int, epsilon: float, L: float = 1.0, lam: float = 1.0) -> float:
    """Mean time of the ``M``-stage plan with stretched (unsaturated) windows."""
    if n < 1:
        raise NOutOfRange("need at least one receiver")
    q = epsilon / L
    if not 0 < q < 1:
        raise EpsilonOutOfRange(f"need 0 < eps/L < 1, got {q}")
    if n == 1:
        return M * q ** (-1.0 / M) / lam
    N = _segments(n)
    if q > saturation_point(n, M) * (1 + REL_TOL):
        raise RegimeViolation(f"eps/L={q} exceeds 1/(2^n-1)^M = {saturation_point(n, M)}")
    return M * q ** (-1.0 / M) / (lam * N)


def _stretched_windows(N: int, M: int, q: float, L: float) -> tuple[float, ...]:
    windows = [N * q ** (i / M) * L for i in range(1, M + 1)]
    windows[-1] = N * q * L
    return tuple(windows)


def _saturated_windows(N: int, M: int, L: float) -> tuple[float, ...]:
    return tuple(L / N ** (m - 1) for m in range(1, M + 1))


def stretched_stage_count(n: int, q: float) -> int:
    """Largest ``M`` with ``q <= 1/(2^n - 1)^M`` (0 when even ``M = 1`` fails)."""
    N = _segments(n)
    M = 0
    while q <= N ** -(M + 1) * (1 + REL_TOL):
        M += 1
    return M


def plan_multistage(n: int, L: float, epsilon: float, lam: float = 1.0) -> StagePlan:
    """Time-optimal stage count and window ladder for ``n`` receivers."""
    if n < 1:
        raise NOutOfRange("need at least one receiver")
    if not 0 < epsilon < L:
        raise EpsilonOutOfRange(f"need 0 < epsilon < L, got epsilon={epsilon}, L={L}")
    q = epsilon / L

    if n == 1:
        M = 1
        while q < single_receiver_boundaries(M)[0]:
            M += 1
        windows = [q ** (m / M) * L for m in range(1, M + 1)]
        windows[-1] = epsilon
        return StagePlan(1, M, tuple(windows), epsilon, M * q ** (-1.0 / M) / lam, L, lam, epsilon)

    N = _segments(n)
    M = stretched_stage_count(n, q)
    if M >= 1 and q >= regime_boundaries(n, M)[0] * (1 - REL_TOL):
        windows = _stretched_windows(N, M, q, L)
        return StagePlan(n, M, windows, epsilon, M * q ** (-1.0 / M) / (lam * N), L, lam, epsilon)
    # Saturated: one more stage, every window covers its whole segment.
    M += 1
    windows = _saturated_windows(N, M, L)
    return StagePlan(n, M, windows, epsilon, M / lam, L, lam, windows[-1] / N)


def stage_mean_times(plan: StagePlan) -> list[float]:
    """Per-stage mean times ``segment / (lam * window)``; they sum to the plan mean."""
    N = plan.segments_per_window
    seg = plan.L
    out = []
    for w in plan.windows:
        out.append(seg / (plan.lam * w))
        seg = w / N
    return out


def plan_mean_time(plan: StagePlan) -> float:
    return math.fsum(stage_mean_times(plan))
