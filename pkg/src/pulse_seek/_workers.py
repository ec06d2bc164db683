"""Worker-count policy shared by the parallel entry points."""

import os

ENV_VAR = "PULSE_SEEK_THREADS"


def worker_count() -> int:
    """Workers allowed by ``PULSE_SEEK_THREADS`` (default 1, i.e. serial)."""
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, min(n, os.cpu_count() or 1))
