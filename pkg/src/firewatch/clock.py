"""Simulated and wall-clock time behind one interface.

The pipeline is a discrete-event loop: it asks the clock to advance to the
next event's timestamp. The simulated clock jumps instantly (deterministic
tests, faster-than-real replays); the wall clock actually sleeps, which is
what makes a live console session feel live.
"""

from __future__ import annotations

import time


class SimClock:
    """Logical milliseconds; advancing is free and instantaneous."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance_to(self, t_ms: int):
        if t_ms < self._now:
            raise ValueError(f"time cannot run backwards: {t_ms} < {self._now}")
        self._now = t_ms


class WallClock:
    """Milliseconds since construction, backed by the monotonic clock."""

    def __init__(self):
        self._epoch = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._epoch) * 1000)

    def advance_to(self, t_ms: int):
        delay = t_ms / 1000.0 - (time.monotonic() - self._epoch)
        if delay > 0:
            time.sleep(delay)
