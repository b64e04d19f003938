"""Minimal discrete-event scheduler with a virtual clock.

Events fire in (time, insertion) order, so identical schedules replay
identically; multi-second robot cycles run in microseconds of wall time.
"""

from __future__ import annotations

import heapq
from itertools import count
from typing import Callable


class EventScheduler:
    def __init__(self, start: float = 0.0):
        self._now = start
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = count()

    @property
    def now(self) -> float:
        return self._now

    def at(self, t: float, fn: Callable[[], None]) -> None:
        if t < self._now - 1e-12:
            raise ValueError(f"cannot schedule at {t} before now {self._now}")
        heapq.heappush(self._heap, (max(t, self._now), next(self._seq), fn))

    def after(self, delay: float, fn: Callable[[], None]) -> None:
        self.at(self._now + delay, fn)

    def run(self, horizon: float = float("inf"), max_events: int = 10_000_000) -> int:
        """Dispatch until the heap drains or the horizon passes; returns count."""
        fired = 0
        while self._heap and self._heap[0][0] <= horizon:
            t, _, fn = heapq.heappop(self._heap)
            self._now = t
            fn()
            fired += 1
            if fired >= max_events:
                raise RuntimeError(f"event budget exhausted at t={t}")
        return fired
