"""Virtual time. Milliseconds, integers, moves only when told to."""

from __future__ import annotations


class VirtualClock:
    """Simulation clock; the runtime advances it explicitly per event."""

    def __init__(self, start_ms: int = 0):
        if start_ms < 0:
            raise ValueError("clock cannot start before zero")
        self._now = int(start_ms)

    @property
    def now_ms(self) -> int:
        return self._now

    def advance(self, delta_ms: int) -> int:
        if delta_ms < 0:
            raise ValueError("clock cannot move backwards")
        self._now += int(delta_ms)
        return self._now

    def advance_to(self, ts_ms: int) -> int:
        if ts_ms < self._now:
            raise ValueError(f"clock cannot move backwards: {ts_ms} < {self._now}")
        self._now = int(ts_ms)
        return self._now
