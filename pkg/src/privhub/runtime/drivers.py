"""Device drivers feeding provider nodes.

A driver is a payload source; each installed provider node gets its own
session so replay cursors never interfere across apps.  Replay drivers
walk fixture directories in name order, synthetic drivers derive every
payload from (seed, index), so runs are reproducible.
"""

from __future__ import annotations

import hashlib
import math
import random
from pathlib import Path

from ..fixio import list_payload_files, load_payload_file
from ..model import DataKind, Payload, PrivHubError, ScalarPayload, TabularPayload


class MissingBinding(PrivHubError):
    """A provider node has no driver bound to its device name."""


class IncompatibleBinding(PrivHubError):
    """Bound driver cannot serve the node (wrong kind, or cannot push)."""


class DriverSession:
    """Stateful cursor over one driver for one installed node."""

    def pull(self, ts: int) -> Payload | None:
        raise NotImplementedError


class DeviceDriver:
    """Driver factory; ``session()`` yields an independent cursor.

    ``push_period_ms`` set means the driver can emit spontaneously and
    the runtime schedules one push per period for bound push nodes.
    """

    name = "device"
    kind = DataKind.SCALAR
    push_period_ms: int | None = None

    def session(self) -> DriverSession:
        raise NotImplementedError


class _ReplaySession(DriverSession):
    def __init__(self, payloads: list[Payload]):
        self._payloads = payloads
        self._idx = 0

    def pull(self, ts: int) -> Payload | None:
        if not self._payloads:
            return None
        payload = self._payloads[self._idx % len(self._payloads)]
        self._idx += 1
        return payload.copy()


class ReplayDriver(DeviceDriver):
    """Cycles through payload files of one media directory."""

    def __init__(self, name: str, media_dir: Path | str, push_period_ms: int | None = None):
        self.name = name
        self.media_dir = Path(media_dir)
        self._payloads = [load_payload_file(p) for p in list_payload_files(self.media_dir)]
        if not self._payloads:
            raise ValueError(f"media dir {media_dir} holds no payload files")
        self.kind = self._payloads[0].kind
        if any(p.kind != self.kind for p in self._payloads):
            raise ValueError(f"media dir {media_dir} mixes payload kinds")
        self.push_period_ms = push_period_ms

    def session(self) -> DriverSession:
        return _ReplaySession(self._payloads)


def _derived_seed(*parts) -> int:
    h = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


class _TabularSession(DriverSession):
    def __init__(self, seed: int, categories: list[str]):
        self._seed = seed
        self._categories = categories
        self._idx = 0

    def pull(self, ts: int) -> Payload | None:
        rng = random.Random(_derived_seed(self._seed, self._idx))
        self._idx += 1
        rows = []
        for _ in range(rng.randint(3, 6)):
            rows.append([rng.choice(self._categories), float(rng.randint(5, 120))])
        return TabularPayload(["content category", "duration"], rows)


class SyntheticTabularDriver(DeviceDriver):
    """Usage-log style tables: (category, duration) rows per pull."""

    kind = DataKind.TABULAR

    def __init__(self, name: str, seed: int, categories: list[str] | None = None):
        self.name = name
        self.seed = seed
        self.categories = categories or ["news", "sports", "movies", "kids"]

    def session(self) -> DriverSession:
        return _TabularSession(self.seed, self.categories)


class _SineSession(DriverSession):
    def __init__(self, driver: SineScalarDriver):
        self._d = driver
        self._idx = 0

    def pull(self, ts: int) -> Payload | None:
        d = self._d
        rng = random.Random(_derived_seed(d.seed, self._idx))
        self._idx += 1
        phase = 2.0 * math.pi * (ts % d.period_ms) / d.period_ms
        value = d.base + d.amplitude * math.sin(phase) + rng.uniform(-d.jitter, d.jitter)
        return ScalarPayload(round(value, 4), d.unit)


class SineScalarDriver(DeviceDriver):
    """Smooth periodic reading with seeded jitter (humidity, temperature)."""

    kind = DataKind.SCALAR

    def __init__(
        self,
        name: str,
        seed: int,
        base: float = 50.0,
        amplitude: float = 10.0,
        period_ms: int = 3_600_000,
        jitter: float = 1.0,
        unit: str = "%",
    ):
        self.name = name
        self.seed = seed
        self.base = base
        self.amplitude = amplitude
        self.period_ms = period_ms
        self.jitter = jitter
        self.unit = unit

    def session(self) -> DriverSession:
        return _SineSession(self)


class _ClockSession(DriverSession):
    def pull(self, ts: int) -> Payload | None:
        return ScalarPayload(float(ts), "ms")


class ClockDriver(DeviceDriver):
    """Reads the hub clock itself; pulls yield the current virtual time."""

    name = "clock"
    kind = DataKind.SCALAR

    def session(self) -> DriverSession:
        return _ClockSession()


__all__ = [
    "MissingBinding",
    "IncompatibleBinding",
    "DriverSession",
    "DeviceDriver",
    "ReplayDriver",
    "SyntheticTabularDriver",
    "SineScalarDriver",
    "ClockDriver",
]
