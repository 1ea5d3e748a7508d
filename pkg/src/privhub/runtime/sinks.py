"""Network sink transports and wire encodings.

The runtime never opens a connection itself; the single transport
handed to it does, which is what makes mediation auditable: every
outbound byte is attributable to one deliver() call and one ledger row.

post ships the payload as an HTTP POST body, publish wraps it in an
MQTT 3.1.1 PUBLISH packet, stream frames it with a 4-byte length prefix.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from ..model import PrivHubError


class SinkUnreachable(PrivHubError):
    """Destination did not accept the delivery."""


def mqtt_publish_packet(topic: str, payload: bytes) -> bytes:
    """Minimal MQTT 3.1.1 PUBLISH (QoS 0) packet."""
    tb = topic.encode("utf-8")
    body = struct.pack(">H", len(tb)) + tb + payload
    remaining = len(body)
    header = bytearray([0x30])
    while True:
        byte = remaining % 128
        remaining //= 128
        header.append(byte | (0x80 if remaining else 0))
        if not remaining:
            break
    return bytes(header) + body


def stream_frame(payload: bytes) -> bytes:
    """Length-prefixed frame: 4-byte big-endian size, then the payload."""
    return struct.pack(">I", len(payload)) + payload


def encode_wire(protocol: str, payload: bytes, meta: dict) -> bytes:
    if protocol == "publish":
        return mqtt_publish_packet(meta.get("topic", ""), payload)
    if protocol == "stream":
        return stream_frame(payload)
    return payload


@dataclass
class DeliveryRecord:
    """One outbound delivery as the transport saw it."""

    ts: int
    app: str
    node: str
    protocol: str
    destination: str
    payload: bytes
    meta: dict = field(default_factory=dict)


class SinkTransport:
    def deliver(self, record: DeliveryRecord) -> None:
        raise NotImplementedError


class RecordingTransport(SinkTransport):
    """Captures deliveries; can simulate a flaky destination."""

    def __init__(self, fail_first: int = 0):
        self.deliveries: list[DeliveryRecord] = []
        self.fail_first = fail_first
        self.attempts = 0

    def deliver(self, record: DeliveryRecord) -> None:
        self.attempts += 1
        if self.attempts <= self.fail_first:
            raise SinkUnreachable(f"{record.destination} unavailable (simulated)")
        self.deliveries.append(record)


class HttpPostTransport(SinkTransport):
    """Real HTTP delivery for post nodes; other protocols are refused."""

    def __init__(self, timeout_s: float = 5.0):
        self.timeout_s = timeout_s

    def deliver(self, record: DeliveryRecord) -> None:
        if record.protocol != "post":
            raise SinkUnreachable(f"http transport cannot carry {record.protocol!r}")
        import httpx

        url = record.destination.rstrip("/") + record.meta.get("path", "/")
        try:
            resp = httpx.post(
                url,
                content=record.payload,
                headers=record.meta.get("headers", {}),
                timeout=self.timeout_s,
            )
        except httpx.HTTPError as e:
            raise SinkUnreachable(str(e)) from e
        if resp.status_code >= 400:
            raise SinkUnreachable(f"{url} answered {resp.status_code}")


__all__ = [
    "SinkUnreachable",
    "mqtt_publish_packet",
    "stream_frame",
    "encode_wire",
    "DeliveryRecord",
    "SinkTransport",
    "RecordingTransport",
    "HttpPostTransport",
]
