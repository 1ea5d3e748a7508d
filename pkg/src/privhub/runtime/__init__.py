"""Deterministic execution of installed pipelines under egress mediation."""

from .clock import VirtualClock
from .drivers import (
    ClockDriver,
    DeviceDriver,
    DriverSession,
    IncompatibleBinding,
    MissingBinding,
    ReplayDriver,
    SineScalarDriver,
    SyntheticTabularDriver,
)
from .engine import (
    AppState,
    ExecutionTrace,
    HubRuntime,
    InstallRejected,
    InterceptRule,
    MissingReplacement,
    TraceDelivery,
    TraceEgress,
    UnknownApp,
    UnknownPermission,
)
from .ledger import EgressLedger, EgressRecord
from .sinks import (
    DeliveryRecord,
    HttpPostTransport,
    RecordingTransport,
    SinkTransport,
    SinkUnreachable,
    mqtt_publish_packet,
    stream_frame,
)

__all__ = [
    "VirtualClock",
    "DeviceDriver",
    "DriverSession",
    "ReplayDriver",
    "SyntheticTabularDriver",
    "SineScalarDriver",
    "ClockDriver",
    "MissingBinding",
    "IncompatibleBinding",
    "EgressLedger",
    "EgressRecord",
    "SinkTransport",
    "RecordingTransport",
    "HttpPostTransport",
    "DeliveryRecord",
    "SinkUnreachable",
    "mqtt_publish_packet",
    "stream_frame",
    "HubRuntime",
    "AppState",
    "ExecutionTrace",
    "InterceptRule",
    "InstallRejected",
    "UnknownApp",
    "UnknownPermission",
    "MissingReplacement",
    "TraceDelivery",
    "TraceEgress",
]
