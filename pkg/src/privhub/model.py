"""Uniform data representation flowing between pipeline operators.

Every operator consumes and produces Messages.  A Message is an ordered
list of DataItems, each of which carries five fields: the payload kind
(``datatype``), a semantic content tag (``contenttype``), accumulated
inference annotations (``inference``), the payload itself (``data``),
and a provenance trail (``process``).  Items are self-describing so any
operator can decide from the item alone whether it applies.

Serialization is canonical: the same in-memory value always produces
byte-identical JSON (sorted keys, no whitespace), which downstream code
relies on for hashing, ledger accounting, and golden tests.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from enum import Enum


class PrivHubError(Exception):
    """Base class for all errors raised by this package."""


class PayloadKindMismatch(PrivHubError):
    """An item's declared datatype does not match its payload variant."""


class DataKind(str, Enum):
    """The five payload kinds items can carry."""

    VIDEO = "video"
    IMAGE = "image"
    AUDIO = "audio"
    TABULAR = "tabular"
    SCALAR = "scalar"


# Qualifiers refine a content label to reflect what filters did to the
# payload.  "none" marks untouched content straight from a device.
QUALIFIERS = ("none", "cropped", "extracted", "anonymized", "spoofed", "aggregated")


@dataclass(frozen=True)
class ContentLabel:
    """Semantic tag on an item, e.g. (face, cropped) or (speech, anonymized)."""

    label: str
    qualifier: str = "none"

    def __post_init__(self) -> None:
        if not self.label or self.label != self.label.lower():
            raise ValueError(f"content label must be a non-empty lowercase tag: {self.label!r}")
        if self.qualifier not in QUALIFIERS:
            raise ValueError(f"unknown qualifier: {self.qualifier!r}")

    def with_qualifier(self, qualifier: str) -> ContentLabel:
        return ContentLabel(self.label, qualifier)

    def to_obj(self) -> dict:
        return {"label": self.label, "qualifier": self.qualifier}

    @staticmethod
    def from_obj(obj: dict) -> ContentLabel:
        return ContentLabel(obj["label"], obj.get("qualifier", "none"))


RAW = "raw"


def raw_label() -> ContentLabel:
    return ContentLabel(RAW, "none")


@dataclass
class ImagePayload:
    """RGB8 raster; ``pixels`` holds width*height*3 bytes, row-major."""

    width: int
    height: int
    pixels: bytes

    kind = DataKind.IMAGE

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer is {len(self.pixels)} bytes, expected {self.width * self.height * 3}"
            )

    def copy(self) -> ImagePayload:
        # bytes are immutable; structural copy is enough
        return ImagePayload(self.width, self.height, self.pixels)

    def to_obj(self) -> dict:
        return {
            "kind": "image",
            "width": self.width,
            "height": self.height,
            "pixels_b64": base64.b64encode(self.pixels).decode("ascii"),
        }


@dataclass
class AudioPayload:
    """Mono PCM; ``samples`` holds 16-bit little-endian frames."""

    sample_rate: int
    samples: bytes

    kind = DataKind.AUDIO

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        if len(self.samples) % 2 != 0:
            raise ValueError("sample buffer must hold whole 16-bit frames")

    @property
    def duration_ms(self) -> int:
        return (len(self.samples) // 2) * 1000 // self.sample_rate

    def copy(self) -> AudioPayload:
        return AudioPayload(self.sample_rate, self.samples)

    def to_obj(self) -> dict:
        return {
            "kind": "audio",
            "sample_rate": self.sample_rate,
            "samples_b64": base64.b64encode(self.samples).decode("ascii"),
        }


@dataclass
class VideoPayload:
    """Short clip as a frame list; all frames share dimensions."""

    frame_rate: float
    frames: list[ImagePayload]

    kind = DataKind.VIDEO

    def __post_init__(self) -> None:
        if self.frame_rate <= 0:
            raise ValueError("frame rate must be positive")
        if not self.frames:
            raise ValueError("video payload needs at least one frame")
        w, h = self.frames[0].width, self.frames[0].height
        for f in self.frames:
            if (f.width, f.height) != (w, h):
                raise ValueError("video frames must share dimensions")

    def copy(self) -> VideoPayload:
        return VideoPayload(self.frame_rate, [f.copy() for f in self.frames])

    def to_obj(self) -> dict:
        return {
            "kind": "video",
            "frame_rate": self.frame_rate,
            "frames": [f.to_obj() for f in self.frames],
        }


@dataclass
class TabularPayload:
    """Column-named rows; cells are strings or numbers."""

    columns: list[str]
    rows: list[list]

    kind = DataKind.TABULAR

    def __post_init__(self) -> None:
        n = len(self.columns)
        if len(set(self.columns)) != n:
            raise ValueError("duplicate column names")
        for row in self.rows:
            if len(row) != n:
                raise ValueError(f"row width {len(row)} != column count {n}")

    def copy(self) -> TabularPayload:
        return TabularPayload(list(self.columns), [list(r) for r in self.rows])

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise KeyError(name) from None

    def to_obj(self) -> dict:
        return {"kind": "tabular", "columns": list(self.columns), "rows": [list(r) for r in self.rows]}


@dataclass
class ScalarPayload:
    """Single reading with an optional unit."""

    value: float
    unit: str = ""

    kind = DataKind.SCALAR

    def copy(self) -> ScalarPayload:
        return ScalarPayload(self.value, self.unit)

    def to_obj(self) -> dict:
        return {"kind": "scalar", "value": self.value, "unit": self.unit}


Payload = ImagePayload | AudioPayload | VideoPayload | TabularPayload | ScalarPayload


def payload_from_obj(obj: dict) -> Payload:
    kind = obj.get("kind")
    if kind == "image":
        return ImagePayload(obj["width"], obj["height"], base64.b64decode(obj["pixels_b64"]))
    if kind == "audio":
        return AudioPayload(obj["sample_rate"], base64.b64decode(obj["samples_b64"]))
    if kind == "video":
        return VideoPayload(obj["frame_rate"], [payload_from_obj(f) for f in obj["frames"]])
    if kind == "tabular":
        return TabularPayload(list(obj["columns"]), [list(r) for r in obj["rows"]])
    if kind == "scalar":
        return ScalarPayload(obj["value"], obj.get("unit", ""))
    raise ValueError(f"unknown payload kind: {kind!r}")


@dataclass
class InferenceAnnotation:
    """One inference result attached to an item.

    ``task`` names the operator family that produced it (detect, classify
    or extract), ``target`` what was looked for, and ``payload`` the
    structured result (boxes, windows, categories, measurements) as a
    small table.
    """

    annotator: str
    task: str
    target: ContentLabel
    payload: TabularPayload
    confidence: float

    def __post_init__(self) -> None:
        if self.task not in ("detect", "classify", "extract"):
            raise ValueError(f"unknown inference task: {self.task!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")

    def copy(self) -> InferenceAnnotation:
        return InferenceAnnotation(self.annotator, self.task, self.target, self.payload.copy(), self.confidence)

    def to_obj(self) -> dict:
        return {
            "annotator": self.annotator,
            "task": self.task,
            "target": self.target.to_obj(),
            "payload": self.payload.to_obj(),
            "confidence": self.confidence,
        }

    @staticmethod
    def from_obj(obj: dict) -> InferenceAnnotation:
        return InferenceAnnotation(
            obj["annotator"],
            obj["task"],
            ContentLabel.from_obj(obj["target"]),
            payload_from_obj(obj["payload"]),
            obj["confidence"],
        )


@dataclass(frozen=True)
class DeviceDescriptor:
    """Origin device of an item's payload."""

    device_id: str
    driver: str
    kind: DataKind

    def to_obj(self) -> dict:
        return {"device_id": self.device_id, "driver": self.driver, "kind": self.kind.value}

    @staticmethod
    def from_obj(obj: dict) -> DeviceDescriptor:
        return DeviceDescriptor(obj["device_id"], obj["driver"], DataKind(obj["kind"]))


@dataclass(frozen=True)
class ProvenanceStep:
    """One operator application: which node, what kind, when."""

    node: str
    op: str
    ts: int

    def to_obj(self) -> dict:
        return {"node": self.node, "op": self.op, "ts": self.ts}

    @staticmethod
    def from_obj(obj: dict) -> ProvenanceStep:
        return ProvenanceStep(obj["node"], obj["op"], obj["ts"])


@dataclass
class ProvenanceTrail:
    """Append-only history from device to the current hop."""

    device: DeviceDescriptor
    ops: list[ProvenanceStep] = field(default_factory=list)

    def extended(self, step: ProvenanceStep) -> ProvenanceTrail:
        return ProvenanceTrail(self.device, [*self.ops, step])

    def copy(self) -> ProvenanceTrail:
        return ProvenanceTrail(self.device, list(self.ops))

    def to_obj(self) -> dict:
        return {"device": self.device.to_obj(), "ops": [s.to_obj() for s in self.ops]}

    @staticmethod
    def from_obj(obj: dict) -> ProvenanceTrail:
        return ProvenanceTrail(
            DeviceDescriptor.from_obj(obj["device"]),
            [ProvenanceStep.from_obj(s) for s in obj["ops"]],
        )


@dataclass
class DataItem:
    """One self-describing unit of data moving through a pipeline."""

    datatype: DataKind
    contenttype: ContentLabel
    inference: list[InferenceAnnotation]
    data: Payload
    process: ProvenanceTrail

    def __post_init__(self) -> None:
        if self.data.kind != self.datatype:
            raise PayloadKindMismatch(
                f"item declares {self.datatype.value} but payload is {self.data.kind.value}"
            )

    def copy(self) -> DataItem:
        return DataItem(
            self.datatype,
            self.contenttype,
            [a.copy() for a in self.inference],
            self.data.copy(),
            self.process.copy(),
        )

    def to_obj(self, include_process: bool = True) -> dict:
        obj = {
            "datatype": self.datatype.value,
            "contenttype": self.contenttype.to_obj(),
            "inference": [a.to_obj() for a in self.inference],
            "data": self.data.to_obj(),
        }
        if include_process:
            obj["process"] = self.process.to_obj()
        return obj

    @staticmethod
    def from_obj(obj: dict) -> DataItem:
        return DataItem(
            DataKind(obj["datatype"]),
            ContentLabel.from_obj(obj["contenttype"]),
            [InferenceAnnotation.from_obj(a) for a in obj["inference"]],
            payload_from_obj(obj["data"]),
            ProvenanceTrail.from_obj(obj["process"]),
        )


@dataclass(frozen=True)
class TriggerMeta:
    """Which node fired the message and at what virtual time."""

    source: str
    ts: int

    def to_obj(self) -> dict:
        return {"source": self.source, "ts": self.ts}


@dataclass
class Message:
    """Ordered batch of items delivered along one wire."""

    items: list[DataItem]
    trigger_meta: TriggerMeta | None = None

    def copy(self) -> Message:
        return Message([i.copy() for i in self.items], self.trigger_meta)

    def is_empty(self) -> bool:
        return not self.items

    def to_obj(self) -> dict:
        return {
            "items": [i.to_obj() for i in self.items],
            "trigger_meta": self.trigger_meta.to_obj() if self.trigger_meta else None,
        }

    @staticmethod
    def from_obj(obj: dict) -> Message:
        tm = obj.get("trigger_meta")
        return Message(
            [DataItem.from_obj(i) for i in obj["items"]],
            TriggerMeta(tm["source"], tm["ts"]) if tm else None,
        )


def canonical_json(obj) -> str:
    """Canonical encoding: sorted keys, no whitespace, plain ASCII."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def canonical_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")


def item_canonical_bytes(item: DataItem) -> bytes:
    return canonical_bytes(item.to_obj())


def message_canonical_bytes(msg: Message) -> bytes:
    return canonical_bytes(msg.to_obj())


def egress_item_obj(item: DataItem) -> dict:
    # Provenance never leaves the hub: only the four public fields ship.
    return item.to_obj(include_process=False)


def egress_payload_bytes(items: list[DataItem]) -> bytes:
    """Wire payload for a batch of outbound items."""
    return canonical_bytes({"items": [egress_item_obj(i) for i in items]})


def egress_item_size(item: DataItem) -> int:
    """Ledger byte accounting: size of one item's outbound canonical form."""
    return len(canonical_bytes(egress_item_obj(item)))


def make_raw_item(device: DeviceDescriptor, payload: Payload) -> DataItem:
    """Fresh item as a provider emits it: raw content, empty history."""
    return DataItem(
        datatype=payload.kind,
        contenttype=raw_label(),
        inference=[],
        data=payload,
        process=ProvenanceTrail(device, []),
    )


def deep_copy_message(msg: Message) -> Message:
    """Isolated copy for fan-out; mutations on one copy never leak."""
    return msg.copy()


__all__ = [
    "PrivHubError",
    "PayloadKindMismatch",
    "DataKind",
    "QUALIFIERS",
    "ContentLabel",
    "raw_label",
    "ImagePayload",
    "AudioPayload",
    "VideoPayload",
    "TabularPayload",
    "ScalarPayload",
    "Payload",
    "payload_from_obj",
    "InferenceAnnotation",
    "DeviceDescriptor",
    "ProvenanceStep",
    "ProvenanceTrail",
    "DataItem",
    "TriggerMeta",
    "Message",
    "canonical_json",
    "canonical_bytes",
    "item_canonical_bytes",
    "message_canonical_bytes",
    "egress_item_obj",
    "egress_payload_bytes",
    "egress_item_size",
    "make_raw_item",
    "deep_copy_message",
]
