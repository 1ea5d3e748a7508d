"""Runtime semantics of the sixteen pipeline operators.

Everything here is a pure function of (node config, message, timestamp)
plus explicitly injected stores, so executions replay bit-for-bit.
Error handling is type-based: an operator declares the datatype it
works on; inference operators pass non-matching items through
untouched, filter operators drop them.  An operator that ends up with
nothing to say returns an empty message, which stops the flow.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import cv2
import numpy as np

from .fixio import payload_hash
from .manifest import NodeSpec
from .model import (
    AudioPayload,
    ContentLabel,
    DataItem,
    DataKind,
    DeviceDescriptor,
    ImagePayload,
    InferenceAnnotation,
    Message,
    Payload,
    ProvenanceStep,
    ProvenanceTrail,
    ScalarPayload,
    TabularPayload,
    VideoPayload,
)
from .providers import InferenceProvider


@dataclass(frozen=True)
class Diagnostic:
    """Non-fatal runtime complaint, surfaced in traces and logs."""

    node: str
    code: str
    message: str
    ts: int

    def to_obj(self) -> dict:
        return {"node": self.node, "code": self.code, "message": self.message, "ts": self.ts}


def _step(node: NodeSpec, ts: int) -> ProvenanceStep:
    return ProvenanceStep(node.id, node.kind, ts)


def _stamp(item: DataItem, node: NodeSpec, ts: int) -> DataItem:
    out = item.copy()
    out.process = out.process.extended(_step(node, ts))
    return out


def make_trigger_message(node_id: str, ts: int) -> Message:
    """What an inject node emits: a timestamped trigger pulse."""
    from .model import TriggerMeta, make_raw_item

    device = DeviceDescriptor(node_id, "inject", DataKind.SCALAR)
    item = make_raw_item(device, ScalarPayload(float(ts), "ms"))
    item.contenttype = ContentLabel("trigger")
    item.process = ProvenanceTrail(device, [ProvenanceStep(node_id, "inject", ts)])
    return Message([item], TriggerMeta(node_id, ts))


def apply_inference(node: NodeSpec, msg: Message, provider: InferenceProvider, ts: int) -> Message:
    """detect/classify/extract: append annotations, never touch payloads."""
    target = node.properties["target"]
    want = DataKind(node.properties["datatype"])
    params = node.properties.get("params", {})
    out: list[DataItem] = []
    for item in msg.items:
        stamped = _stamp(item, node, ts)
        if item.datatype == want:
            stamped.inference = stamped.inference + provider.annotate(item, target, params, node.id)
        out.append(stamped)
    return Message(out, msg.trigger_meta)


# --- region helpers for select ---------------------------------------------


def _box_from_payload(payload: TabularPayload) -> tuple[int, int, int, int] | None:
    try:
        xi, yi = payload.column_index("x"), payload.column_index("y")
        wi, hi = payload.column_index("w"), payload.column_index("h")
    except KeyError:
        return None
    if not payload.rows:
        return None
    r = payload.rows[0]
    return int(r[xi]), int(r[yi]), int(r[wi]), int(r[hi])


def _crop_image(img: ImagePayload, box: tuple[int, int, int, int]) -> ImagePayload:
    x, y, w, h = box
    x0 = min(max(x, 0), img.width - 1)
    y0 = min(max(y, 0), img.height - 1)
    x1 = min(max(x + w, x0 + 1), img.width)
    y1 = min(max(y + h, y0 + 1), img.height)
    px = np.frombuffer(img.pixels, dtype=np.uint8).reshape(img.height, img.width, 3)
    return ImagePayload(x1 - x0, y1 - y0, px[y0:y1, x0:x1].tobytes())


def _window_from_payload(payload: TabularPayload) -> tuple[int, int] | None:
    try:
        si, ei = payload.column_index("start_ms"), payload.column_index("end_ms")
    except KeyError:
        return None
    if not payload.rows:
        return None
    r = payload.rows[0]
    return int(r[si]), int(r[ei])


def _cut_audio(audio: AudioPayload, window: tuple[int, int]) -> AudioPayload:
    start_ms, end_ms = window
    n = len(audio.samples) // 2
    s0 = min(max(start_ms * audio.sample_rate // 1000, 0), n)
    s1 = min(max(end_ms * audio.sample_rate // 1000, s0), n)
    if s1 == s0:
        s1 = min(s0 + 1, n)
    return AudioPayload(audio.sample_rate, audio.samples[s0 * 2 : s1 * 2])


def _select_payload(data: Payload, ann: InferenceAnnotation) -> Payload | None:
    """Payload cropped to one annotation's region; None when undefined."""
    if isinstance(data, ImagePayload):
        box = _box_from_payload(ann.payload)
        return _crop_image(data, box) if box else None
    if isinstance(data, AudioPayload):
        window = _window_from_payload(ann.payload)
        return _cut_audio(data, window) if window else None
    if isinstance(data, VideoPayload):
        box = _box_from_payload(ann.payload)
        if not box:
            return None
        return VideoPayload(data.frame_rate, [_crop_image(f, box) for f in data.frames])
    if isinstance(data, TabularPayload):
        # For tables the annotation payload is the selected sub-table.
        return ann.payload.copy()
    return data.copy()


def _apply_select(node: NodeSpec, msg: Message, ts: int, diagnostics: list[Diagnostic]) -> list[DataItem]:
    target = node.properties["target"]
    out: list[DataItem] = []
    for item in msg.items:
        for ann in item.inference:
            if ann.target.label != target:
                continue
            payload = _select_payload(item.data, ann)
            if payload is None:
                diagnostics.append(
                    Diagnostic(node.id, "REGION_UNDEFINED", f"annotation for {target!r} has no usable region", ts)
                )
                continue
            out.append(
                DataItem(
                    datatype=payload.kind,
                    contenttype=ContentLabel(target, "cropped"),
                    inference=[ann.copy()],
                    data=payload,
                    process=item.process.extended(_step(node, ts)),
                )
            )
    return out


def _apply_retrieve(node: NodeSpec, msg: Message, ts: int, diagnostics: list[Diagnostic]) -> list[DataItem]:
    target = node.properties["target"]
    when = node.properties.get("when", "present")
    out: list[DataItem] = []
    for item in msg.items:
        matches = [a for a in item.inference if a.target.label == target]
        if when == "absent":
            if not matches:
                out.append(
                    DataItem(
                        datatype=DataKind.TABULAR,
                        contenttype=ContentLabel(target, "extracted"),
                        inference=[],
                        data=TabularPayload(["status"], [["absent"]]),
                        process=item.process.extended(_step(node, ts)),
                    )
                )
            continue
        if not matches:
            continue
        table = matches[0].payload.copy()
        for extra in matches[1:]:
            if extra.payload.columns == table.columns:
                table.rows.extend([list(r) for r in extra.payload.rows])
            else:
                diagnostics.append(
                    Diagnostic(node.id, "MISMATCHED_COLUMNS", f"annotations for {target!r} disagree on columns", ts)
                )
        out.append(
            DataItem(
                datatype=DataKind.TABULAR,
                contenttype=ContentLabel(target, "extracted"),
                inference=[a.copy() for a in matches],
                data=table,
                process=item.process.extended(_step(node, ts)),
            )
        )
    return out


def _blur_image(img: ImagePayload, magnitude_percent: float) -> ImagePayload:
    # Box blur with edge replication; radius scales with magnitude.
    r = max(1, round(min(img.width, img.height) * magnitude_percent / 100.0))
    a = np.frombuffer(img.pixels, dtype=np.uint8).reshape(img.height, img.width, 3)
    px = cv2.blur(a, (2 * r + 1, 2 * r + 1), borderType=cv2.BORDER_REPLICATE)
    return ImagePayload(img.width, img.height, px.tobytes())


def _resample_audio(audio: AudioPayload, factor: float) -> AudioPayload:
    samples = np.frombuffer(audio.samples, dtype="<i2").astype(np.float64)
    n_out = max(1, int(len(samples) / factor))
    src = np.arange(n_out) * factor
    out = np.interp(src, np.arange(len(samples)), samples)
    return AudioPayload(audio.sample_rate, np.round(out).clip(-32768, 32767).astype("<i2").tobytes())


def noisify_payload(data: Payload, magnitude: float, rng: random.Random) -> Payload:
    if isinstance(data, ImagePayload):
        return _blur_image(data, magnitude)
    if isinstance(data, VideoPayload):
        return VideoPayload(data.frame_rate, [_blur_image(f, magnitude) for f in data.frames])
    if isinstance(data, AudioPayload):
        # Pitch/tempo shift by a seeded factor; magnitude bounds it.
        factor = 1.0 + rng.uniform(-magnitude, magnitude) / 100.0
        return _resample_audio(data, factor)
    if isinstance(data, ScalarPayload):
        return ScalarPayload(data.value * (1.0 + rng.uniform(-magnitude, magnitude) / 100.0), data.unit)
    if isinstance(data, TabularPayload):
        rows = []
        for row in data.rows:
            new_row = []
            for cell in row:
                if isinstance(cell, (int, float)) and not isinstance(cell, bool):
                    new_row.append(cell * (1.0 + rng.uniform(-magnitude, magnitude) / 100.0))
                else:
                    new_row.append(cell)
            rows.append(new_row)
        return TabularPayload(list(data.columns), rows)
    return data.copy()


def _apply_aggregate(node: NodeSpec, msg: Message, ts: int, diagnostics: list[Diagnostic]) -> list[DataItem]:
    func = node.properties["function"]
    want = DataKind(node.properties["datatype"])
    matching = [i for i in msg.items if i.datatype == want]
    if not matching:
        return []
    first = matching[0]
    label = ContentLabel(first.contenttype.label, "aggregated")
    trail = first.process.extended(_step(node, ts))

    if want == DataKind.SCALAR:
        values = [i.data.value for i in matching]  # type: ignore[union-attr]
        if func == "sum":
            value, unit = float(sum(values)), first.data.unit  # type: ignore[union-attr]
        elif func == "count":
            value, unit = float(len(values)), "count"
        else:
            value, unit = float(sum(values) / len(values)), first.data.unit  # type: ignore[union-attr]
        return [DataItem(DataKind.SCALAR, label, [], ScalarPayload(value, unit), trail)]

    group_field = node.properties.get("group_by_field")
    value_field = node.properties.get("value_field")
    base: TabularPayload = first.data  # type: ignore[assignment]
    if group_field is None or group_field not in base.columns:
        diagnostics.append(Diagnostic(node.id, "MISSING_FIELD", f"group_by_field {group_field!r} not in columns", ts))
        return []
    if func != "count" and (value_field is None or value_field not in base.columns):
        diagnostics.append(Diagnostic(node.id, "MISSING_FIELD", f"value_field {value_field!r} not in columns", ts))
        return []

    rows: list[list] = []
    for item in matching:
        table: TabularPayload = item.data  # type: ignore[assignment]
        if table.columns != base.columns:
            diagnostics.append(Diagnostic(node.id, "MISMATCHED_COLUMNS", "items disagree on columns", ts))
            continue
        rows.extend(table.rows)

    gi = base.column_index(group_field)
    vi = base.column_index(value_field) if func != "count" and value_field else None
    groups: dict = {}
    order: list = []
    for row in rows:
        key = row[gi]
        if key not in groups:
            groups[key] = []
            order.append(key)
        if vi is not None:
            cell = row[vi]
            if isinstance(cell, (int, float)) and not isinstance(cell, bool):
                groups[key].append(float(cell))
            else:
                diagnostics.append(Diagnostic(node.id, "NON_NUMERIC", f"cell {cell!r} in {value_field!r} skipped", ts))
        else:
            groups[key].append(1.0)

    out_col = "count" if func == "count" else value_field
    out_rows: list[list] = []
    for key in order:
        vals = groups[key]
        if func == "count":
            out_rows.append([key, float(len(vals))])
        elif func == "sum":
            out_rows.append([key, float(sum(vals))])
        else:
            out_rows.append([key, float(sum(vals) / len(vals)) if vals else 0.0])
    payload = TabularPayload([group_field, out_col], out_rows)
    return [DataItem(DataKind.TABULAR, label, [], payload, trail)]


def apply_filter(
    node: NodeSpec,
    msg: Message,
    ts: int,
    spoof_store: dict[str, Payload] | None = None,
    diagnostics: list[Diagnostic] | None = None,
) -> Message:
    """spoof/noisify/select/aggregate/retrieve: reshape or drop payloads."""
    diags = diagnostics if diagnostics is not None else []
    want = DataKind(node.properties["datatype"])
    kept = [i for i in msg.items if i.datatype == want]

    if node.kind == "select":
        return Message(_apply_select(node, Message(kept, msg.trigger_meta), ts, diags), msg.trigger_meta)
    if node.kind == "retrieve":
        return Message(_apply_retrieve(node, Message(kept, msg.trigger_meta), ts, diags), msg.trigger_meta)
    if node.kind == "aggregate":
        return Message(_apply_aggregate(node, Message(kept, msg.trigger_meta), ts, diags), msg.trigger_meta)

    if node.kind == "noisify":
        magnitude = float(node.properties["magnitude_percent"])
        rng = random.Random(int(node.properties["seed"]))
        out: list[DataItem] = []
        for item in kept:
            stamped = _stamp(item, node, ts)
            stamped.data = noisify_payload(item.data, magnitude, rng)
            stamped.contenttype = stamped.contenttype.with_qualifier("anonymized")
            out.append(stamped)
        return Message(out, msg.trigger_meta)

    if node.kind == "spoof":
        store = spoof_store or {}
        names = [n for n in node.properties["replacements"] if n in store]
        out = []
        for item in kept:
            candidates = [n for n in names if store[n].kind == item.datatype]
            if not candidates:
                diags.append(Diagnostic(node.id, "NO_REPLACEMENT", f"no {item.datatype.value} replacement available", ts))
                continue
            pick = candidates[int(payload_hash(item.data), 16) % len(candidates)]
            stamped = _stamp(item, node, ts)
            stamped.data = store[pick].copy()
            stamped.contenttype = stamped.contenttype.with_qualifier("spoofed")
            out.append(stamped)
        return Message(out, msg.trigger_meta)

    raise ValueError(f"not a filter node: {node.kind}")


class JoinState:
    """Merge state for one join node.

    Nonblocking joins forward whatever arrives (OR).  Blocking joins
    hold the newest message per input port and emit the concatenation,
    in port order, once every port holds a message and all buffered
    timestamps span at most window_ms (AND).  On each arrival, buffered
    messages older than window_ms relative to the newest are evicted.
    """

    def __init__(self, node: NodeSpec):
        self.node = node
        self.mode = node.properties["mode"]
        self.window_ms = int(node.properties.get("window_ms", 0))
        self.inputs_expected = int(node.properties["inputs_expected"])
        self._buffers: dict[int, tuple[int, Message]] = {}

    def step(self, port: int, msg: Message, ts: int) -> Message | None:
        if self.mode == "nonblocking":
            out = Message([_stamp(i, self.node, ts) for i in msg.items], msg.trigger_meta)
            return out if out.items else None

        for p in sorted(self._buffers):
            if ts - self._buffers[p][0] > self.window_ms:
                del self._buffers[p]
        self._buffers[port] = (ts, msg)
        if len(self._buffers) < self.inputs_expected:
            return None
        stamps = [t for t, _ in self._buffers.values()]
        if max(stamps) - min(stamps) > self.window_ms:
            return None
        items: list[DataItem] = []
        newest_meta = self._buffers[max(self._buffers, key=lambda p: self._buffers[p][0])][1].trigger_meta
        for p in sorted(self._buffers):
            items.extend(_stamp(i, self.node, ts) for i in self._buffers[p][1].items)
        self._buffers.clear()
        return Message(items, newest_meta) if items else None


def _payload_summary(data: Payload) -> str:
    if isinstance(data, ImagePayload):
        return f"{data.width}x{data.height} image"
    if isinstance(data, AudioPayload):
        return f"{data.sample_rate}Hz {data.duration_ms}ms audio"
    if isinstance(data, VideoPayload):
        f0 = data.frames[0]
        return f"{len(data.frames)} frames {f0.width}x{f0.height} video"
    if isinstance(data, TabularPayload):
        return f"{len(data.rows)}x{len(data.columns)} table"
    return f"scalar value={data.value}{data.unit and ' ' + data.unit}"


def debug_lines(node: NodeSpec, msg: Message, ts: int) -> list[str]:
    """Human-readable tap output; payload bytes never appear."""
    label = node.properties.get("label", node.id)
    lines = []
    for item in msg.items:
        ct = item.contenttype
        tag = ct.label if ct.qualifier == "none" else f"{ct.qualifier} {ct.label}"
        lines.append(f"[{ts}] {label}: {tag} ({_payload_summary(item.data)}, {len(item.inference)} annotations)")
    return lines


def apply_debug(node: NodeSpec, msg: Message, ts: int) -> Message:
    return Message([_stamp(i, node, ts) for i in msg.items], msg.trigger_meta)


__all__ = [
    "Diagnostic",
    "make_trigger_message",
    "apply_inference",
    "apply_filter",
    "apply_debug",
    "noisify_payload",
    "JoinState",
    "debug_lines",
]
