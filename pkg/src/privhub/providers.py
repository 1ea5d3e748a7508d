"""Inference providers: pluggable model backends for detect/classify/extract.

An inference node names a target ("face", "crying", ...); the registry
resolves it to a provider that supports the (task, target, datatype)
triple.  Resolution happens once when a pipeline is built, so a missing
provider fails installation rather than a live flow.

All reference providers are deterministic pure functions of the item
and their params, which keeps whole-pipeline execution replayable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fixio import ANNOTATIONS_FILE, list_payload_files, load_payload_file, payload_hash
from .model import (
    AudioPayload,
    ContentLabel,
    DataItem,
    DataKind,
    ImagePayload,
    InferenceAnnotation,
    PrivHubError,
    ScalarPayload,
    TabularPayload,
)

MS_PER_DAY = 24 * 60 * 60 * 1000


class NoProviderRegistered(PrivHubError):
    """No registered provider supports an inference node's triple."""


class InferenceProvider:
    """Base class; subclasses answer supports() and annotate()."""

    name = "base"

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        raise NotImplementedError

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        raise NotImplementedError

    def _annotation(self, task: str, target: str, payload: TabularPayload, confidence: float) -> InferenceAnnotation:
        return InferenceAnnotation(self.name, task, ContentLabel(target), payload, confidence)


class ThresholdClassifier(InferenceProvider):
    """Scalar threshold compare; categorizes a reading as above/below."""

    name = "threshold"

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return task == "classify" and kind == DataKind.SCALAR

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        threshold = params.get("threshold", 0)
        assert isinstance(item.data, ScalarPayload)
        category = "above" if item.data.value > threshold else "below"
        payload = TabularPayload(["category"], [[category]])
        return [self._annotation("classify", target, payload, 1.0)]


class BrightnessExtractor(InferenceProvider):
    """Mean luma of an image, 0..255."""

    name = "brightness"

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return task == "extract" and target == "brightness" and kind == DataKind.IMAGE

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        assert isinstance(item.data, ImagePayload)
        px = np.frombuffer(item.data.pixels, dtype=np.uint8).reshape(-1, 3).astype(np.float64)
        luma = float(np.mean(px @ np.array([0.299, 0.587, 0.114])))
        payload = TabularPayload(["brightness"], [[round(luma, 3)]])
        return [self._annotation("extract", target, payload, 1.0)]


class AudioEnergyDetector(InferenceProvider):
    """Voice-activity style windows: frames whose RMS clears a threshold.

    Emits one annotation per contiguous active window with rows
    [start_ms, end_ms] relative to the payload start.
    """

    name = "energy"
    targets = frozenset({"speech", "sound", "voice"})

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return task == "detect" and target in self.targets and kind == DataKind.AUDIO

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        assert isinstance(item.data, AudioPayload)
        frame_ms = int(params.get("frame_ms", 30))
        threshold = float(params.get("threshold_rms", 500.0))
        samples = np.frombuffer(item.data.samples, dtype="<i2").astype(np.float64)
        spf = max(1, item.data.sample_rate * frame_ms // 1000)
        n_frames = len(samples) // spf
        if n_frames == 0:
            return []
        frames = samples[: n_frames * spf].reshape(n_frames, spf)
        active = np.sqrt(np.mean(frames**2, axis=1)) > threshold
        out: list[InferenceAnnotation] = []
        start = None
        for i, on in enumerate([*active.tolist(), False]):
            if on and start is None:
                start = i
            elif not on and start is not None:
                rows = [[start * frame_ms, i * frame_ms]]
                out.append(self._annotation("detect", target, TabularPayload(["start_ms", "end_ms"], rows), 0.9))
                start = None
        return out


class TabularPredicateDetector(InferenceProvider):
    """Rows matching a simple predicate, optionally projected."""

    name = "tabular-predicate"
    _OPS = {
        "==": lambda a, b: a == b,
        "!=": lambda a, b: a != b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
    }

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return task == "detect" and kind == DataKind.TABULAR

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        assert isinstance(item.data, TabularPayload)
        table = item.data
        field = params.get("field")
        if field is None or field not in table.columns:
            return []
        op = self._OPS[params.get("op", "==")]
        value = params.get("value")
        ci = table.column_index(field)
        rows = [r for r in table.rows if _safe_cmp(op, r[ci], value)]
        if not rows:
            return []
        columns = list(table.columns)
        project = params.get("project")
        if project:
            keep = [table.column_index(c) for c in project if c in table.columns]
            rows = [[r[i] for i in keep] for r in rows]
            columns = [table.columns[i] for i in keep]
        payload = TabularPayload(columns, [list(r) for r in rows])
        return [self._annotation("detect", target, payload, 1.0)]


def _safe_cmp(op, a, b) -> bool:
    try:
        return bool(op(a, b))
    except TypeError:
        return False


class TimeWindowClassifier(InferenceProvider):
    """Annotates a clock reading only when outside every blocked window.

    Windows are [start_ms, end_ms) of the day; a window with start > end
    wraps over midnight.  Absence of the annotation is the signal that
    the current time is blocked.
    """

    name = "time-window"

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return task == "classify" and kind == DataKind.SCALAR

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        assert isinstance(item.data, ScalarPayload)
        ms_of_day = int(item.data.value) % MS_PER_DAY
        for window in params.get("blocked_windows", []):
            start, end = int(window[0]), int(window[1])
            if start <= end:
                blocked = start <= ms_of_day < end
            else:
                blocked = ms_of_day >= start or ms_of_day < end
            if blocked:
                return []
        payload = TabularPayload(["category"], [["allowed"]])
        return [self._annotation("classify", target, payload, 1.0)]


class FixtureAnnotator(InferenceProvider):
    """Ground-truth annotations recorded alongside fixture media.

    Each media directory may ship an annotations.json mapping file names
    to per-target annotation lists; this provider indexes them by
    payload hash so the same bytes always get the same annotations.
    """

    name = "fixture"

    def __init__(self) -> None:
        self._triples: set[tuple[str, str, DataKind]] = set()
        # payload hash -> target -> list of (task, payload obj, confidence)
        self._by_hash: dict[str, dict[str, list[tuple[str, TabularPayload, float]]]] = {}

    @staticmethod
    def from_media_root(media_root: Path | str) -> FixtureAnnotator:
        fx = FixtureAnnotator()
        root = Path(media_root)
        if root.is_dir():
            for ann_path in sorted(root.glob(f"*/{ANNOTATIONS_FILE}")):
                fx.load_dir(ann_path.parent)
        return fx

    def load_dir(self, media_dir: Path | str) -> None:
        media_dir = Path(media_dir)
        ann_path = media_dir / ANNOTATIONS_FILE
        if not ann_path.exists():
            return
        with open(ann_path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        targets: dict = doc.get("targets", {})
        items: dict = doc.get("items", {})
        hashes = {p.name: payload_hash(load_payload_file(p)) for p in list_payload_files(media_dir)}
        for fname, per_target in items.items():
            h = hashes.get(fname)
            if h is None:
                continue
            bucket = self._by_hash.setdefault(h, {})
            for target, anns in per_target.items():
                meta = targets[target]
                task, kind = meta["task"], DataKind(meta["kind"])
                self._triples.add((task, target, kind))
                entries = bucket.setdefault(target, [])
                for a in anns:
                    payload = TabularPayload(list(a["columns"]), [list(r) for r in a["rows"]])
                    entries.append((task, payload, float(a.get("confidence", 1.0))))

    def supports(self, task: str, target: str, kind: DataKind) -> bool:
        return (task, target, kind) in self._triples

    def annotate(self, item: DataItem, target: str, params: dict, node_id: str) -> list[InferenceAnnotation]:
        entries = self._by_hash.get(payload_hash(item.data), {}).get(target, [])
        return [self._annotation(task, target, payload.copy(), conf) for task, payload, conf in entries]


class ProviderRegistry:
    """Ordered provider set; first supporting provider wins by default."""

    def __init__(self) -> None:
        self._providers: list[InferenceProvider] = []

    def register(self, provider: InferenceProvider) -> None:
        self._providers.append(provider)

    def resolve(self, task: str, target: str, kind: DataKind, explicit: str | None = None) -> InferenceProvider:
        if explicit is not None:
            for p in self._providers:
                if p.name == explicit:
                    if not p.supports(task, target, kind):
                        raise NoProviderRegistered(
                            f"provider {explicit!r} does not support {task} {target!r} on {kind.value}"
                        )
                    return p
            raise NoProviderRegistered(f"no provider named {explicit!r}")
        for p in self._providers:
            if p.supports(task, target, kind):
                return p
        raise NoProviderRegistered(f"no provider supports {task} {target!r} on {kind.value}")


def default_registry(media_root: Path | str | None = None) -> ProviderRegistry:
    """Reference providers plus fixture ground truth when media exists."""
    reg = ProviderRegistry()
    reg.register(ThresholdClassifier())
    reg.register(BrightnessExtractor())
    reg.register(AudioEnergyDetector())
    reg.register(TabularPredicateDetector())
    reg.register(TimeWindowClassifier())
    if media_root is not None:
        reg.register(FixtureAnnotator.from_media_root(media_root))
    return reg


__all__ = [
    "MS_PER_DAY",
    "NoProviderRegistered",
    "InferenceProvider",
    "ThresholdClassifier",
    "BrightnessExtractor",
    "AudioEnergyDetector",
    "TabularPredicateDetector",
    "TimeWindowClassifier",
    "FixtureAnnotator",
    "ProviderRegistry",
    "default_registry",
]
