import math

import numpy as np
import pytest

from conftest import FIXTURES
from privhub.fixio import load_payload_file
from privhub.model import (
    AudioPayload,
    ContentLabel,
    DataKind,
    DeviceDescriptor,
    ImagePayload,
    ScalarPayload,
    TabularPayload,
    make_raw_item,
)
from privhub.providers import (
    MS_PER_DAY,
    AudioEnergyDetector,
    BrightnessExtractor,
    FixtureAnnotator,
    NoProviderRegistered,
    TabularPredicateDetector,
    ThresholdClassifier,
    TimeWindowClassifier,
    default_registry,
)


def item_for(payload):
    return make_raw_item(DeviceDescriptor("dev", "test", payload.kind), payload)


def tone(rate, dur_ms, freq, amp):
    t = np.arange(int(rate * dur_ms / 1000)) / rate
    return amp * np.sin(2 * math.pi * freq * t)


def audio(parts, rate=8000):
    wave = np.concatenate(parts)
    return AudioPayload(rate, np.clip(wave, -32768, 32767).astype("<i2").tobytes())


class TestThresholdClassifier:
    @pytest.mark.parametrize("value,expected", [(51.0, "above"), (50.0, "below"), (49.9, "below")])
    def test_boundary(self, value, expected):
        anns = ThresholdClassifier().annotate(
            item_for(ScalarPayload(value, "%")), "level", {"threshold": 50}, "n1"
        )
        assert len(anns) == 1
        assert anns[0].payload.rows == [[expected]]
        assert anns[0].target == ContentLabel("level")


class TestBrightnessExtractor:
    def test_white_image(self):
        img = ImagePayload(2, 2, b"\xff" * 12)
        anns = BrightnessExtractor().annotate(item_for(img), "brightness", {}, "n1")
        assert anns[0].payload.columns == ["brightness"]
        assert anns[0].payload.rows[0][0] == pytest.approx(255.0, abs=0.5)

    def test_black_image(self):
        img = ImagePayload(2, 2, b"\x00" * 12)
        anns = BrightnessExtractor().annotate(item_for(img), "brightness", {}, "n1")
        assert anns[0].payload.rows[0][0] == 0.0


class TestAudioEnergyDetector:
    def test_silence_has_no_windows(self):
        p = audio([np.zeros(8000)])
        assert AudioEnergyDetector().annotate(item_for(p), "speech", {}, "n1") == []

    def test_single_burst_window(self):
        p = audio([np.zeros(2400), tone(8000, 300, 400, 3000), np.zeros(2400)])
        anns = AudioEnergyDetector().annotate(item_for(p), "speech", {}, "n1")
        assert len(anns) == 1
        (start, end), = anns[0].payload.rows
        assert start == 300 and end == 600

    def test_two_bursts_two_windows(self):
        p = audio([tone(8000, 150, 400, 3000), np.zeros(2400), tone(8000, 150, 500, 3000)])
        anns = AudioEnergyDetector().annotate(item_for(p), "speech", {}, "n1")
        assert len(anns) == 2


class TestTabularPredicateDetector:
    TABLE = TabularPayload(["name", "duration"], [["news", 40], ["kids", 10], ["film", 90]])

    def test_projection_and_filtering(self):
        anns = TabularPredicateDetector().annotate(
            item_for(self.TABLE.copy()),
            "long-watch",
            {"field": "duration", "op": ">", "value": 30, "project": ["name"]},
            "n1",
        )
        assert anns[0].payload.columns == ["name"]
        assert anns[0].payload.rows == [["news"], ["film"]]

    def test_no_match_no_annotation(self):
        anns = TabularPredicateDetector().annotate(
            item_for(self.TABLE.copy()), "t", {"field": "duration", "op": ">", "value": 1000}, "n1"
        )
        assert anns == []

    def test_missing_field_no_annotation(self):
        anns = TabularPredicateDetector().annotate(
            item_for(self.TABLE.copy()), "t", {"field": "nope", "op": "==", "value": 1}, "n1"
        )
        assert anns == []

    def test_mixed_type_comparison_is_false(self):
        table = TabularPayload(["v"], [["abc"], [5]])
        anns = TabularPredicateDetector().annotate(
            item_for(table), "t", {"field": "v", "op": ">", "value": 3}, "n1"
        )
        assert anns[0].payload.rows == [[5]]


class TestTimeWindowClassifier:
    WINDOWS = {"blocked_windows": [[8 * 3600000, 18 * 3600000]]}

    def clock_item(self, ms):
        return item_for(ScalarPayload(float(ms), "ms"))

    def test_inside_window_suppressed(self):
        assert TimeWindowClassifier().annotate(self.clock_item(12 * 3600000), "ok", self.WINDOWS, "n") == []

    def test_outside_window_annotated(self):
        anns = TimeWindowClassifier().annotate(self.clock_item(20 * 3600000), "ok", self.WINDOWS, "n")
        assert anns[0].payload.rows == [["allowed"]]

    def test_boundaries(self):
        c = TimeWindowClassifier()
        assert c.annotate(self.clock_item(8 * 3600000), "ok", self.WINDOWS, "n") == []
        assert c.annotate(self.clock_item(18 * 3600000), "ok", self.WINDOWS, "n") != []

    def test_wraparound_window(self):
        params = {"blocked_windows": [[22 * 3600000, 6 * 3600000]]}
        c = TimeWindowClassifier()
        assert c.annotate(self.clock_item(23 * 3600000), "ok", params, "n") == []
        assert c.annotate(self.clock_item(MS_PER_DAY + 3 * 3600000), "ok", params, "n") == []
        assert c.annotate(self.clock_item(12 * 3600000), "ok", params, "n") != []


class TestFixtureAnnotator:
    def test_known_payload_annotated(self):
        ann = FixtureAnnotator.from_media_root(FIXTURES / "media")
        payload = load_payload_file(FIXTURES / "media" / "hall-camera" / "img-01.json")
        anns = ann.annotate(item_for(payload), "face", {}, "n1")
        assert len(anns) == 1
        assert anns[0].payload.columns == ["x", "y", "w", "h"]

    def test_modified_payload_not_annotated(self):
        ann = FixtureAnnotator.from_media_root(FIXTURES / "media")
        payload = load_payload_file(FIXTURES / "media" / "hall-camera" / "img-01.json")
        pixels = bytearray(payload.pixels)
        pixels[0] ^= 0xFF
        changed = ImagePayload(payload.width, payload.height, bytes(pixels))
        assert ann.annotate(item_for(changed), "face", {}, "n1") == []

    def test_supports_only_recorded_targets(self):
        ann = FixtureAnnotator.from_media_root(FIXTURES / "media")
        assert ann.supports("detect", "face", DataKind.IMAGE)
        assert ann.supports("extract", "pose", DataKind.IMAGE)
        assert not ann.supports("detect", "unicorn", DataKind.IMAGE)


class TestRegistry:
    def test_first_supporting_wins(self):
        reg = default_registry(FIXTURES / "media")
        assert reg.resolve("classify", "anything", DataKind.SCALAR).name == "threshold"

    def test_explicit_name_overrides_order(self):
        reg = default_registry(FIXTURES / "media")
        assert reg.resolve("classify", "x", DataKind.SCALAR, explicit="time-window").name == "time-window"

    def test_explicit_name_must_support(self):
        reg = default_registry(FIXTURES / "media")
        with pytest.raises(NoProviderRegistered):
            reg.resolve("detect", "face", DataKind.IMAGE, explicit="threshold")

    def test_unknown_name(self):
        reg = default_registry()
        with pytest.raises(NoProviderRegistered):
            reg.resolve("classify", "x", DataKind.SCALAR, explicit="ghost")

    def test_nothing_supports(self):
        reg = default_registry()
        with pytest.raises(NoProviderRegistered):
            reg.resolve("detect", "face", DataKind.IMAGE)
