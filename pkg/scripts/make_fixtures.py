"""Regenerate the committed fixture corpus.

Everything is derived from fixed seeds; running this twice produces
byte-identical files.  Media payloads are canonical payload JSON, one
file per frame/clip/recording, with ground-truth annotations recorded
alongside in annotations.json.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from privhub.fixio import save_payload_file
from privhub.manifest import parse_manifest, serialize_manifest, validate_manifest
from privhub.model import AudioPayload, ImagePayload, TabularPayload, VideoPayload, canonical_json

ROOT = Path(__file__).resolve().parents[1] / "fixtures"


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def gradient_image(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    base = rng.integers(40, 160, size=3)
    yy = np.linspace(0, 60, height)[:, None, None]
    xx = np.linspace(0, 30, width)[None, :, None]
    img = np.clip(base[None, None, :] + yy + xx, 0, 255)
    noise = rng.integers(-8, 9, size=(height, width, 3))
    return np.clip(img + noise, 0, 255).astype(np.uint8)


def draw_box(img: np.ndarray, x: int, y: int, w: int, h: int, color: tuple[int, int, int]) -> None:
    img[y : y + h, x : x + w] = color
    # darker rim so the region reads as a structure, not a smear
    img[y : y + h, x : x + 2] = tuple(c // 2 for c in color)
    img[y : y + 2, x : x + w] = tuple(c // 2 for c in color)


def image_payload(img: np.ndarray) -> ImagePayload:
    h, w, _ = img.shape
    return ImagePayload(w, h, img.tobytes())


def tone(rate: int, dur_ms: int, freq: float, amp: float) -> np.ndarray:
    t = np.arange(int(rate * dur_ms / 1000)) / rate
    return amp * np.sin(2 * math.pi * freq * t)


def silence(rng: np.random.Generator, rate: int, dur_ms: int) -> np.ndarray:
    n = int(rate * dur_ms / 1000)
    return rng.normal(0, 20, size=n)


def audio_payload(parts: list[np.ndarray], rate: int = 8000) -> AudioPayload:
    wave = np.concatenate(parts)
    return AudioPayload(rate, np.clip(wave, -32768, 32767).astype("<i2").tobytes())


def ann(columns: list[str], rows: list[list], confidence: float = 0.97) -> dict:
    return {"columns": columns, "rows": rows, "confidence": confidence}


def make_hall_camera() -> None:
    rng = np.random.default_rng(2201)
    d = ROOT / "media" / "hall-camera"
    items: dict = {}
    # faces on 6 of 10 frames; two frames carry two faces
    face_plan = {1: 1, 2: 1, 4: 2, 6: 1, 7: 2, 9: 1}
    for i in range(10):
        img = gradient_image(rng, 240, 180)
        anns = []
        for _ in range(face_plan.get(i, 0)):
            w, h = int(rng.integers(30, 44)), int(rng.integers(36, 52))
            x = int(rng.integers(8, 240 - w - 8))
            y = int(rng.integers(8, 180 - h - 8))
            draw_box(img, x, y, w, h, (205, 170, 140))
            anns.append(ann(["x", "y", "w", "h"], [[x, y, w, h]]))
        name = f"img-{i:02d}.json"
        save_payload_file(d / name, image_payload(img))
        if anns:
            items[name] = {"face": anns}
    write_json(
        d / "annotations.json",
        {"version": 1, "targets": {"face": {"task": "detect", "kind": "image"}}, "items": items},
    )
    write_json(d / "driver.json", {"push_period_ms": 600000})


def make_desk_camera() -> None:
    rng = np.random.default_rng(2202)
    d = ROOT / "media" / "desk-camera"
    items: dict = {}
    # person visible on 6 of 8; pose recognizable on 4 of those 6
    person_on = {0, 1, 3, 4, 6, 7}
    pose_on = {0, 3, 4, 7}
    for i in range(8):
        img = gradient_image(rng, 160, 120)
        entry: dict = {}
        if i in person_on:
            w, h = int(rng.integers(36, 52)), int(rng.integers(60, 86))
            x = int(rng.integers(4, 160 - w - 4))
            y = int(rng.integers(4, 120 - h - 4))
            draw_box(img, x, y, w, h, (90, 110, 200))
            entry["person"] = [ann(["x", "y", "w", "h"], [[x, y, w, h]])]
            if i in pose_on:
                joints = ["head", "shoulder", "elbow", "hip", "knee"]
                rows = [
                    [j, int(rng.integers(x, x + w)), int(rng.integers(y, y + h))]
                    for j in joints
                ]
                entry["pose"] = [ann(["joint", "x", "y"], rows, 0.92)]
        name = f"img-{i:02d}.json"
        save_payload_file(d / name, image_payload(img))
        if entry:
            items[name] = entry
    write_json(
        d / "annotations.json",
        {
            "version": 1,
            "targets": {
                "person": {"task": "detect", "kind": "image"},
                "pose": {"task": "extract", "kind": "image"},
            },
            "items": items,
        },
    )


def make_small_camera() -> None:
    rng = np.random.default_rng(2203)
    d = ROOT / "media" / "small-camera"
    items: dict = {}
    face_on = {1, 3, 4}
    for i in range(6):
        img = gradient_image(rng, 64, 48)
        entry: dict = {"floor": [ann(["x", "y", "w", "h"], [[0, 34, 64, 14]], 0.88)]}
        draw_box(img, 0, 34, 64, 14, (70, 60, 50))
        if i in face_on:
            w, h = int(rng.integers(12, 18)), int(rng.integers(14, 20))
            x = int(rng.integers(2, 64 - w - 2))
            y = int(rng.integers(2, 34 - h - 2))
            draw_box(img, x, y, w, h, (205, 170, 140))
            entry["face"] = [ann(["x", "y", "w", "h"], [[x, y, w, h]])]
        name = f"img-{i:02d}.json"
        save_payload_file(d / name, image_payload(img))
        items[name] = entry
    write_json(
        d / "annotations.json",
        {
            "version": 1,
            "targets": {
                "face": {"task": "detect", "kind": "image"},
                "floor": {"task": "detect", "kind": "image"},
            },
            "items": items,
        },
    )
    write_json(d / "driver.json", {"push_period_ms": 60000})


def make_nursery_mic() -> None:
    rng = np.random.default_rng(2204)
    d = ROOT / "media" / "nursery-mic"
    items: dict = {}
    crying_on = {0, 2, 5}
    for i in range(6):
        if i in crying_on:
            # wailing: strong modulated tone between silences
            parts = [
                silence(rng, 8000, 200),
                tone(8000, 700, 450 + 40 * math.sin(i), 3000) * (1 + 0.3 * np.sin(np.linspace(0, 20, 5600))),
                silence(rng, 8000, 200),
            ]
            items[f"aud-{i:02d}.json"] = {"crying": [ann(["category"], [["crying"]], 0.9)]}
        else:
            parts = [silence(rng, 8000, 400), tone(8000, 250, 200 + 15 * i, 400), silence(rng, 8000, 300)]
        save_payload_file(d / f"aud-{i:02d}.json", audio_payload(parts))
    write_json(
        d / "annotations.json",
        {"version": 1, "targets": {"crying": {"task": "classify", "kind": "audio"}}, "items": items},
    )
    write_json(d / "driver.json", {"push_period_ms": 300000})


def make_voice_mic() -> None:
    rng = np.random.default_rng(2205)
    d = ROOT / "media" / "voice-mic"
    for i in range(5):
        parts = [
            silence(rng, 8000, 240),
            tone(8000, 420 + 60 * i, 320 + 30 * i, 2800),
            silence(rng, 8000, 180),
            tone(8000, 360, 260 + 20 * i, 2500),
            silence(rng, 8000, 240),
        ]
        save_payload_file(d / f"aud-{i:02d}.json", audio_payload(parts))
    write_json(d / "driver.json", {"push_period_ms": 120000})


def make_porch_video() -> None:
    rng = np.random.default_rng(2206)
    d = ROOT / "media" / "porch-video"
    items: dict = {}
    for i in range(2):
        frames = []
        for f in range(6):
            img = gradient_image(rng, 64, 48)
            draw_box(img, 10 + 4 * f, 12, 16, 22, (120, 200, 120))
            frames.append(image_payload(img))
        name = f"vid-{i:02d}.json"
        save_payload_file(d / name, VideoPayload(4.0, frames))
        items[name] = {"heartrate": [ann(["bpm"], [[68.0 + 4 * i]], 0.8)]}
    write_json(
        d / "annotations.json",
        {"version": 1, "targets": {"heartrate": {"task": "extract", "kind": "video"}}, "items": items},
    )


def make_spoof_store() -> None:
    d = ROOT / "spoof"
    rng = np.random.default_rng(2207)
    checker = np.indices((48, 48)).sum(axis=0) % 2
    img1 = np.stack([checker * 180 + 40, checker * 120 + 60, np.full((48, 48), 90)], axis=-1).astype(np.uint8)
    save_payload_file(d / "synthetic-face-1.json", image_payload(img1))
    stripes = (np.indices((48, 48))[1] // 6 % 2).astype(np.uint8)
    img2 = np.stack([stripes * 140 + 50, np.full((48, 48), 110), stripes * 90 + 70], axis=-1).astype(np.uint8)
    save_payload_file(d / "synthetic-face-2.json", image_payload(img2))
    save_payload_file(d / "synthetic-audio-1.json", audio_payload([tone(8000, 250, 440, 2000)]))
    blank = gradient_image(rng, 64, 48)
    save_payload_file(d / "blank-room.json", image_payload(blank))


MANIFESTS = {
    "hello-visitor": {
        "meta": {
            "name": "HelloVisitor",
            "version": "1.2.0",
            "author": "acme-smart-home",
            "purpose": "Announce visitors at the front door",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://HelloVisitor.com"], "require_tls": True},
        "graph": [
            {
                "id": "door-cam",
                "kind": "push",
                "properties": {"device": "camera", "event": "motion", "datatype": "image"},
                "wires": ["find-faces"],
            },
            {
                "id": "find-faces",
                "kind": "detect",
                "properties": {"target": "face", "datatype": "image"},
                "wires": ["crop-faces"],
            },
            {
                "id": "crop-faces",
                "kind": "select",
                "properties": {"target": "face", "datatype": "image"},
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://HelloVisitor.com", "datatype": "image"},
                "wires": [],
            },
        ],
    },
    "water-leak": {
        "meta": {
            "name": "Water Leak Watch",
            "version": "1.0.2",
            "author": "acme-utilities",
            "purpose": "Spot floor moisture before it becomes damage",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "timer",
                "kind": "inject",
                "properties": {"mode": "interval", "interval_ms": 1800000},
                "wires": ["cam"],
            },
            {
                "id": "cam",
                "kind": "pull",
                "properties": {"device": "camera", "datatype": "image"},
                "wires": ["floor-d"],
            },
            {
                "id": "floor-d",
                "kind": "detect",
                "properties": {"target": "floor", "datatype": "image"},
                "wires": ["floor-crop"],
            },
            {
                "id": "floor-crop",
                "kind": "select",
                "properties": {"target": "floor", "datatype": "image"},
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "image"},
                "wires": [],
            },
        ],
    },
    "baby-monitor": {
        "meta": {
            "name": "Baby Monitor",
            "version": "0.9.1",
            "author": "acme-smart-home",
            "purpose": "Alert caregivers when the baby cries",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "mic",
                "kind": "push",
                "properties": {"device": "microphone", "event": "a noise", "datatype": "audio"},
                "wires": ["cry-class", "cry-gate"],
            },
            {
                "id": "cry-class",
                "kind": "classify",
                "properties": {"target": "crying", "datatype": "audio"},
                "wires": ["cry-flag"],
            },
            {
                "id": "cry-flag",
                "kind": "retrieve",
                "properties": {"target": "crying", "datatype": "audio", "when": "present"},
                "wires": ["cry-gate"],
            },
            {
                "id": "cry-gate",
                "kind": "join",
                "properties": {"mode": "blocking", "window_ms": 5000, "inputs_expected": 2},
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "audio"},
                "wires": [],
            },
        ],
    },
    "tv-usage": {
        "meta": {
            "name": "TV Time Report",
            "version": "2.0.0",
            "author": "acme-analytics",
            "purpose": "Weekly report of what categories get watched",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "every-week",
                "kind": "inject",
                "properties": {"mode": "interval", "interval_ms": 604800000},
                "wires": ["tv-log"],
            },
            {
                "id": "tv-log",
                "kind": "pull",
                "properties": {"device": "tv-log", "datatype": "tabular"},
                "wires": ["sum-usage"],
            },
            {
                "id": "sum-usage",
                "kind": "aggregate",
                "properties": {
                    "datatype": "tabular",
                    "function": "sum",
                    "group_by_field": "content category",
                    "value_field": "duration",
                },
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "tabular"},
                "wires": [],
            },
        ],
    },
    "voice-assistant": {
        "meta": {
            "name": "Voice Assistant",
            "version": "1.1.3",
            "author": "acme-voice",
            "purpose": "Answer questions without shipping raw voice prints",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "mic",
                "kind": "push",
                "properties": {"device": "microphone", "event": "a trigger phrase", "datatype": "audio"},
                "wires": ["find-speech"],
            },
            {
                "id": "find-speech",
                "kind": "detect",
                "properties": {"target": "speech", "datatype": "audio"},
                "wires": ["cut-speech"],
            },
            {
                "id": "cut-speech",
                "kind": "select",
                "properties": {"target": "speech", "datatype": "audio"},
                "wires": ["mask-voice"],
            },
            {
                "id": "mask-voice",
                "kind": "noisify",
                "properties": {"datatype": "audio", "magnitude_percent": 8, "seed": 11},
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "audio"},
                "wires": [],
            },
        ],
    },
    "productivity": {
        "meta": {
            "name": "Productivity Coach",
            "version": "0.5.0",
            "author": "acme-wellness",
            "purpose": "Track desk posture and presence twice an hour",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "timer",
                "kind": "inject",
                "properties": {"mode": "interval", "interval_ms": 1800000},
                "wires": ["cam"],
            },
            {
                "id": "cam",
                "kind": "pull",
                "properties": {"device": "camera", "datatype": "image"},
                "wires": ["pose-x"],
            },
            {
                "id": "pose-x",
                "kind": "extract",
                "properties": {"target": "pose", "datatype": "image"},
                "wires": ["pose-data", "person-d", "pose-miss"],
            },
            {
                "id": "pose-data",
                "kind": "retrieve",
                "properties": {"target": "pose", "datatype": "image", "when": "present"},
                "wires": ["upload-1"],
            },
            {
                "id": "person-d",
                "kind": "detect",
                "properties": {"target": "person", "datatype": "image"},
                "wires": ["person-crop"],
            },
            {
                "id": "person-crop",
                "kind": "select",
                "properties": {"target": "person", "datatype": "image"},
                "wires": ["gate"],
            },
            {
                "id": "pose-miss",
                "kind": "retrieve",
                "properties": {"target": "pose", "datatype": "image", "when": "absent"},
                "wires": ["gate"],
            },
            {
                "id": "gate",
                "kind": "join",
                "properties": {"mode": "blocking", "window_ms": 5000, "inputs_expected": 2},
                "wires": ["upload-2"],
            },
            {
                "id": "upload-1",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "tabular"},
                "wires": [],
            },
            {
                "id": "upload-2",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "image"},
                "wires": [],
            },
        ],
    },
    "humidity-monitor": {
        "meta": {
            "name": "Humidity Monitor",
            "version": "1.0.0",
            "author": "acme-climate",
            "purpose": "Report room humidity level twice an hour",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://www.abc.com"], "require_tls": True},
        "graph": [
            {
                "id": "timer",
                "kind": "inject",
                "properties": {"mode": "interval", "interval_ms": 1800000},
                "wires": ["sensor"],
            },
            {
                "id": "sensor",
                "kind": "pull",
                "properties": {"device": "humidity", "datatype": "scalar"},
                "wires": ["level"],
            },
            {
                "id": "level",
                "kind": "classify",
                "properties": {"target": "humidity-level", "datatype": "scalar", "params": {"threshold": 55}},
                "wires": ["report"],
            },
            {
                "id": "report",
                "kind": "retrieve",
                "properties": {"target": "humidity-level", "datatype": "scalar", "when": "present"},
                "wires": ["upload"],
            },
            {
                "id": "upload",
                "kind": "post",
                "properties": {"destination": "https://www.abc.com", "datatype": "tabular"},
                "wires": [],
            },
        ],
    },
}


def make_manifests() -> None:
    d = ROOT / "manifests"
    d.mkdir(parents=True, exist_ok=True)
    for name, doc in MANIFESTS.items():
        m = parse_manifest(canonical_json(doc))
        report = validate_manifest(m)
        if not report.ok:
            raise SystemExit(f"fixture manifest {name} invalid: {report.to_obj()}")
        (d / f"{name}.json").write_text(serialize_manifest(m), encoding="utf-8")


def main() -> None:
    make_hall_camera()
    make_desk_camera()
    make_small_camera()
    make_nursery_mic()
    make_voice_mic()
    make_porch_video()
    make_spoof_store()
    make_manifests()
    print(f"fixtures written under {ROOT}")


if __name__ == "__main__":
    main()
