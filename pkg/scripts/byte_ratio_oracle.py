"""Brute-force byte accounting for the face-crop minimization check.

Computes, straight from the shipped hall-camera fixtures and without
running any pipeline, the total outbound bytes of (a) shipping every
raw frame and (b) shipping one cropped image per recorded face box.
The test suite pins the two totals this prints.

Usage: python3 scripts/byte_ratio_oracle.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from privhub.fixio import list_payload_files, load_payload_file
from privhub.model import (
    ContentLabel,
    DataItem,
    DataKind,
    DeviceDescriptor,
    ImagePayload,
    InferenceAnnotation,
    ProvenanceTrail,
    TabularPayload,
    egress_item_size,
)

MEDIA = REPO / "fixtures" / "media" / "hall-camera"

# provenance never ships, so any trail gives the same byte counts
TRAIL = ProvenanceTrail(DeviceDescriptor("camera", "hall-camera", DataKind.IMAGE))


def crop(img: ImagePayload, x: int, y: int, w: int, h: int) -> ImagePayload:
    x0 = min(max(x, 0), img.width - 1)
    y0 = min(max(y, 0), img.height - 1)
    x1 = min(max(x + w, x0 + 1), img.width)
    y1 = min(max(y + h, y0 + 1), img.height)
    px = np.frombuffer(img.pixels, dtype=np.uint8).reshape(img.height, img.width, 3)
    return ImagePayload(x1 - x0, y1 - y0, px[y0:y1, x0:x1].tobytes())


def main() -> None:
    doc = json.loads((MEDIA / "annotations.json").read_text())
    raw_total = 0
    crop_total = 0
    n_frames = 0
    n_faces = 0
    for path in list_payload_files(MEDIA):
        payload = load_payload_file(path)
        n_frames += 1
        raw_total += egress_item_size(
            DataItem(payload.kind, ContentLabel("raw"), [], payload, TRAIL)
        )
        for ann in doc["items"].get(path.name, {}).get("face", []):
            cols, row = list(ann["columns"]), list(ann["rows"][0])
            box = {c: int(v) for c, v in zip(cols, row)}
            cropped = crop(payload, box["x"], box["y"], box["w"], box["h"])
            item = DataItem(
                cropped.kind,
                ContentLabel("face", "cropped"),
                [
                    InferenceAnnotation(
                        "fixture",
                        "detect",
                        ContentLabel("face"),
                        TabularPayload(cols, [list(r) for r in ann["rows"]]),
                        float(ann.get("confidence", 1.0)),
                    )
                ],
                cropped,
                TRAIL,
            )
            crop_total += egress_item_size(item)
            n_faces += 1

    print(f"frames:      {n_frames}")
    print(f"faces:       {n_faces}")
    print(f"raw bytes:   {raw_total}")
    print(f"crop bytes:  {crop_total}")
    print(f"ratio:       {crop_total / raw_total:.6f}")


if __name__ == "__main__":
    main()
