"""Payload files on disk.

Fixture media ships as canonical payload JSON (one payload object per
file) so replaying a device is just reading files in name order.  The
same format backs spoof replacement stores.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .model import Payload, canonical_bytes, canonical_json, payload_from_obj

ANNOTATIONS_FILE = "annotations.json"
DRIVER_FILE = "driver.json"


def load_payload_file(path: Path | str) -> Payload:
    with open(path, "r", encoding="utf-8") as f:
        return payload_from_obj(json.load(f))


def save_payload_file(path: Path | str, payload: Payload) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_json(payload.to_obj()))
        f.write("\n")


def payload_hash(payload: Payload) -> str:
    """Stable identity of a payload's canonical bytes."""
    return hashlib.sha256(canonical_bytes(payload.to_obj())).hexdigest()


def list_payload_files(media_dir: Path | str) -> list[Path]:
    d = Path(media_dir)
    return sorted(p for p in d.glob("*.json") if p.name not in (ANNOTATIONS_FILE, DRIVER_FILE))
