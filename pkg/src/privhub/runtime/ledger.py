"""Append-only egress ledger.

Every attempt to move data off the hub lands here, sent or blocked,
one NDJSON line per (attempt, content class).  A reverse index keyed by
(app, content, day) makes "what left my home this week" queries cheap;
it is rebuilt from the log on open, so the log is the only truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..model import canonical_json

MS_PER_DAY = 24 * 60 * 60 * 1000

_GROUP_KEYS = {
    "app": lambda r: r.app,
    "content": lambda r: f"{r.content} {r.kind}",
    "node": lambda r: r.node,
    "dest": lambda r: r.dest,
    "day": lambda r: r.ts // MS_PER_DAY,
}


@dataclass(frozen=True)
class EgressRecord:
    """One ledger line; ``content`` is the user-facing content class."""

    ts: int
    app: str
    node: str
    dest: str
    content: str
    kind: str
    items: int
    bytes: int
    blocked: bool
    reason: str = ""

    def to_obj(self) -> dict:
        return {
            "ts": self.ts,
            "app": self.app,
            "node": self.node,
            "dest": self.dest,
            "content": self.content,
            "kind": self.kind,
            "items": self.items,
            "bytes": self.bytes,
            "blocked": self.blocked,
            "reason": self.reason,
        }

    @staticmethod
    def from_obj(obj: dict) -> EgressRecord:
        return EgressRecord(
            ts=int(obj["ts"]),
            app=obj["app"],
            node=obj["node"],
            dest=obj["dest"],
            content=obj["content"],
            kind=obj["kind"],
            items=int(obj["items"]),
            bytes=int(obj["bytes"]),
            blocked=bool(obj["blocked"]),
            reason=obj.get("reason", ""),
        )


class EgressLedger:
    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._records: list[EgressRecord] = []
        # (app, "content kind", day) -> {items, bytes, blocked_items}
        self._index: dict[tuple[str, str, int], dict[str, int]] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if line:
                        self._remember(EgressRecord.from_obj(json.loads(line)))
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def _remember(self, record: EgressRecord) -> None:
        self._records.append(record)
        key = (record.app, f"{record.content} {record.kind}", record.ts // MS_PER_DAY)
        slot = self._index.setdefault(key, {"items": 0, "bytes": 0, "blocked_items": 0})
        if record.blocked:
            slot["blocked_items"] += record.items
        else:
            slot["items"] += record.items
            slot["bytes"] += record.bytes

    def append(self, record: EgressRecord) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(canonical_json(record.to_obj()))
            f.write("\n")
        self._remember(record)

    @property
    def records(self) -> list[EgressRecord]:
        return list(self._records)

    def _select(
        self,
        app: str | None = None,
        content: str | None = None,
        ts_from: int | None = None,
        ts_to: int | None = None,
        node: str | None = None,
    ) -> list[EgressRecord]:
        out = []
        for r in self._records:
            if app is not None and r.app != app:
                continue
            if content is not None and f"{r.content} {r.kind}" != content and r.content != content:
                continue
            if node is not None and r.node != node:
                continue
            if ts_from is not None and r.ts < ts_from:
                continue
            if ts_to is not None and r.ts >= ts_to:
                continue
            out.append(r)
        return out

    def query(
        self,
        app: str | None = None,
        content: str | None = None,
        ts_from: int | None = None,
        ts_to: int | None = None,
        node: str | None = None,
        group_by: str | None = None,
    ) -> list[dict]:
        """Aggregate matching records; one row per group (or one total row).

        ``content`` matches either the bare content class ("face") or the
        permission-style display with the kind appended ("face image").
        """
        matches = self._select(app, content, ts_from, ts_to, node)
        if group_by is None:
            groups: dict = {None: matches}
        elif group_by in _GROUP_KEYS:
            keyfn = _GROUP_KEYS[group_by]
            groups = {}
            for r in matches:
                groups.setdefault(keyfn(r), []).append(r)
        else:
            raise ValueError(f"unknown group_by: {group_by!r}")

        rows = []
        for key in sorted(groups, key=lambda k: str(k)):
            rs = groups[key]
            row = {
                "items": sum(r.items for r in rs if not r.blocked),
                "bytes": sum(r.bytes for r in rs if not r.blocked),
                "blocked_items": sum(r.items for r in rs if r.blocked),
            }
            if group_by is not None:
                row[group_by] = key
            rows.append(row)
        return rows

    def rows_for_label(self, app: str) -> list[dict]:
        """Per (node, content, kind) aggregates for the nutrition label."""
        acc: dict[tuple[str, str, str], dict] = {}
        for r in self._select(app=app):
            slot = acc.setdefault((r.node, r.content, r.kind), {"items": 0, "bytes": 0, "blocked_items": 0})
            if r.blocked:
                slot["blocked_items"] += r.items
            else:
                slot["items"] += r.items
                slot["bytes"] += r.bytes
        return [
            {"node": node, "content": content, "kind": kind, **vals}
            for (node, content, kind), vals in sorted(acc.items())
        ]

    def verify_consistency(self) -> bool:
        """Records and reverse index must agree; sums over both match."""
        rebuilt: dict[tuple[str, str, int], dict[str, int]] = {}
        for r in self._records:
            key = (r.app, f"{r.content} {r.kind}", r.ts // MS_PER_DAY)
            slot = rebuilt.setdefault(key, {"items": 0, "bytes": 0, "blocked_items": 0})
            if r.blocked:
                slot["blocked_items"] += r.items
            else:
                slot["items"] += r.items
                slot["bytes"] += r.bytes
        return rebuilt == self._index


__all__ = ["EgressRecord", "EgressLedger", "MS_PER_DAY"]
