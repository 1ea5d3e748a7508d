"""Manifest rewriting: enforce user policies by editing the pipeline.

Rewrites are expressed as plans (data, not code) so they can be shown
as a diff before anything changes, then applied atomically: the new
manifest either revalidates cleanly or nothing happens.

Three policies ship here: rate limiting (slow an inject timer), time
scheduling (gate a network node on the wall clock via a blocking join),
and content-filter insertion (splice a filter after a chosen node).
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field

from .analyzer import infer_edge_types
from .manifest import (
    FILTER_KINDS,
    Manifest,
    NETWORK_KINDS,
    NodeSpec,
    ValidationReport,
    serialize_manifest,
    validate_manifest,
)
from .model import DataKind, PrivHubError
from .providers import MS_PER_DAY

SCHEDULE_TICK_MS = 60_000


class RewriteError(PrivHubError):
    pass


class NotAnInjectNode(RewriteError):
    pass


class WouldIncreaseRate(RewriteError):
    pass


class NotANetworkNode(RewriteError):
    pass


class TypeMismatchAtSplice(RewriteError):
    """Inserting the filter there would kill the flow entirely."""


class UnsupportedFilterKind(RewriteError):
    pass


class RewriteInvalid(RewriteError):
    """The rewritten manifest failed validation; nothing was applied."""

    def __init__(self, report: ValidationReport):
        self.report = report
        problems = "; ".join(i.message for i in report.errors[:3])
        super().__init__(f"rewrite produced an invalid manifest: {problems}")


@dataclass(frozen=True)
class SetProperty:
    node: str
    key: str
    value: object

    def to_obj(self) -> dict:
        return {"op": "set_property", "node": self.node, "key": self.key, "value": self.value}


@dataclass(frozen=True)
class InsertNodes:
    nodes: tuple[NodeSpec, ...]
    remove_wires: tuple[tuple[str, str], ...] = ()
    add_wires: tuple[tuple[str, str], ...] = ()

    def to_obj(self) -> dict:
        return {
            "op": "insert_nodes",
            "nodes": [n.to_obj() for n in self.nodes],
            "remove_wires": [list(w) for w in self.remove_wires],
            "add_wires": [list(w) for w in self.add_wires],
        }


@dataclass
class RewritePlan:
    note: str
    steps: list = field(default_factory=list)

    @property
    def is_identity(self) -> bool:
        return not self.steps

    def to_obj(self) -> dict:
        return {"note": self.note, "steps": [s.to_obj() for s in self.steps]}


def apply_plan(manifest: Manifest, plan: RewritePlan) -> Manifest:
    """Apply a plan to a copy and revalidate; raises RewriteInvalid on
    any error so a bad plan can never corrupt an installed app."""
    out = manifest.copy()
    nodes = out.nodes_by_id()
    for step in plan.steps:
        if isinstance(step, SetProperty):
            if step.node not in nodes:
                raise RewriteError(f"plan edits unknown node {step.node!r}")
            nodes[step.node].properties[step.key] = step.value
        elif isinstance(step, InsertNodes):
            for n in step.nodes:
                if n.id in nodes:
                    raise RewriteError(f"plan inserts duplicate node id {n.id!r}")
                copy = n.copy()
                out.graph.append(copy)
                nodes[copy.id] = copy
            for src, dst in step.remove_wires:
                if src in nodes and dst in nodes[src].wires:
                    nodes[src].wires.remove(dst)
            for src, dst in step.add_wires:
                if src not in nodes:
                    raise RewriteError(f"plan wires unknown node {src!r}")
                if dst not in nodes[src].wires:
                    nodes[src].wires.append(dst)
        else:
            raise RewriteError(f"unknown plan step: {step!r}")
    report = validate_manifest(out)
    if not report.ok:
        raise RewriteInvalid(report)
    return out


def manifest_diff(old: Manifest, new: Manifest) -> str:
    """Unified diff of canonical serializations; small edits stay small."""
    return "".join(
        difflib.unified_diff(
            serialize_manifest(old).splitlines(keepends=True),
            serialize_manifest(new).splitlines(keepends=True),
            fromfile="manifest.json (current)",
            tofile="manifest.json (rewritten)",
        )
    )


def _fresh_id(manifest: Manifest, base: str) -> str:
    taken = {n.id for n in manifest.graph}
    if base not in taken:
        return base
    i = 2
    while f"{base}-{i}" in taken:
        i += 1
    return f"{base}-{i}"


def plan_rate_limit(manifest: Manifest, node_id: str, interval_ms: int) -> RewritePlan:
    """Slow down an interval inject; never speeds one up."""
    try:
        node = manifest.node(node_id)
    except KeyError:
        raise NotAnInjectNode(f"no node {node_id!r}") from None
    if node.kind != "inject" or node.properties.get("mode") != "interval":
        raise NotAnInjectNode(f"node {node_id!r} is not an interval inject")
    current = int(node.properties["interval_ms"])
    if interval_ms < current:
        raise WouldIncreaseRate(f"{interval_ms} ms is more frequent than the current {current} ms")
    if interval_ms == current:
        return RewritePlan(note=f"rate limit: {node_id} already at {interval_ms} ms")
    return RewritePlan(
        note=f"rate limit: {node_id} interval {current} -> {interval_ms} ms",
        steps=[SetProperty(node_id, "interval_ms", int(interval_ms))],
    )


def normalize_windows(windows: list) -> list[tuple[int, int]]:
    """Clamp to one day, split wrap-arounds, merge overlaps."""
    flat: list[tuple[int, int]] = []
    for w in windows:
        start, end = int(w[0]), int(w[1])
        if not (0 <= start <= MS_PER_DAY and 0 <= end <= MS_PER_DAY):
            raise RewriteError(f"window {w!r} outside a day (0..{MS_PER_DAY} ms)")
        if start == end:
            continue
        if start < end:
            flat.append((start, end))
        else:
            flat.append((start, MS_PER_DAY))
            flat.append((0, end))
    flat.sort()
    merged: list[tuple[int, int]] = []
    for start, end in flat:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _widened(windows: list[tuple[int, int]], margin: int) -> list[list[int]]:
    """Pull each window start earlier by the join window so a tick just
    before the boundary can never smuggle an egress into it."""
    out = []
    for start, end in windows:
        s = start - margin
        if s < 0:
            s += MS_PER_DAY
        out.append([s, end])
    return out


def plan_time_schedule(manifest: Manifest, network_node: str, blocked_windows: list) -> RewritePlan:
    """Gate a network node: no egress during the blocked windows.

    Splices a clock branch (inject -> pull clock -> classify -> retrieve)
    into a blocking join before the network node.  The join only fires
    when the clock branch produced an allowed-time flag within the last
    minute, so egress timestamps never land inside a blocked window.
    """
    try:
        node = manifest.node(network_node)
    except KeyError:
        raise NotANetworkNode(f"no node {network_node!r}") from None
    if node.kind not in NETWORK_KINDS:
        raise NotANetworkNode(f"node {network_node!r} is {node.kind}, not a network node")
    windows = normalize_windows(blocked_windows)
    if not windows:
        return RewritePlan(note=f"schedule: {network_node} has no blocked windows")
    parents = manifest.incoming(network_node)
    if len(parents) != 1:
        raise RewriteError(f"network node {network_node!r} must have exactly one input")
    parent = parents[0]

    tick = _fresh_id(manifest, "sched-tick")
    clock = _fresh_id(manifest, "sched-clock")
    allow = _fresh_id(manifest, "sched-allow")
    flag = _fresh_id(manifest, "sched-flag")
    gate = _fresh_id(manifest, "sched-gate")
    nodes = (
        NodeSpec(tick, "inject", {"mode": "interval", "interval_ms": SCHEDULE_TICK_MS}, [clock]),
        NodeSpec(clock, "pull", {"device": "clock", "datatype": "scalar"}, [allow]),
        NodeSpec(
            allow,
            "classify",
            {
                "target": "allowed-time",
                "datatype": "scalar",
                "provider": "time-window",
                "params": {"blocked_windows": _widened(windows, SCHEDULE_TICK_MS)},
            },
            [flag],
        ),
        NodeSpec(flag, "retrieve", {"target": "allowed-time", "datatype": "scalar", "when": "present"}, [gate]),
        NodeSpec(
            gate,
            "join",
            {"mode": "blocking", "window_ms": SCHEDULE_TICK_MS, "inputs_expected": 2},
            [network_node],
        ),
    )
    pretty = ", ".join(f"{s}..{e}" for s, e in windows)
    return RewritePlan(
        note=f"schedule: {network_node} blocked during [{pretty}] ms of day",
        steps=[
            InsertNodes(
                nodes=nodes,
                remove_wires=((parent, network_node),),
                add_wires=((parent, gate),),
            )
        ],
    )


def plan_content_filter(manifest: Manifest, after_node: str, filter_kind: str, properties: dict) -> RewritePlan:
    """Splice a filter onto every outgoing wire of a node.

    Refused when no content of the filter's datatype can flow there;
    that insert would silently kill the app instead of protecting it.
    """
    if filter_kind not in FILTER_KINDS:
        raise UnsupportedFilterKind(f"{filter_kind!r} is not a filter operator")
    try:
        node = manifest.node(after_node)
    except KeyError:
        raise RewriteError(f"no node {after_node!r}") from None
    if not node.wires:
        raise RewriteError(f"node {after_node!r} has no outgoing wires to splice")
    want = properties.get("datatype")
    if want is not None:
        analysis = infer_edge_types(manifest)
        pairs = []
        for dst in sorted(node.wires):
            pairs.extend(analysis.edge_pairs(after_node, dst))
        if not any(p.kind == DataKind(want) for p in pairs):
            raise TypeMismatchAtSplice(
                f"no {want} content flows out of {after_node!r}; the filter would drop everything"
            )
    new_id = _fresh_id(manifest, f"{filter_kind}-guard")
    targets = sorted(node.wires)
    return RewritePlan(
        note=f"insert {filter_kind} after {after_node}",
        steps=[
            InsertNodes(
                nodes=(NodeSpec(new_id, filter_kind, dict(properties), list(targets)),),
                remove_wires=tuple((after_node, t) for t in targets),
                add_wires=((after_node, new_id),),
            )
        ],
    )


__all__ = [
    "SCHEDULE_TICK_MS",
    "RewriteError",
    "NotAnInjectNode",
    "WouldIncreaseRate",
    "NotANetworkNode",
    "TypeMismatchAtSplice",
    "UnsupportedFilterKind",
    "RewriteInvalid",
    "SetProperty",
    "InsertNodes",
    "RewritePlan",
    "apply_plan",
    "manifest_diff",
    "normalize_windows",
    "plan_rate_limit",
    "plan_time_schedule",
    "plan_content_filter",
]
