"""Static analysis of manifests: what content can reach the network.

Works purely on the graph, before anything runs.  A forward pass in
topological order annotates every edge with the set of (content label,
data kind) pairs that can flow across it; network nodes then turn their
incoming pairs into egress permissions, and a template pass renders the
same facts as one-sentence privacy descriptions and a nutrition label.

The per-operator transfer rules live in a table so tests can swap or
extend them; the shipped table mirrors the runtime semantics and must
stay a sound over-approximation of them (every pair observed at runtime
on an edge is listed on that edge).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .manifest import FILTER_KINDS, Manifest, NETWORK_KINDS, NodeSpec, manifest_hash, topological_order
from .model import ContentLabel, DataKind

MS_UNITS = [
    ("week", 7 * 24 * 60 * 60 * 1000),
    ("day", 24 * 60 * 60 * 1000),
    ("hour", 60 * 60 * 1000),
    ("minute", 60 * 1000),
    ("second", 1000),
]

# Qualifiers that matter to a user reading a permission; the rest
# (cropped, extracted, none) describe mechanics, not sensitivity class.
_SHOWN_QUALIFIERS = ("anonymized", "spoofed", "aggregated")


@dataclass(frozen=True)
class TypePair:
    """One possible (content, kind) of items on an edge."""

    content: ContentLabel
    kind: DataKind

    def to_obj(self) -> dict:
        return {"content": self.content.to_obj(), "kind": self.kind.value}


@dataclass
class EdgeTypeAnnotation:
    edge: tuple[str, str]
    pairs: list[TypePair]
    # inference results known to ride along: (task, target label)
    available: frozenset[tuple[str, str]]

    def to_obj(self) -> dict:
        return {
            "edge": list(self.edge),
            "pairs": [p.to_obj() for p in self.pairs],
            "available": sorted(list(t) for t in self.available),
        }


@dataclass
class TypeAnalysis:
    manifest_hash: str
    order: list[str]
    edges: dict[tuple[str, str], EdgeTypeAnnotation]
    node_inputs: dict[str, list[TypePair]]
    warnings: list[str] = field(default_factory=list)

    def edge_pairs(self, src: str, dst: str) -> list[TypePair]:
        ann = self.edges.get((src, dst))
        return list(ann.pairs) if ann else []


def _dedup(pairs: list[TypePair]) -> list[TypePair]:
    seen: set[TypePair] = set()
    out: list[TypePair] = []
    for p in pairs:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _rule_provider(node: NodeSpec, pairs, available):
    # Fresh data from a device; whatever triggered the provider does not
    # continue downstream.
    kind = DataKind(node.properties["datatype"])
    return [TypePair(ContentLabel("raw"), kind)], frozenset()


def _rule_inject(node: NodeSpec, pairs, available):
    return [TypePair(ContentLabel("trigger"), DataKind.SCALAR)], frozenset()


def _rule_inference(node: NodeSpec, pairs, available):
    return list(pairs), available | {(node.kind, node.properties["target"])}


def _rule_select(node: NodeSpec, pairs, available):
    want = DataKind(node.properties["datatype"])
    target = node.properties["target"]
    out = [TypePair(ContentLabel(target, "cropped"), p.kind) for p in pairs if p.kind == want]
    return out, available


def _rule_retrieve(node: NodeSpec, pairs, available):
    want = DataKind(node.properties["datatype"])
    if not any(p.kind == want for p in pairs):
        return [], available
    target = node.properties["target"]
    return [TypePair(ContentLabel(target, "extracted"), DataKind.TABULAR)], available


def _rule_aggregate(node: NodeSpec, pairs, available):
    want = DataKind(node.properties["datatype"])
    out = [TypePair(p.content.with_qualifier("aggregated"), want) for p in pairs if p.kind == want]
    return out, available


def _requalify(qualifier: str):
    def rule(node: NodeSpec, pairs, available):
        want = DataKind(node.properties["datatype"])
        out = [TypePair(p.content.with_qualifier(qualifier), p.kind) for p in pairs if p.kind == want]
        return out, available

    return rule


def _rule_identity(node: NodeSpec, pairs, available):
    return list(pairs), available


DEFAULT_TYPE_RULES = {
    "push": _rule_provider,
    "pull": _rule_provider,
    "inject": _rule_inject,
    "detect": _rule_inference,
    "classify": _rule_inference,
    "extract": _rule_inference,
    "select": _rule_select,
    "retrieve": _rule_retrieve,
    "aggregate": _rule_aggregate,
    "noisify": _requalify("anonymized"),
    "spoof": _requalify("spoofed"),
    "join": _rule_identity,
    "debug": _rule_identity,
    "post": _rule_identity,
    "publish": _rule_identity,
    "stream": _rule_identity,
}

TypeRuleTable = dict


def infer_edge_types(manifest: Manifest, rules: TypeRuleTable | None = None) -> TypeAnalysis:
    """Forward dataflow pass annotating every edge with possible pairs.

    Join inputs concatenate in port order (sorted source ids); all other
    multi-input shapes are validation errors and get a best-effort
    concatenation here too.
    """
    rules = rules or DEFAULT_TYPE_RULES
    order = topological_order(manifest)
    nodes = manifest.nodes_by_id()
    edges: dict[tuple[str, str], EdgeTypeAnnotation] = {}
    node_inputs: dict[str, list[TypePair]] = {}
    warnings: list[str] = []

    for nid in order:
        node = nodes[nid]
        in_pairs: list[TypePair] = []
        in_available: frozenset[tuple[str, str]] = frozenset()
        for src in manifest.incoming(nid):
            ann = edges.get((src, nid))
            if ann is None:
                continue
            in_pairs.extend(ann.pairs)
            in_available = in_available | ann.available
        node_inputs[nid] = _dedup(in_pairs)

        out_pairs, out_available = rules[node.kind](node, node_inputs[nid], in_available)
        out_pairs = _dedup(out_pairs)
        if not out_pairs and node.wires:
            warnings.append(f"no data can flow out of node {nid!r}")
        for dst in sorted(node.wires):
            edges[(nid, dst)] = EdgeTypeAnnotation((nid, dst), list(out_pairs), out_available)

    return TypeAnalysis(manifest_hash(manifest), order, edges, node_inputs, warnings)


def content_display(content: ContentLabel) -> str:
    """User-facing name of a content class, without the data kind."""
    if content.qualifier in _SHOWN_QUALIFIERS:
        return f"{content.qualifier} {content.label}"
    return content.label


def permission_display(content: ContentLabel, kind: DataKind) -> str:
    return f"{content_display(content)} {kind.value}"


@dataclass(frozen=True)
class EgressPermission:
    """One grantable unit: this content class may go to this destination."""

    network_node: str
    content: ContentLabel
    kind: DataKind
    destination: str

    @property
    def id(self) -> str:
        return f"{self.network_node}|{self.content.label}|{self.content.qualifier}|{self.kind.value}"

    @property
    def display(self) -> str:
        return permission_display(self.content, self.kind)

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "network_node": self.network_node,
            "content": self.content.to_obj(),
            "kind": self.kind.value,
            "destination": self.destination,
            "display": self.display,
        }


def derive_egress_permissions(manifest: Manifest, analysis: TypeAnalysis) -> list[EgressPermission]:
    """Permissions a user must grant: per network node, the incoming
    pairs that match the node's declared datatype (others never leave)."""
    perms: list[EgressPermission] = []
    for node in sorted(manifest.graph, key=lambda n: n.id):
        if node.kind not in NETWORK_KINDS:
            continue
        want = DataKind(node.properties["datatype"])
        dest = node.properties["destination"]
        for pair in analysis.node_inputs.get(node.id, []):
            if pair.kind == want:
                perms.append(EgressPermission(node.id, pair.content, pair.kind, dest))
    return perms


def interval_phrase(interval_ms: int) -> str:
    for unit, ms in MS_UNITS:
        if interval_ms % ms == 0:
            qty = interval_ms // ms
            return unit if qty == 1 else f"{qty} {unit}s"
    return f"{interval_ms} ms"


def destination_display(destination: str) -> str:
    host = destination.split("://", 1)[-1]
    return host.split("/", 1)[0]


def _plural(word: str) -> str:
    if word.endswith(("s", "ch", "sh", "x", "z")):
        return word + "es"
    return word + "s"


_RAW_PHRASES = {
    DataKind.IMAGE: "raw images",
    DataKind.VIDEO: "raw videos",
    DataKind.AUDIO: "raw audio",
    DataKind.TABULAR: "raw records",
    DataKind.SCALAR: "raw readings",
}


@dataclass
class PrivacyDescription:
    """One rendered sentence about one outbound flow."""

    network_node: str
    trigger: str
    content: str
    destination: str
    condition: str | None
    rendered: str
    content_pair: TypePair | None = None
    warnings: list[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "network_node": self.network_node,
            "trigger": self.trigger,
            "content": self.content,
            "destination": self.destination,
            "condition": self.condition,
            "rendered": self.rendered,
            "warnings": list(self.warnings),
        }


def _render(trigger: str, content: str, destination: str, condition: str | None) -> str:
    sentence = f"{trigger}, the app sends {content} to {destination}"
    if condition:
        sentence += f" if {condition}"
    return sentence + "."


@dataclass
class _Walk:
    """Upstream walk bookkeeping for one description context."""

    spine: list[str] = field(default_factory=list)
    condition_branches: list[str] = field(default_factory=list)  # node feeding a blocking join
    warnings: list[str] = field(default_factory=list)


def _upstream_inference(manifest: Manifest, start: str, target: str) -> NodeSpec | None:
    """Nearest inference node for a target, walking single inputs up."""
    nodes = manifest.nodes_by_id()
    cur = start
    for _ in range(len(nodes) + 1):
        node = nodes[cur]
        if node.kind in ("detect", "classify", "extract") and node.properties.get("target") == target:
            return node
        sources = manifest.incoming(cur)
        if len(sources) != 1:
            return None
        cur = sources[0]
    return None


def _condition_phrase(manifest: Manifest, branch_end: str, warnings: list[str]) -> str:
    node = manifest.node(branch_end)
    if node.kind == "retrieve":
        target = node.properties["target"]
        absent = node.properties.get("when", "present") == "absent"
        source = _upstream_inference(manifest, branch_end, target)
        kind_noun = node.properties["datatype"]
        if source is not None and source.kind == "classify":
            return f"the app does not detect {target}" if absent else f"the app detects {target}"
        verb = "cannot recognize" if absent else "can recognize"
        return f"the app {verb} {_plural(target)} from the raw {kind_noun}"
    if node.kind in ("detect", "classify", "extract"):
        return f"the app detects {node.properties['target']}"
    warnings.append(f"no condition template for branch ending at {branch_end!r}")
    return f"data arrives from {branch_end}"


def _content_phrase(
    manifest: Manifest, analysis: TypeAnalysis, spine: list[str], network: NodeSpec
) -> tuple[str, TypePair | None]:
    """Phrase for what actually leaves, from the last filter on the path."""
    want = DataKind(network.properties["datatype"])
    # spine runs source -> network; scan backwards for the last filter
    for idx in range(len(spine) - 2, -1, -1):
        node = manifest.node(spine[idx])
        if node.kind not in FILTER_KINDS:
            continue
        out_pairs = analysis.edge_pairs(spine[idx], spine[idx + 1])
        pair = next((p for p in out_pairs if p.kind == want), out_pairs[0] if out_pairs else None)
        if node.kind == "aggregate":
            if node.properties["datatype"] == "tabular":
                value = node.properties.get("value_field") or "count"
                return f"{value} data aggregated by {node.properties['group_by_field']}", pair
            return "aggregated readings", pair
        if node.kind == "select":
            target = node.properties["target"]
            return f"cropped {target} {_plural(want.value)}", pair
        if node.kind == "retrieve":
            return f"extracted {_plural(node.properties['target'])}", pair
        if node.kind in ("noisify", "spoof"):
            qualifier = "anonymized" if node.kind == "noisify" else "spoofed"
            label = pair.content.label if pair else "data"
            return f"{qualifier} {label} {_plural(want.value)}", pair
    pairs = [p for p in analysis.node_inputs.get(network.id, []) if p.kind == want]
    return _RAW_PHRASES[want], (pairs[0] if pairs else None)


def _trigger_phrase(manifest: Manifest, head: str, warnings: list[str]) -> str:
    node = manifest.node(head)
    if node.kind == "push":
        device = node.properties["device"]
        event = node.properties.get("event", "an event")
        return f"When the {device} detects {event}"
    if node.kind == "inject":
        if node.properties["mode"] == "interval":
            return f"For every {interval_phrase(int(node.properties['interval_ms']))}"
        return "When triggered manually"
    warnings.append(f"ambiguous trigger at {head!r}")
    return "When data arrives"


def _walk_contexts(manifest: Manifest, analysis: TypeAnalysis, network: NodeSpec) -> list[_Walk]:
    """Upstream walks from a network node; nonblocking joins fork them."""
    nodes = manifest.nodes_by_id()
    want = DataKind(network.properties["datatype"])

    def go(cur: str, needed: DataKind, walk: _Walk, depth: int) -> list[_Walk]:
        walk.spine.insert(0, cur)
        if depth > len(nodes):
            walk.warnings.append("walk aborted: path too long")
            return [walk]
        node = nodes[cur]
        if node.kind == "retrieve":
            needed = DataKind(node.properties["datatype"])
        sources = manifest.incoming(cur)
        if not sources:
            return [walk]
        if node.kind == "join":
            if node.properties["mode"] == "nonblocking":
                forks: list[_Walk] = []
                for src in sources:
                    fork = _Walk(list(walk.spine), list(walk.condition_branches), list(walk.warnings))
                    forks.extend(go(src, needed, fork, depth + 1))
                return forks
            main = None
            for src in sources:
                if any(p.kind == needed for p in analysis.edge_pairs(src, cur)):
                    main = src
                    break
            if main is None:
                main = sources[0]
                walk.warnings.append(f"no join input at {cur!r} carries {needed.value}; guessing {main!r}")
            for src in sources:
                if src != main:
                    walk.condition_branches.append(src)
            return go(main, needed, walk, depth + 1)
        if node.kind == "pull":
            # continue into the inject trigger when present
            injects = [s for s in sources if nodes[s].kind == "inject"]
            if injects:
                return go(injects[0], needed, walk, depth + 1)
            return [walk]
        if node.kind == "push":
            return [walk]
        return go(sources[0], needed, walk, depth + 1)

    return go(network.id, want, _Walk(), 0)


def generate_descriptions(manifest: Manifest, analysis: TypeAnalysis) -> list[PrivacyDescription]:
    """One sentence per outbound flow, network nodes in id order.

    A nonblocking join upstream of a network node yields one sentence
    per incoming branch; blocking-join side branches become conditions.
    """
    out: list[PrivacyDescription] = []
    for node in sorted(manifest.graph, key=lambda n: n.id):
        if node.kind not in NETWORK_KINDS:
            continue
        dest = destination_display(node.properties["destination"])
        for walk in _walk_contexts(manifest, analysis, node):
            warnings = list(walk.warnings)
            trigger = _trigger_phrase(manifest, walk.spine[0], warnings)
            content, pair = _content_phrase(manifest, analysis, walk.spine, node)
            conditions = [_condition_phrase(manifest, b, warnings) for b in walk.condition_branches]
            condition = " and ".join(conditions) if conditions else None
            out.append(
                PrivacyDescription(
                    network_node=node.id,
                    trigger=trigger,
                    content=content,
                    destination=dest,
                    condition=condition,
                    rendered=_render(trigger, content, dest, condition),
                    content_pair=pair,
                    warnings=warnings,
                )
            )
    return out


@dataclass
class LabelEntry:
    permission: str
    trigger: str
    condition: str | None
    sent_items: int
    sent_bytes: int
    blocked_items: int

    def to_obj(self) -> dict:
        return {
            "permission": self.permission,
            "trigger": self.trigger,
            "condition": self.condition,
            "sent_items": self.sent_items,
            "sent_bytes": self.sent_bytes,
            "blocked_items": self.blocked_items,
        }


@dataclass
class NutritionLabel:
    """Auto-generated privacy nutrition facts for one app."""

    app_name: str
    purpose: str
    version: str
    destinations: list[dict]

    def to_obj(self) -> dict:
        return {
            "app_name": self.app_name,
            "purpose": self.purpose,
            "version": self.version,
            "destinations": self.destinations,
        }


def generate_label(
    manifest: Manifest, analysis: TypeAnalysis, ledger_rows: list[dict] | None = None
) -> NutritionLabel:
    """Static permissions joined with observed ledger counts.

    ledger_rows are {node, content, kind, items, bytes, blocked_items}
    aggregates; missing rows mean nothing was observed yet.
    """
    rows = ledger_rows or []
    perms = derive_egress_permissions(manifest, analysis)
    descriptions = generate_descriptions(manifest, analysis)
    by_node: dict[str, list[PrivacyDescription]] = {}
    for d in descriptions:
        by_node.setdefault(d.network_node, []).append(d)

    dest_groups: dict[str, list[LabelEntry]] = {}
    dest_order: list[str] = []
    for perm in perms:
        node_descs = by_node.get(perm.network_node, [])
        match = next(
            (d for d in node_descs if d.content_pair == TypePair(perm.content, perm.kind)),
            node_descs[0] if node_descs else None,
        )
        sent_items = sent_bytes = blocked = 0
        for r in rows:
            if r.get("node") == perm.network_node and f"{r.get('content')} {r.get('kind')}" == perm.display:
                sent_items += int(r.get("items", 0))
                sent_bytes += int(r.get("bytes", 0))
                blocked += int(r.get("blocked_items", 0))
        entry = LabelEntry(
            permission=perm.display,
            trigger=match.trigger if match else "",
            condition=match.condition if match else None,
            sent_items=sent_items,
            sent_bytes=sent_bytes,
            blocked_items=blocked,
        )
        dest = destination_display(perm.destination)
        if dest not in dest_groups:
            dest_groups[dest] = []
            dest_order.append(dest)
        dest_groups[dest].append(entry)

    destinations = [
        {"destination": dest, "entries": [e.to_obj() for e in dest_groups[dest]]} for dest in dest_order
    ]
    return NutritionLabel(manifest.meta.name, manifest.meta.purpose, manifest.meta.version, destinations)


__all__ = [
    "TypePair",
    "EdgeTypeAnnotation",
    "TypeAnalysis",
    "TypeRuleTable",
    "DEFAULT_TYPE_RULES",
    "infer_edge_types",
    "content_display",
    "permission_display",
    "EgressPermission",
    "derive_egress_permissions",
    "interval_phrase",
    "destination_display",
    "PrivacyDescription",
    "generate_descriptions",
    "LabelEntry",
    "NutritionLabel",
    "generate_label",
]
