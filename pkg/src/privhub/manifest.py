"""App manifests: a JSON document declaring a device-to-network pipeline.

A manifest carries app metadata, a security section (endpoint
whitelist), and a ``graph`` of operator nodes wired into a DAG.  This
module parses, validates, and canonically serializes manifests, and
provides the topological ordering every downstream pass relies on.

Node properties are checked against a versioned schema table shipped
with the package (schemas/operator_properties.json) so the set of legal
knobs per operator kind is data, not code.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import dataclass, field
from importlib import resources

from .model import PrivHubError

RUNTIME_VERSION = "1.0"

PROVIDER_KINDS = frozenset({"push", "pull"})
INFERENCE_KINDS = frozenset({"detect", "classify", "extract"})
FILTER_KINDS = frozenset({"spoof", "noisify", "select", "aggregate", "retrieve"})
NETWORK_KINDS = frozenset({"post", "publish", "stream"})
UTILITY_KINDS = frozenset({"inject", "join", "debug"})

KIND_CATEGORY: dict[str, str] = {}
for _k in PROVIDER_KINDS:
    KIND_CATEGORY[_k] = "provider"
for _k in INFERENCE_KINDS:
    KIND_CATEGORY[_k] = "inference"
for _k in FILTER_KINDS:
    KIND_CATEGORY[_k] = "filter"
for _k in NETWORK_KINDS:
    KIND_CATEGORY[_k] = "network"
for _k in UTILITY_KINDS:
    KIND_CATEGORY[_k] = "utility"

ALL_KINDS = frozenset(KIND_CATEGORY)


class ParseError(PrivHubError):
    """Manifest text is not a well-formed manifest document."""

    def __init__(self, reason: str, line: int | None = None):
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{reason}{where}")


class UnknownOperatorKind(ParseError):
    def __init__(self, kind: str, node_id: str):
        self.kind = kind
        self.node_id = node_id
        super().__init__(f"node {node_id!r} has unknown operator kind {kind!r}")


@dataclass
class NodeSpec:
    """One operator instance: stable id, kind, knobs, outgoing wires."""

    id: str
    kind: str
    properties: dict
    wires: list[str] = field(default_factory=list)

    @property
    def category(self) -> str:
        return KIND_CATEGORY[self.kind]

    def copy(self) -> NodeSpec:
        return NodeSpec(self.id, self.kind, json.loads(json.dumps(self.properties)), list(self.wires))

    def to_obj(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "properties": self.properties,
            "wires": sorted(self.wires),
        }


@dataclass
class ManifestMeta:
    name: str
    version: str
    author: str
    purpose: str
    min_runtime_version: str = "1.0"

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "author": self.author,
            "purpose": self.purpose,
            "min_runtime_version": self.min_runtime_version,
        }


@dataclass
class SecurityConfig:
    allowed_endpoints: list[str] = field(default_factory=list)
    require_tls: bool = True

    def to_obj(self) -> dict:
        return {"allowed_endpoints": sorted(self.allowed_endpoints), "require_tls": self.require_tls}


@dataclass
class Manifest:
    meta: ManifestMeta
    security: SecurityConfig
    graph: list[NodeSpec]

    def node(self, node_id: str) -> NodeSpec:
        for n in self.graph:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def nodes_by_id(self) -> dict[str, NodeSpec]:
        out: dict[str, NodeSpec] = {}
        for n in self.graph:
            out.setdefault(n.id, n)
        return out

    def edges(self) -> list[tuple[str, str]]:
        return [(n.id, w) for n in self.graph for w in sorted(n.wires)]

    def incoming(self, node_id: str) -> list[str]:
        # Sorted source ids double as the join port order, so the wire
        # order in the document is never load-bearing.
        return sorted(n.id for n in self.graph if node_id in n.wires)

    def copy(self) -> Manifest:
        return Manifest(
            ManifestMeta(**vars(self.meta)),
            SecurityConfig(list(self.security.allowed_endpoints), self.security.require_tls),
            [n.copy() for n in self.graph],
        )

    def to_obj(self) -> dict:
        return {
            "meta": self.meta.to_obj(),
            "security": self.security.to_obj(),
            "graph": [n.to_obj() for n in sorted(self.graph, key=lambda n: n.id)],
        }


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    nodes: tuple[str, ...]
    message: str

    def to_obj(self) -> dict:
        return {"code": self.code, "nodes": list(self.nodes), "message": self.message}


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, code: str, nodes: tuple[str, ...], message: str) -> None:
        self.errors.append(ValidationIssue(code, nodes, message))

    def warn(self, code: str, nodes: tuple[str, ...], message: str) -> None:
        self.warnings.append(ValidationIssue(code, nodes, message))

    def to_obj(self) -> dict:
        issues = [{"severity": "error", **i.to_obj()} for i in self.errors]
        issues += [{"severity": "warning", **i.to_obj()} for i in self.warnings]
        return {"ok": self.ok, "issues": issues}


def _load_property_schema() -> dict:
    text = resources.files("privhub").joinpath("schemas/operator_properties.json").read_text()
    return json.loads(text)


PROPERTY_SCHEMA = _load_property_schema()


def _require(obj: dict, key: str, typ, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing required key {key!r}")
    val = obj[key]
    if typ is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ParseError(f"{where}: key {key!r} must be a number")
    elif not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
        raise ParseError(f"{where}: key {key!r} has wrong type")
    return val


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ParseError(f"{where}: unknown keys {sorted(extra)}")


def parse_manifest(text: str) -> Manifest:
    """Parse manifest JSON, rejecting malformed documents early.

    Structural problems (bad JSON, missing sections, unknown keys,
    unknown operator kinds) raise ParseError; graph-level problems are
    left to validate_manifest so they can all be reported together.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object")
    _reject_unknown(doc, {"meta", "security", "graph"}, "manifest")

    meta_obj = _require(doc, "meta", dict, "manifest")
    _reject_unknown(meta_obj, {"name", "version", "author", "purpose", "min_runtime_version"}, "meta")
    meta = ManifestMeta(
        name=_require(meta_obj, "name", str, "meta"),
        version=_require(meta_obj, "version", str, "meta"),
        author=_require(meta_obj, "author", str, "meta"),
        purpose=_require(meta_obj, "purpose", str, "meta"),
        min_runtime_version=meta_obj.get("min_runtime_version", "1.0"),
    )
    if not isinstance(meta.min_runtime_version, str):
        raise ParseError("meta: key 'min_runtime_version' has wrong type")

    sec_obj = _require(doc, "security", dict, "manifest")
    _reject_unknown(sec_obj, {"allowed_endpoints", "require_tls"}, "security")
    endpoints = _require(sec_obj, "allowed_endpoints", list, "security")
    if not all(isinstance(e, str) for e in endpoints):
        raise ParseError("security: allowed_endpoints must be strings")
    security = SecurityConfig(list(endpoints), bool(sec_obj.get("require_tls", True)))

    graph_obj = _require(doc, "graph", list, "manifest")
    nodes: list[NodeSpec] = []
    for i, nobj in enumerate(graph_obj):
        where = f"graph[{i}]"
        if not isinstance(nobj, dict):
            raise ParseError(f"{where}: node must be an object")
        _reject_unknown(nobj, {"id", "kind", "properties", "wires"}, where)
        nid = _require(nobj, "id", str, where)
        if not nid:
            raise ParseError(f"{where}: node id must be non-empty")
        kind = _require(nobj, "kind", str, where)
        if kind not in ALL_KINDS:
            raise UnknownOperatorKind(kind, nid)
        props = nobj.get("properties", {})
        if not isinstance(props, dict):
            raise ParseError(f"{where}: properties must be an object")
        wires = nobj.get("wires", [])
        if not isinstance(wires, list) or not all(isinstance(w, str) for w in wires):
            raise ParseError(f"{where}: wires must be a list of node ids")
        nodes.append(NodeSpec(nid, kind, props, list(wires)))

    return Manifest(meta, security, nodes)


def _check_field(kind: str, name: str, spec: dict, value, issues: list[str]) -> None:
    typ = spec["type"]
    if typ == "string" or typ == "datatype":
        if not isinstance(value, str):
            issues.append(f"{name} must be a string")
            return
        if typ == "datatype" and value not in PROPERTY_SCHEMA["datatypes"]:
            issues.append(f"{name} must be one of {PROPERTY_SCHEMA['datatypes']}")
            return
    elif typ == "integer":
        if not isinstance(value, int) or isinstance(value, bool):
            issues.append(f"{name} must be an integer")
            return
    elif typ == "number":
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            issues.append(f"{name} must be a number")
            return
    elif typ == "boolean":
        if not isinstance(value, bool):
            issues.append(f"{name} must be a boolean")
            return
    elif typ == "object":
        if not isinstance(value, dict):
            issues.append(f"{name} must be an object")
            return
    elif typ == "array_string":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            issues.append(f"{name} must be a list of strings")
            return
        if len(value) < spec.get("min_items", 0):
            issues.append(f"{name} needs at least {spec['min_items']} entries")
            return
    if "enum" in spec and value not in spec["enum"]:
        issues.append(f"{name} must be one of {spec['enum']}")
    if "minimum" in spec and isinstance(value, (int, float)) and value < spec["minimum"]:
        issues.append(f"{name} must be >= {spec['minimum']}")
    if "exclusive_minimum" in spec and isinstance(value, (int, float)) and value <= spec["exclusive_minimum"]:
        issues.append(f"{name} must be > {spec['exclusive_minimum']}")


def check_node_properties(node: NodeSpec) -> list[str]:
    """Check one node's properties against the schema table."""
    schema = PROPERTY_SCHEMA["kinds"][node.kind]
    fields: dict = schema["fields"]
    issues: list[str] = []
    for extra in sorted(set(node.properties) - set(fields)):
        issues.append(f"unknown property {extra!r}")
    required = {name for name, spec in fields.items() if spec.get("required")}
    for rule in schema.get("requires_when", []):
        if node.properties.get(rule["field"]) == rule["equals"]:
            required.update(rule["required"])
    for name in sorted(required - set(node.properties)):
        issues.append(f"missing required property {name!r}")
    for name, value in node.properties.items():
        if name in fields:
            _check_field(node.kind, name, fields[name], value, issues)
    return issues


def _version_tuple(v: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in v.split("."))
    except ValueError:
        return (0,)


def topological_order(manifest: Manifest) -> list[str]:
    """Kahn's algorithm with a heap so ties resolve lexicographically.

    Raises ValueError if the graph has a cycle; validate first.
    """
    nodes = manifest.nodes_by_id()
    indeg = {nid: 0 for nid in nodes}
    for src, dst in manifest.edges():
        if dst in indeg:
            indeg[dst] += 1
    ready = [nid for nid, d in sorted(indeg.items()) if d == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        nid = heapq.heappop(ready)
        order.append(nid)
        for dst in sorted(nodes[nid].wires):
            if dst in indeg:
                indeg[dst] -= 1
                if indeg[dst] == 0:
                    heapq.heappush(ready, dst)
    if len(order) != len(nodes):
        raise ValueError("graph has a cycle")
    return order


def validate_manifest(manifest: Manifest) -> ValidationReport:
    """Full static validation; returns all problems, not just the first."""
    report = ValidationReport()
    seen: set[str] = set()
    for n in manifest.graph:
        if n.id in seen:
            report.error("DUPLICATE_NODE_ID", (n.id,), f"node id {n.id!r} appears more than once")
        seen.add(n.id)
    nodes = manifest.nodes_by_id()

    for n in manifest.graph:
        for w in n.wires:
            if w not in nodes:
                report.error("DANGLING_WIRE", (n.id,), f"wire {n.id} -> {w} points at a missing node")
        if len(n.wires) != len(set(n.wires)):
            report.error("DUPLICATE_WIRE", (n.id,), f"node {n.id} wires the same target twice")

    # Cycle detection over the known-node subgraph.
    state: dict[str, int] = {}
    cycle_nodes: set[str] = set()

    def visit(nid: str, stack: list[str]) -> None:
        state[nid] = 1
        stack.append(nid)
        for dst in sorted(nodes[nid].wires):
            if dst not in nodes:
                continue
            if state.get(dst, 0) == 1:
                cycle_nodes.update(stack[stack.index(dst):])
            elif state.get(dst, 0) == 0:
                visit(dst, stack)
        stack.pop()
        state[nid] = 2

    for nid in sorted(nodes):
        if state.get(nid, 0) == 0:
            visit(nid, [])
    if cycle_nodes:
        report.error("CYCLE", tuple(sorted(cycle_nodes)), "graph must be acyclic")

    indeg: dict[str, list[str]] = {nid: [] for nid in nodes}
    for src, dst in manifest.edges():
        if dst in indeg:
            indeg[dst].append(src)

    for nid in sorted(nodes):
        n = nodes[nid]
        sources = indeg[nid]
        if n.kind != "join" and len(sources) > 1:
            report.error(
                "MULTI_INPUT_NON_JOIN",
                (nid,),
                f"{n.kind} node {nid!r} has {len(sources)} inputs; only join merges flows",
            )
        for issue in check_node_properties(n):
            report.error("PROPERTY_SCHEMA", (nid,), f"{n.kind} node {nid!r}: {issue}")
        if n.category == "provider":
            bad = [s for s in sources if nodes[s].kind != "inject"]
            if bad:
                report.error(
                    "PROVIDER_INPUT",
                    (nid,),
                    f"provider {nid!r} may only be triggered by inject nodes, got {bad}",
                )
            if n.kind == "pull" and not sources:
                report.warn("NO_TRIGGER", (nid,), f"pull node {nid!r} has no inject trigger and will never fire")
        if n.category == "network":
            if n.wires:
                report.error("NETWORK_DOWNSTREAM", (nid,), f"network node {nid!r} must not have outgoing wires")
            dest = n.properties.get("destination")
            if isinstance(dest, str) and dest not in manifest.security.allowed_endpoints:
                report.error(
                    "ENDPOINT_NOT_ALLOWED",
                    (nid,),
                    f"destination {dest!r} is not in security.allowed_endpoints",
                )
        elif n.kind != "debug" and not n.wires:
            report.error("NON_NETWORK_SINK", (nid,), f"{n.kind} node {nid!r} has no outgoing wires; data would vanish")
        if n.kind == "join":
            expected = n.properties.get("inputs_expected")
            if isinstance(expected, int) and len(sources) != expected:
                report.error(
                    "JOIN_INPUT_MISMATCH",
                    (nid,),
                    f"join {nid!r} declares inputs_expected={expected} but has {len(sources)} incoming wires",
                )

    if _version_tuple(manifest.meta.min_runtime_version) > _version_tuple(RUNTIME_VERSION):
        report.error(
            "RUNTIME_VERSION",
            (),
            f"manifest requires runtime {manifest.meta.min_runtime_version}, this hub is {RUNTIME_VERSION}",
        )

    # Reachability from roots that can actually fire (inject or push).
    if not cycle_nodes:
        live: set[str] = set()
        frontier = [nid for nid in sorted(nodes) if nodes[nid].kind in ("inject", "push")]
        while frontier:
            nid = frontier.pop()
            if nid in live:
                continue
            live.add(nid)
            frontier.extend(w for w in nodes[nid].wires if w in nodes)
        for nid in sorted(set(nodes) - live):
            report.warn("UNREACHABLE_NODE", (nid,), f"node {nid!r} can never receive data")

    return report


def serialize_manifest(manifest: Manifest) -> str:
    """Canonical text form: stable ordering, two-space indent."""
    return json.dumps(manifest.to_obj(), indent=2, sort_keys=True) + "\n"


def manifest_hash(manifest: Manifest) -> str:
    return hashlib.sha256(serialize_manifest(manifest).encode("utf-8")).hexdigest()


def load_manifest(path) -> Manifest:
    with open(path, "r", encoding="utf-8") as f:
        return parse_manifest(f.read())


__all__ = [
    "RUNTIME_VERSION",
    "PROVIDER_KINDS",
    "INFERENCE_KINDS",
    "FILTER_KINDS",
    "NETWORK_KINDS",
    "UTILITY_KINDS",
    "KIND_CATEGORY",
    "ALL_KINDS",
    "ParseError",
    "UnknownOperatorKind",
    "NodeSpec",
    "ManifestMeta",
    "SecurityConfig",
    "Manifest",
    "ValidationIssue",
    "ValidationReport",
    "check_node_properties",
    "parse_manifest",
    "validate_manifest",
    "topological_order",
    "serialize_manifest",
    "manifest_hash",
    "load_manifest",
]
