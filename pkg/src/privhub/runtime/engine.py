"""The hub runtime: installs apps and runs their pipelines over virtual time.

Execution is a discrete-event simulation.  Source events (inject ticks,
device pushes) are scheduled on a heap ordered by (timestamp, app, node,
sequence); processing an event may cascade same-timestamp deliveries
downstream.  With fixed manifests, bindings, and seeds, two runs produce
byte-identical traces and ledgers.

All egress funnels through one code path that applies interception
transforms, the per-item permission guard, ledger accounting, and the
single injected transport.  Nothing else in the package talks to the
network.
"""

from __future__ import annotations

import heapq
import json
import logging
import random
import tempfile
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from ..analyzer import (
    TypeAnalysis,
    content_display,
    derive_egress_permissions,
    generate_descriptions,
    generate_label,
    infer_edge_types,
)
from ..fixio import DRIVER_FILE, list_payload_files, load_payload_file, payload_hash
from ..manifest import (
    FILTER_KINDS,
    INFERENCE_KINDS,
    Manifest,
    NETWORK_KINDS,
    NodeSpec,
    ValidationReport,
    manifest_hash,
    parse_manifest,
    validate_manifest,
)
from ..rewriter import RewritePlan, apply_plan
from ..model import (
    DataItem,
    DataKind,
    DeviceDescriptor,
    Message,
    Payload,
    PrivHubError,
    ProvenanceStep,
    TriggerMeta,
    deep_copy_message,
    egress_item_size,
    egress_payload_bytes,
    make_raw_item,
)
from ..operators import (
    Diagnostic,
    JoinState,
    apply_debug,
    apply_filter,
    apply_inference,
    debug_lines,
    make_trigger_message,
    noisify_payload,
)
from ..providers import InferenceProvider, ProviderRegistry, default_registry
from .clock import VirtualClock
from .drivers import (
    ClockDriver,
    DeviceDriver,
    DriverSession,
    IncompatibleBinding,
    MissingBinding,
    ReplayDriver,
    SineScalarDriver,
    SyntheticTabularDriver,
)
from .ledger import EgressLedger, EgressRecord
from .sinks import DeliveryRecord, RecordingTransport, SinkTransport, SinkUnreachable, encode_wire

log = logging.getLogger("privhub.runtime")

EGRESS_RETRIES = 3


class InstallRejected(PrivHubError):
    """Manifest failed validation at install time."""

    def __init__(self, report: ValidationReport):
        self.report = report
        problems = "; ".join(i.message for i in report.errors[:3])
        super().__init__(f"manifest rejected: {problems}")


class UnknownPermission(PrivHubError):
    pass


class UnknownApp(PrivHubError):
    pass


class MissingReplacement(PrivHubError):
    """A spoof node names a replacement absent from the spoof store."""


@dataclass(frozen=True)
class InterceptRule:
    """User-initiated in-flight downgrade applied right before egress.

    Matches items by content label (and kind, and optionally qualifier)
    and overwrites the payload; transform is "spoof" or "noisify".
    """

    label: str
    kind: DataKind
    transform: str
    params: dict
    qualifier: str | None = None

    def matches(self, item: DataItem) -> bool:
        if item.contenttype.label != self.label or item.datatype != self.kind:
            return False
        return self.qualifier is None or item.contenttype.qualifier == self.qualifier


@dataclass
class TraceDelivery:
    ts: int
    app: str
    edge: tuple[str, str]
    pairs: list[tuple[str, str, str]]  # (label, qualifier, kind) per item

    def to_obj(self) -> dict:
        return {"ts": self.ts, "app": self.app, "edge": list(self.edge), "pairs": [list(p) for p in self.pairs]}


@dataclass
class TraceEgress:
    ts: int
    app: str
    node: str
    dest: str
    arrived: int
    sent_items: int
    sent_bytes: int
    blocked_items: int
    type_filtered: int

    def to_obj(self) -> dict:
        return {
            "ts": self.ts,
            "app": self.app,
            "node": self.node,
            "dest": self.dest,
            "arrived": self.arrived,
            "sent_items": self.sent_items,
            "sent_bytes": self.sent_bytes,
            "blocked_items": self.blocked_items,
            "type_filtered": self.type_filtered,
        }


@dataclass
class ExecutionTrace:
    """Everything observable about a run, in deterministic order."""

    deliveries: list[TraceDelivery] = field(default_factory=list)
    egress: list[TraceEgress] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    debug: list[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "deliveries": [d.to_obj() for d in self.deliveries],
            "egress": [e.to_obj() for e in self.egress],
            "diagnostics": [d.to_obj() for d in self.diagnostics],
            "debug": list(self.debug),
        }


@dataclass
class AppState:
    """One installed app and all of its compiled runtime state."""

    id: str
    manifest: Manifest
    bindings: dict[str, str]
    analysis: TypeAnalysis
    permissions: dict[str, str]  # permission id -> pending | allowed | denied
    installed_at: int
    state: str = "running"
    epoch: int = 0
    intercept_rules: list[InterceptRule] = field(default_factory=list)
    providers: dict[str, InferenceProvider] = field(default_factory=dict)
    sessions: dict[str, DriverSession] = field(default_factory=dict)
    session_drivers: dict[str, str] = field(default_factory=dict)
    joins: dict[str, JoinState] = field(default_factory=dict)
    next_source_ts: dict[str, int] = field(default_factory=dict)

    @property
    def manifest_hash(self) -> str:
        return self.analysis.manifest_hash


class HubRuntime:
    """Owns installed apps, drivers, the clock, the ledger, the transport."""

    def __init__(
        self,
        data_dir: Path | str | None = None,
        clock: VirtualClock | None = None,
        transport: SinkTransport | None = None,
        ledger_path: Path | str | None = None,
        registry: ProviderRegistry | None = None,
        mailbox_cap: int = 64,
    ):
        self.clock = clock or VirtualClock()
        self.transport = transport or RecordingTransport()
        self.data_dir = Path(data_dir) if data_dir is not None else None
        if ledger_path is None:
            base = self.data_dir or Path(tempfile.mkdtemp(prefix="privhub-"))
            ledger_path = base / "egress.ndjson"
        self.ledger = EgressLedger(ledger_path)
        media_root = self.data_dir / "media" if self.data_dir else None
        self.registry = registry or default_registry(media_root)
        self.spoof_store: dict[str, Payload] = {}
        if self.data_dir and (self.data_dir / "spoof").is_dir():
            for p in list_payload_files(self.data_dir / "spoof"):
                self.spoof_store[p.stem] = load_payload_file(p)
        self.drivers: dict[str, DeviceDriver] = {
            "clock": ClockDriver(),
            "tv-log": SyntheticTabularDriver("tv-log", seed=71),
            "humidity": SineScalarDriver("humidity", seed=72, base=52.0, amplitude=9.0),
        }
        if media_root and media_root.is_dir():
            self.load_media_drivers(media_root)
        self.mailbox_cap = mailbox_cap
        self.trace = ExecutionTrace()
        self.apps: dict[str, AppState] = {}
        self._heap: list[tuple[int, str, str, int, str, int]] = []  # ts, app, node, seq, action, epoch
        self._mailboxes: dict[tuple[str, str], deque] = {}
        self._seq = 0
        self._app_counter = 0

    # -- setup ---------------------------------------------------------------

    def register_driver(self, driver: DeviceDriver) -> None:
        self.drivers[driver.name] = driver

    def load_media_drivers(self, media_root: Path | str) -> None:
        """One replay driver per media directory; driver.json sets options."""
        for d in sorted(Path(media_root).iterdir()):
            if not d.is_dir() or not list_payload_files(d):
                continue
            options = {}
            if (d / DRIVER_FILE).exists():
                with open(d / DRIVER_FILE, "r", encoding="utf-8") as f:
                    options = json.load(f)
            self.register_driver(
                ReplayDriver(options.get("name", d.name), d, push_period_ms=options.get("push_period_ms"))
            )

    # -- install / uninstall ---------------------------------------------------

    def _new_app_id(self, name: str) -> str:
        slug = "".join(c if c.isalnum() else "-" for c in name.lower()).strip("-") or "app"
        self._app_counter += 1
        return f"{slug}-{self._app_counter}"

    def _compile(self, app: AppState) -> None:
        """Resolve providers, drivers, and join state; fail before running."""
        manifest = app.manifest
        app.providers = {}
        app.joins = {}
        old_sessions = app.sessions
        old_drivers = app.session_drivers
        app.sessions = {}
        app.session_drivers = {}
        for node in manifest.graph:
            if node.kind in INFERENCE_KINDS:
                app.providers[node.id] = self.registry.resolve(
                    node.kind,
                    node.properties["target"],
                    DataKind(node.properties["datatype"]),
                    node.properties.get("provider"),
                )
            elif node.kind == "join":
                app.joins[node.id] = JoinState(node)
            elif node.kind == "spoof":
                for name in node.properties["replacements"]:
                    if name not in self.spoof_store:
                        raise MissingReplacement(f"spoof node {node.id!r} names unknown replacement {name!r}")
            elif node.kind in ("push", "pull"):
                device = node.properties["device"]
                driver_name = app.bindings.get(device, device)
                driver = self.drivers.get(driver_name)
                if driver is None:
                    raise MissingBinding(f"no driver bound for device {device!r} (node {node.id!r})")
                if driver.kind != DataKind(node.properties["datatype"]):
                    raise IncompatibleBinding(
                        f"driver {driver_name!r} yields {driver.kind.value}, node {node.id!r} wants "
                        f"{node.properties['datatype']}"
                    )
                if node.kind == "push" and driver.push_period_ms is None:
                    raise IncompatibleBinding(f"driver {driver_name!r} cannot push (node {node.id!r})")
                if old_drivers.get(node.id) == driver_name and node.id in old_sessions:
                    app.sessions[node.id] = old_sessions[node.id]
                else:
                    app.sessions[node.id] = driver.session()
                app.session_drivers[node.id] = driver_name

    def _init_source_schedule(self, app: AppState) -> None:
        now = self.clock.now_ms
        app.next_source_ts = {}
        for node in app.manifest.graph:
            if node.kind == "inject" and node.properties["mode"] == "interval":
                app.next_source_ts[node.id] = now + int(node.properties["interval_ms"])
            elif node.kind == "push":
                driver = self.drivers[app.session_drivers[node.id]]
                app.next_source_ts[node.id] = now + int(driver.push_period_ms)

    def install_app(self, manifest: Manifest | str, bindings: dict[str, str] | None = None, app_id: str | None = None) -> AppState:
        if isinstance(manifest, str):
            manifest = parse_manifest(manifest)
        report = validate_manifest(manifest)
        if not report.ok:
            raise InstallRejected(report)
        analysis = infer_edge_types(manifest)
        app = AppState(
            id=app_id or self._new_app_id(manifest.meta.name),
            manifest=manifest.copy(),
            bindings=dict(bindings or {}),
            analysis=analysis,
            permissions={p.id: "pending" for p in derive_egress_permissions(manifest, analysis)},
            installed_at=self.clock.now_ms,
        )
        self._compile(app)
        self._init_source_schedule(app)
        self.apps[app.id] = app
        return app

    def uninstall_app(self, app_id: str) -> None:
        self._require_app(app_id)
        del self.apps[app_id]
        for key in [k for k in self._mailboxes if k[0] == app_id]:
            del self._mailboxes[key]

    def _require_app(self, app_id: str) -> AppState:
        if app_id not in self.apps:
            raise UnknownApp(app_id)
        return self.apps[app_id]

    def pause_app(self, app_id: str) -> None:
        self._require_app(app_id).state = "paused"

    def resume_app(self, app_id: str) -> None:
        app = self._require_app(app_id)
        if app.state == "paused":
            app.state = "running"
            self._init_source_schedule(app)

    # -- permissions & interception -------------------------------------------

    def set_permission(self, app_id: str, permission_id: str, allow: bool) -> None:
        app = self._require_app(app_id)
        if permission_id not in app.permissions:
            raise UnknownPermission(permission_id)
        app.permissions[permission_id] = "allowed" if allow else "denied"

    def allow_all(self, app_id: str) -> None:
        app = self._require_app(app_id)
        for pid in app.permissions:
            app.permissions[pid] = "allowed"

    def intercept_transform(self, app_id: str, rule: InterceptRule) -> None:
        """Install an in-flight downgrade; post-transform content inherits
        the decision already made for the content it replaces."""
        app = self._require_app(app_id)
        if rule.transform not in ("spoof", "noisify"):
            raise ValueError(f"unknown intercept transform: {rule.transform!r}")
        app.intercept_rules.append(rule)
        new_qualifier = "spoofed" if rule.transform == "spoof" else "anonymized"
        for pid, state in list(app.permissions.items()):
            node, label, qualifier, kind = pid.split("|")
            if label == rule.label and kind == rule.kind.value:
                if rule.qualifier is not None and qualifier != rule.qualifier:
                    continue
                shadow = f"{node}|{label}|{new_qualifier}|{kind}"
                app.permissions.setdefault(shadow, state)

    # -- event machinery -------------------------------------------------------

    def _push_event(self, ts: int, app: AppState, node_id: str, action: str) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (ts, app.id, node_id, self._seq, action, app.epoch))

    def _enqueue_delivery(self, app: AppState, src: str, dst: str, port: int, msg: Message, ts: int) -> None:
        box = self._mailboxes.setdefault((app.id, dst), deque())
        if len(box) >= self.mailbox_cap:
            box.popleft()
            self.trace.diagnostics.append(
                Diagnostic(dst, "MAILBOX_OVERFLOW", f"dropped oldest pending message for {dst!r}", ts)
            )
        box.append((port, msg))
        self.trace.deliveries.append(
            TraceDelivery(
                ts,
                app.id,
                (src, dst),
                [(i.contenttype.label, i.contenttype.qualifier, i.datatype.value) for i in msg.items],
            )
        )
        self._push_event(ts, app, dst, "deliver")

    def _forward(self, app: AppState, node: NodeSpec, msg: Message | None, ts: int) -> None:
        if msg is None or msg.is_empty():
            return
        targets = sorted(node.wires)
        for dst in targets:
            port = app.manifest.incoming(dst).index(node.id)
            self._enqueue_delivery(app, node.id, dst, port, deep_copy_message(msg), ts)

    def _schedule_sources(self, until: int) -> None:
        for app_id in sorted(self.apps):
            app = self.apps[app_id]
            if app.state != "running":
                continue
            for node_id in sorted(app.next_source_ts):
                node = app.manifest.node(node_id)
                interval = (
                    int(node.properties["interval_ms"])
                    if node.kind == "inject"
                    else int(self.drivers[app.session_drivers[node_id]].push_period_ms)
                )
                ts = app.next_source_ts[node_id]
                while ts <= until:
                    self._push_event(ts, app, node_id, "tick" if node.kind == "inject" else "push")
                    ts += interval
                app.next_source_ts[node_id] = ts

    def fire_inject(self, app_id: str, node_id: str) -> None:
        """Manually trigger an inject node right now and settle the fallout."""
        app = self._require_app(app_id)
        node = app.manifest.node(node_id)
        if node.kind != "inject":
            raise ValueError(f"node {node_id!r} is {node.kind}, not inject")
        self._push_event(self.clock.now_ms, app, node_id, "tick")
        self._drain(self.clock.now_ms)

    def run_until(self, until_ms: int) -> ExecutionTrace:
        """Advance virtual time, processing every event due on the way."""
        if until_ms < self.clock.now_ms:
            raise ValueError("cannot run backwards")
        self._schedule_sources(until_ms)
        self._drain(until_ms)
        self.clock.advance_to(until_ms)
        return self.trace

    def _drain(self, until: int) -> None:
        while self._heap and self._heap[0][0] <= until:
            ts, app_id, node_id, _seq, action, epoch = heapq.heappop(self._heap)
            app = self.apps.get(app_id)
            if app is None or app.epoch != epoch:
                continue
            self.clock.advance_to(ts)
            if app.state != "running":
                if action == "deliver":
                    box = self._mailboxes.get((app_id, node_id))
                    if box:
                        box.popleft()
                continue
            self._dispatch(app, node_id, action, ts)

    def _dispatch(self, app: AppState, node_id: str, action: str, ts: int) -> None:
        try:
            node = app.manifest.node(node_id)
        except KeyError:
            return
        if action == "tick":
            self._forward(app, node, make_trigger_message(node_id, ts), ts)
            return
        if action == "push":
            self._forward(app, node, self._provider_message(app, node, ts, None), ts)
            return

        box = self._mailboxes.get((app.id, node_id))
        if not box:
            return
        port, msg = box.popleft()

        if node.kind in ("push", "pull"):
            # only an inject trigger reaches a provider; it pulls fresh data
            self._forward(app, node, self._provider_message(app, node, ts, msg.trigger_meta), ts)
            return
        if node.kind in INFERENCE_KINDS:
            self._forward(app, node, apply_inference(node, msg, app.providers[node_id], ts), ts)
            return
        if node.kind in FILTER_KINDS:
            out = apply_filter(node, msg, ts, self.spoof_store, self.trace.diagnostics)
            self._forward(app, node, out, ts)
            return
        if node.kind == "join":
            self._forward(app, node, app.joins[node_id].step(port, msg, ts), ts)
            return
        if node.kind == "debug":
            for line in debug_lines(node, msg, ts):
                self.trace.debug.append(line)
                log.info("%s", line)
            self._forward(app, node, apply_debug(node, msg, ts), ts)
            return
        if node.kind in NETWORK_KINDS:
            self._egress(app, node, msg, ts)
            return

    def _provider_message(self, app: AppState, node: NodeSpec, ts: int, trigger: TriggerMeta | None) -> Message | None:
        session = app.sessions[node.id]
        payload = session.pull(ts)
        if payload is None:
            self.trace.diagnostics.append(
                Diagnostic(node.id, "DRIVER_EMPTY", f"driver for {node.id!r} produced nothing", ts)
            )
            return None
        device = DeviceDescriptor(node.properties["device"], app.session_drivers[node.id], payload.kind)
        item = make_raw_item(device, payload)
        item.process = item.process.extended(ProvenanceStep(node.id, node.kind, ts))
        return Message([item], trigger or TriggerMeta(node.id, ts))

    # -- egress -----------------------------------------------------------------

    def _apply_intercepts(self, app: AppState, items: list[DataItem], ts: int) -> list[DataItem]:
        if not app.intercept_rules:
            return items
        out = []
        for idx, item in enumerate(items):
            rule = next((r for r in app.intercept_rules if r.matches(item)), None)
            if rule is None:
                out.append(item)
                continue
            replaced = item.copy()
            if rule.transform == "spoof":
                names = [n for n in rule.params.get("replacements", []) if n in self.spoof_store]
                candidates = [n for n in names if self.spoof_store[n].kind == item.datatype]
                if not candidates:
                    self.trace.diagnostics.append(
                        Diagnostic("intercept", "NO_REPLACEMENT", f"no replacement for {rule.label!r}", ts)
                    )
                    out.append(item)
                    continue
                pick = candidates[int(payload_hash(item.data), 16) % len(candidates)]
                replaced.data = self.spoof_store[pick].copy()
                replaced.contenttype = replaced.contenttype.with_qualifier("spoofed")
            else:
                rng = random.Random(int(rule.params.get("seed", 0)) + idx)
                magnitude = float(rule.params.get("magnitude_percent", 10.0))
                replaced.data = noisify_payload(replaced.data, magnitude, rng)
                replaced.contenttype = replaced.contenttype.with_qualifier("anonymized")
            replaced.process = replaced.process.extended(ProvenanceStep("intercept", rule.transform, ts))
            out.append(replaced)
        return out

    def _egress(self, app: AppState, node: NodeSpec, msg: Message, ts: int) -> None:
        arrived = len(msg.items)
        items = self._apply_intercepts(app, msg.items, ts)
        want = DataKind(node.properties["datatype"])
        matching = [i for i in items if i.datatype == want]
        type_filtered = arrived - len(matching)

        allowed: list[DataItem] = []
        blocked: list[tuple[DataItem, str]] = []
        for item in matching:
            pid = f"{node.id}|{item.contenttype.label}|{item.contenttype.qualifier}|{item.datatype.value}"
            state = app.permissions.get(pid, "pending")
            if state == "allowed":
                allowed.append(item)
            else:
                blocked.append((item, "permission-denied" if state == "denied" else "permission-pending"))

        dest = node.properties["destination"]
        sent_items = sent_bytes = 0
        if allowed:
            payload = egress_payload_bytes(allowed)
            meta: dict = {}
            if node.kind == "post":
                meta = {"path": node.properties.get("path", "/ingest"),
                        "headers": {"content-type": "application/json", "x-privhub-app": app.id}}
            elif node.kind == "publish":
                meta = {"topic": node.properties["topic"]}
            meta["wire_bytes"] = len(encode_wire(node.kind, payload, meta))
            record = DeliveryRecord(ts, app.id, node.id, node.kind, dest, payload, meta)
            delivered = False
            for attempt in range(EGRESS_RETRIES):
                try:
                    self.transport.deliver(record)
                    delivered = True
                    break
                except SinkUnreachable as e:
                    self.trace.diagnostics.append(
                        Diagnostic(node.id, "SINK_UNREACHABLE", f"attempt {attempt + 1}: {e}", ts)
                    )
            if delivered:
                for content, kind, group in self._group_by_content(allowed):
                    size = sum(egress_item_size(i) for i in group)
                    sent_items += len(group)
                    sent_bytes += size
                    self.ledger.append(
                        EgressRecord(ts, app.id, node.id, dest, content, kind, len(group), size, False)
                    )
            else:
                blocked.extend((i, "sink-unreachable") for i in allowed)
                allowed = []

        blocked_count = len(blocked)
        reasons: dict[tuple[str, str, str], list[DataItem]] = {}
        order: list[tuple[str, str, str]] = []
        for item, reason in blocked:
            key = (content_display(item.contenttype), item.datatype.value, reason)
            if key not in reasons:
                reasons[key] = []
                order.append(key)
            reasons[key].append(item)
        for content, kind, reason in order:
            group = reasons[(content, kind, reason)]
            self.ledger.append(EgressRecord(ts, app.id, node.id, dest, content, kind, len(group), 0, True, reason))

        self.trace.egress.append(
            TraceEgress(ts, app.id, node.id, dest, arrived, sent_items, sent_bytes, blocked_count, type_filtered)
        )

    @staticmethod
    def _group_by_content(items: list[DataItem]) -> list[tuple[str, str, list[DataItem]]]:
        groups: dict[tuple[str, str], list[DataItem]] = {}
        order: list[tuple[str, str]] = []
        for item in items:
            key = (content_display(item.contenttype), item.datatype.value)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(item)
        return [(c, k, groups[(c, k)]) for c, k in order]

    # -- rewriting ---------------------------------------------------------------

    def apply_rewrite(self, app_id: str, change: "Manifest | RewritePlan") -> AppState:
        """Swap an app's manifest between deliveries.

        Accepts either a ready manifest or a rewrite plan to apply to the
        app's current one.  Pending events for the old pipeline are
        dropped, permission decisions carry over by id, new permissions
        start pending, and interval sources restart relative to now.
        """
        app = self._require_app(app_id)
        if isinstance(change, RewritePlan):
            new_manifest = apply_plan(app.manifest, change)
        else:
            new_manifest = change
        report = validate_manifest(new_manifest)
        if not report.ok:
            raise InstallRejected(report)
        app.epoch += 1
        for key in [k for k in self._mailboxes if k[0] == app_id]:
            del self._mailboxes[key]
        app.manifest = new_manifest.copy()
        app.analysis = infer_edge_types(new_manifest)
        old_perms = app.permissions
        app.permissions = {}
        for p in derive_egress_permissions(new_manifest, app.analysis):
            app.permissions[p.id] = old_perms.get(p.id, "pending")
        self._compile(app)
        self._init_source_schedule(app)
        return app

    # -- reporting ---------------------------------------------------------------

    def descriptions(self, app_id: str):
        app = self._require_app(app_id)
        assert app.manifest_hash == manifest_hash(app.manifest), "analysis cache out of date"
        return generate_descriptions(app.manifest, app.analysis)

    def permissions(self, app_id: str):
        app = self._require_app(app_id)
        perms = derive_egress_permissions(app.manifest, app.analysis)
        rows = [{**p.to_obj(), "state": app.permissions[p.id]} for p in perms]
        known = {p.id for p in perms}
        for pid, state in sorted(app.permissions.items()):
            if pid not in known:
                node, label, qualifier, kind = pid.split("|")
                rows.append(
                    {
                        "id": pid,
                        "network_node": node,
                        "content": {"label": label, "qualifier": qualifier},
                        "kind": kind,
                        "destination": app.manifest.node(node).properties.get("destination", ""),
                        "display": f"{qualifier + ' ' if qualifier in ('anonymized', 'spoofed', 'aggregated') else ''}{label} {kind}",
                        "state": state,
                    }
                )
        return rows

    def label(self, app_id: str):
        app = self._require_app(app_id)
        return generate_label(app.manifest, app.analysis, self.ledger.rows_for_label(app_id))

    def query_egress(self, **kwargs):
        return self.ledger.query(**kwargs)


__all__ = [
    "InstallRejected",
    "UnknownPermission",
    "UnknownApp",
    "MissingReplacement",
    "InterceptRule",
    "TraceDelivery",
    "TraceEgress",
    "ExecutionTrace",
    "AppState",
    "HubRuntime",
]
