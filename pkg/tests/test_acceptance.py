"""End-to-end gates for the guarantees the package advertises.

Each test exercises one guarantee at its stated tolerance and prints a
single [criterion NN] line so a verbose run doubles as a checklist.
Byte pins for the minimization gate come from scripts/byte_ratio_oracle.py,
which recomputes the totals without running any pipeline.
"""

from __future__ import annotations

import json
import time

import numpy as np
from click.testing import CliRunner

from conftest import FIXTURES, MANIFESTS, fixture_manifest
from gen import generate_valid
from join_oracle import enumerate_cases, reference_emissions
from privhub.analyzer import destination_display
from privhub.cli import main
from privhub.manifest import NodeSpec, parse_manifest
from privhub.model import (
    ContentLabel,
    DataKind,
    DeviceDescriptor,
    ImagePayload,
    Message,
    ScalarPayload,
    TriggerMeta,
    make_raw_item,
)
from privhub.operators import JoinState, apply_filter, apply_inference
from privhub.providers import BrightnessExtractor
from privhub.rewriter import plan_rate_limit, plan_time_schedule
from privhub.runtime import HubRuntime

MS_PER_DAY = 86_400_000
BINDINGS = json.loads((MANIFESTS / "bindings.json").read_text())

# Pinned by scripts/byte_ratio_oracle.py over the shipped hall-camera media:
# 10 frames shipped raw vs the 8 face crops the fixture annotations define.
RAW_EGRESS_BYTES = 1_729_490
CROP_EGRESS_BYTES = 51_833

GOLDEN_SENTENCES = {
    "tv-usage": [
        "For every week, the app sends duration data aggregated by content category to www.abc.com.",
    ],
    "voice-assistant": [
        "When the microphone detects a trigger phrase, the app sends anonymized speech audios to www.abc.com.",
    ],
    "productivity": [
        "For every 30 minutes, the app sends extracted poses to www.abc.com.",
        "For every 30 minutes, the app sends cropped person images to www.abc.com"
        " if the app cannot recognize poses from the raw image.",
    ],
}

RAW_VARIANT = {
    "graph": [
        {
            "id": "door-cam",
            "kind": "push",
            "properties": {"datatype": "image", "device": "camera", "event": "motion"},
            "wires": ["upload"],
        },
        {
            "id": "upload",
            "kind": "post",
            "properties": {"datatype": "image", "destination": "https://HelloVisitor.com"},
            "wires": [],
        },
    ],
    "meta": {
        "author": "acme-smart-home",
        "min_runtime_version": "1.0",
        "name": "HelloVisitor Raw",
        "purpose": "Ship whole frames for comparison",
        "version": "1.0.0",
    },
    "security": {"allowed_endpoints": ["https://HelloVisitor.com"], "require_tls": True},
}


def runtime(tmp_path, name="ledger.ndjson", **kwargs) -> HubRuntime:
    kwargs.setdefault("data_dir", FIXTURES)
    return HubRuntime(ledger_path=tmp_path / name, **kwargs)


def install(rt: HubRuntime, slug: str, app_id: str | None = None):
    return rt.install_app(fixture_manifest(slug), BINDINGS[slug], app_id=app_id or slug)


def passed(capsys, num: int, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {num:02d}] PASS - {detail}")


def norm(sentence: str) -> str:
    return sentence.strip().rstrip(".!?")


def test_c01_descriptions_match_goldens(capsys):
    t0 = time.perf_counter()
    checked = 0
    for slug, want in GOLDEN_SENTENCES.items():
        result = CliRunner().invoke(main, ["analyze", str(MANIFESTS / f"{slug}.json"), "--json"])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        got = [d["rendered"] for d in body["descriptions"]]
        assert [norm(s) for s in got] == [norm(s) for s in want], slug
        checked += len(want)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    passed(capsys, 1, f"{checked} sentences exact across 3 manifests in {elapsed * 1000:.0f} ms")


def test_c02_single_permission_for_face_upload(tmp_path, capsys):
    rt = runtime(tmp_path)
    install(rt, "hello-visitor")
    perms = rt.permissions("hello-visitor")
    assert len(perms) == 1
    shown = f"{perms[0]['display']} -> {destination_display(perms[0]['destination'])}"
    assert shown == "face image -> HelloVisitor.com"
    passed(capsys, 2, f'exactly one permission: "{shown}"')


def test_c03_dynamic_flows_within_static_types(tmp_path, capsys):
    t0 = time.perf_counter()
    manifests = generate_valid(20260814, 500)
    assert len(manifests) == 500
    rt = runtime(tmp_path)
    for i, m in enumerate(manifests):
        rt.install_app(m, {}, app_id=f"g{i:03d}")
    trace = rt.run_until(1_800_000)
    checked = 0
    for d in trace.deliveries:
        allowed = {
            (p.content.label, p.content.qualifier, p.kind.value)
            for p in rt.apps[d.app].analysis.edge_pairs(*d.edge)
        }
        for pair in d.pairs:
            assert tuple(pair) in allowed, (d.app, d.edge, pair)
            checked += 1
    elapsed = time.perf_counter() - t0
    assert checked >= 1_000
    assert elapsed < 60.0
    passed(
        capsys,
        3,
        f"{checked} observed (content, kind) pairs contained in static types"
        f" across 500 manifests in {elapsed:.1f} s",
    )


def test_c04_join_emissions_match_reference(capsys):
    cases = list(enumerate_cases(max_len=3))
    total = 0
    for mode in ("blocking", "nonblocking"):
        for window_ms in (50, 100):
            props = {"datatype": "scalar", "mode": mode, "inputs_expected": 2}
            if mode == "blocking":
                props["window_ms"] = window_ms
            spec = NodeSpec("j", "join", props, [])
            for arrivals in cases:
                state = JoinState(spec)
                got = []
                for port, ts, tag in arrivals:
                    item = make_raw_item(
                        DeviceDescriptor("d", "d", DataKind.SCALAR), ScalarPayload(1.0, tag)
                    )
                    out = state.step(port, Message([item], TriggerMeta(tag, ts)), ts)
                    got.append(None if out is None else [i.data.unit for i in out.items])
                assert got == reference_emissions(arrivals, mode, window_ms), (
                    mode,
                    window_ms,
                    arrivals,
                )
                total += 1
    passed(capsys, 4, f"{total} arrival schedules agree with the reference state machine")


def test_c05_rate_limit_controls_pull_and_egress_counts(tmp_path, capsys):
    def day_counts(interval_ms: int) -> tuple[int, int]:
        rt = runtime(tmp_path, name=f"wl-{interval_ms}.ndjson")
        app = install(rt, "water-leak")
        rt.allow_all(app.id)
        if interval_ms != 1_800_000:
            rt.apply_rewrite(app.id, plan_rate_limit(app.manifest, "timer", interval_ms))
        trace = rt.run_until(MS_PER_DAY)
        pulls = sum(1 for d in trace.deliveries if d.edge == ("cam", "floor-d"))
        return pulls, len(trace.egress)

    assert day_counts(1_800_000) == (48, 48)
    assert day_counts(7_200_000) == (12, 12)
    passed(capsys, 5, "24 h at 30 min -> 48 pulls / 48 egress; at 120 min -> 12 / 12")


def test_c06_time_schedule_blocks_window(tmp_path, capsys):
    window = (17 * 3_600_000, 19 * 3_600_000)
    rt = runtime(tmp_path)
    app = install(rt, "hello-visitor")
    rt.allow_all(app.id)
    rt.apply_rewrite(app.id, plan_time_schedule(app.manifest, "upload", [window]))
    rt.run_until(MS_PER_DAY)
    records = [r for r in rt.ledger.records if r.app == app.id and not r.blocked]
    inside = [r for r in records if window[0] <= r.ts % MS_PER_DAY < window[1]]
    outside = [r for r in records if r not in inside]
    assert inside == []
    assert len(outside) > 0
    passed(capsys, 6, f"0 egress records inside 17:00-19:00, {len(outside)} outside")


def test_c07_denied_permission_means_zero_connections(tmp_path, capsys):
    allowed = runtime(tmp_path, name="allowed.ndjson")
    app = install(allowed, "hello-visitor")
    allowed.allow_all(app.id)
    allowed.run_until(MS_PER_DAY)
    sent = sum(e.sent_items for e in allowed.trace.egress)
    assert sent > 0
    assert len(allowed.transport.deliveries) > 0

    denied = runtime(tmp_path, name="denied.ndjson")
    app = install(denied, "hello-visitor")
    denied.set_permission(app.id, rt_perm_id(denied, app.id), allow=False)
    denied.run_until(MS_PER_DAY)
    assert denied.transport.deliveries == []
    blocked = sum(e.blocked_items for e in denied.trace.egress)
    ledger_blocked = sum(r.items for r in denied.ledger.records if r.blocked)
    assert blocked == ledger_blocked == sent
    passed(capsys, 7, f"0 outbound connections when denied; {blocked} blocked == {sent} sent when allowed")


def rt_perm_id(rt: HubRuntime, app_id: str) -> str:
    (perm,) = rt.permissions(app_id)
    return perm["id"]


def test_c08_cropping_minimizes_egress_bytes(tmp_path, capsys):
    def cycle_bytes(manifest_text: str, name: str) -> int:
        rt = runtime(tmp_path, name=f"{name}.ndjson")
        app = rt.install_app(parse_manifest(manifest_text), BINDINGS["hello-visitor"])
        rt.allow_all(app.id)
        rt.run_until(6_000_000)
        return sum(e.sent_bytes for e in rt.trace.egress)

    crop = cycle_bytes((MANIFESTS / "hello-visitor.json").read_text(), "crop")
    raw = cycle_bytes(json.dumps(RAW_VARIANT), "raw")
    assert crop == CROP_EGRESS_BYTES
    assert raw == RAW_EGRESS_BYTES
    ratio = crop / raw
    assert ratio <= 0.15
    passed(capsys, 8, f"face crops ship {crop} of {raw} raw bytes ({ratio:.1%} <= 15%)")


def test_c09_ledger_agrees_with_trace_and_file(tmp_path, capsys):
    rt = runtime(tmp_path)
    hv = install(rt, "hello-visitor")
    rt.allow_all(hv.id)
    install(rt, "water-leak")  # left pending: contributes blocked rows
    rt.run_until(2 * MS_PER_DAY)

    (row,) = rt.query_egress(app=hv.id)
    trace_sent = sum(e.sent_items for e in rt.trace.egress if e.app == hv.id)
    trace_bytes = sum(e.sent_bytes for e in rt.trace.egress if e.app == hv.id)
    trace_blocked = sum(e.blocked_items for e in rt.trace.egress if e.app == hv.id)

    parsed = [json.loads(line) for line in rt.ledger.path.read_text().splitlines()]
    file_sent = sum(r["items"] for r in parsed if r["app"] == hv.id and not r["blocked"])
    file_bytes = sum(r["bytes"] for r in parsed if r["app"] == hv.id and not r["blocked"])
    file_blocked = sum(r["items"] for r in parsed if r["app"] == hv.id and r["blocked"])

    assert row["items"] == trace_sent == file_sent
    assert row["bytes"] == trace_bytes == file_bytes
    assert row["blocked_items"] == trace_blocked == file_blocked
    assert rt.ledger.verify_consistency()
    passed(
        capsys,
        9,
        f"query == trace == file parse: {row['items']} items,"
        f" {row['bytes']} bytes, {row['blocked_items']} blocked",
    )


def test_c10_operator_throughput_floor(capsys):
    import cv2

    cv2.setNumThreads(1)
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    img = ImagePayload(800, 600, rng.integers(0, 256, 800 * 600 * 3, dtype=np.uint8).tobytes())
    dev = DeviceDescriptor("camera", "bench", DataKind.IMAGE)

    def msg() -> Message:
        item = make_raw_item(dev, img)
        item.contenttype = ContentLabel("raw")
        return Message([item], TriggerMeta("bench", 0))

    n_filter = 60
    blur = NodeSpec("blur", "noisify", {"datatype": "image", "magnitude_percent": 25, "seed": 1}, [])
    start = time.perf_counter()
    for i in range(n_filter):
        apply_filter(blur, msg(), ts=i)
    filter_rate = n_filter / (time.perf_counter() - start)

    n_inf = 60
    extract = NodeSpec("lum", "extract", {"datatype": "image", "target": "brightness"}, [])
    provider = BrightnessExtractor()
    start = time.perf_counter()
    for i in range(n_inf):
        apply_inference(extract, msg(), provider, ts=i)
    inference_rate = n_inf / (time.perf_counter() - start)

    elapsed = time.perf_counter() - t0
    assert filter_rate >= 100.0
    assert inference_rate >= 25.0
    assert elapsed < 30.0
    passed(
        capsys,
        10,
        f"800x600 single worker: {filter_rate:.0f} filters/s (floor 100),"
        f" {inference_rate:.0f} inferences/s (floor 25)",
    )
