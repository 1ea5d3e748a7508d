import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_manifest
from gen import generate_valid
from privhub.analyzer import derive_egress_permissions, infer_edge_types
from privhub.manifest import manifest_hash, serialize_manifest, validate_manifest
from privhub.providers import MS_PER_DAY
from privhub.rewriter import (
    SCHEDULE_TICK_MS,
    NotAnInjectNode,
    NotANetworkNode,
    RewriteError,
    RewriteInvalid,
    SetProperty,
    TypeMismatchAtSplice,
    UnsupportedFilterKind,
    WouldIncreaseRate,
    apply_plan,
    manifest_diff,
    normalize_windows,
    plan_content_filter,
    plan_rate_limit,
    plan_time_schedule,
)

HOUR = 3_600_000


class TestRateLimit:
    def test_slows_down(self):
        m = fixture_manifest("water-leak")
        plan = plan_rate_limit(m, "timer", 7_200_000)
        out = apply_plan(m, plan)
        assert out.node("timer").properties["interval_ms"] == 7_200_000
        # original untouched
        assert m.node("timer").properties["interval_ms"] == 1_800_000

    def test_equal_interval_is_identity(self):
        m = fixture_manifest("water-leak")
        plan = plan_rate_limit(m, "timer", 1_800_000)
        assert plan.is_identity
        assert manifest_hash(apply_plan(m, plan)) == manifest_hash(m)

    def test_speeding_up_rejected(self):
        m = fixture_manifest("water-leak")
        with pytest.raises(WouldIncreaseRate):
            plan_rate_limit(m, "timer", 60_000)

    def test_non_inject_rejected(self):
        m = fixture_manifest("water-leak")
        with pytest.raises(NotAnInjectNode):
            plan_rate_limit(m, "cam", 7_200_000)

    def test_diff_is_local(self):
        m = fixture_manifest("water-leak")
        plan = plan_rate_limit(m, "timer", 7_200_000)
        diff = manifest_diff(m, apply_plan(m, plan))
        changed = [l for l in diff.splitlines() if l.startswith(("+", "-")) and not l.startswith(("+++", "---"))]
        assert len(changed) == 2
        assert all("interval_ms" in l for l in changed)

    def test_invalid_value_rejected_atomically(self):
        m = fixture_manifest("water-leak")
        from privhub.rewriter import RewritePlan

        bad = RewritePlan(note="bad", steps=[SetProperty("timer", "interval_ms", -5)])
        with pytest.raises(RewriteInvalid):
            apply_plan(m, bad)
        assert m.node("timer").properties["interval_ms"] == 1_800_000

    def test_permissions_unchanged_by_rate_limit(self):
        m = fixture_manifest("water-leak")
        before = [p.id for p in derive_egress_permissions(m, infer_edge_types(m))]
        out = apply_plan(m, plan_rate_limit(m, "timer", 7_200_000))
        after = [p.id for p in derive_egress_permissions(out, infer_edge_types(out))]
        assert before == after


class TestNormalizeWindows:
    def test_merge_overlaps(self):
        assert normalize_windows([[0, 10], [5, 20], [30, 40]]) == [(0, 20), (30, 40)]

    def test_wraparound_split(self):
        got = normalize_windows([[22 * HOUR, 6 * HOUR]])
        assert got == [(0, 6 * HOUR), (22 * HOUR, MS_PER_DAY)]

    def test_out_of_day_rejected(self):
        with pytest.raises(RewriteError):
            normalize_windows([[-5, 10]])
        with pytest.raises(RewriteError):
            normalize_windows([[20, MS_PER_DAY + 99]])

    def test_empty_windows_dropped(self):
        assert normalize_windows([[5, 5]]) == []


class TestTimeSchedule:
    def test_inserts_gate_chain(self):
        m = fixture_manifest("hello-visitor")
        plan = plan_time_schedule(m, "upload", [[17 * HOUR, 19 * HOUR]])
        out = apply_plan(m, plan)
        added = sorted(set(n.id for n in out.graph) - set(n.id for n in m.graph))
        assert added == ["sched-allow", "sched-clock", "sched-flag", "sched-gate", "sched-tick"]
        assert out.node("crop-faces").wires == ["sched-gate"]
        assert sorted(out.incoming("upload")) == ["sched-gate"]
        assert validate_manifest(out).ok

    def test_windows_widened_by_one_tick(self):
        m = fixture_manifest("hello-visitor")
        out = apply_plan(m, plan_time_schedule(m, "upload", [[17 * HOUR, 19 * HOUR]]))
        params = out.node("sched-allow").properties["params"]
        assert params["blocked_windows"] == [[17 * HOUR - SCHEDULE_TICK_MS, 19 * HOUR]]

    def test_widening_wraps_below_midnight(self):
        m = fixture_manifest("hello-visitor")
        out = apply_plan(m, plan_time_schedule(m, "upload", [[0, HOUR]]))
        windows = out.node("sched-allow").properties["params"]["blocked_windows"]
        # single wrapped window; the classifier treats start > end as midnight wrap
        assert windows == [[MS_PER_DAY - SCHEDULE_TICK_MS, HOUR]]

    def test_non_network_target_rejected(self):
        m = fixture_manifest("hello-visitor")
        with pytest.raises(NotANetworkNode):
            plan_time_schedule(m, "crop-faces", [[0, HOUR]])

    def test_no_windows_is_identity(self):
        m = fixture_manifest("hello-visitor")
        plan = plan_time_schedule(m, "upload", [])
        assert plan.is_identity

    def test_fresh_ids_avoid_collisions(self):
        m = fixture_manifest("hello-visitor")
        once = apply_plan(m, plan_time_schedule(m, "upload", [[0, HOUR]]))
        # gate becomes the single parent, so a second schedule stacks cleanly
        twice = apply_plan(once, plan_time_schedule(once, "upload", [[2 * HOUR, 3 * HOUR]]))
        ids = [n.id for n in twice.graph]
        assert len(ids) == len(set(ids))
        assert "sched-gate-2" in ids
        assert validate_manifest(twice).ok


class TestContentFilter:
    def test_splices_on_all_outgoing_wires(self):
        m = fixture_manifest("hello-visitor")
        plan = plan_content_filter(m, "crop-faces", "noisify", {"datatype": "image", "magnitude_percent": 10, "seed": 1})
        out = apply_plan(m, plan)
        assert out.node("crop-faces").wires == ["noisify-guard"]
        assert out.node("noisify-guard").wires == ["upload"]
        assert validate_manifest(out).ok

    def test_descriptions_change_after_blur(self):
        m = fixture_manifest("hello-visitor")
        out = apply_plan(
            m, plan_content_filter(m, "crop-faces", "noisify", {"datatype": "image", "magnitude_percent": 10, "seed": 1})
        )
        perms = derive_egress_permissions(out, infer_edge_types(out))
        assert [p.display for p in perms] == ["anonymized face image"]

    def test_kind_mismatch_rejected(self):
        m = fixture_manifest("hello-visitor")
        with pytest.raises(TypeMismatchAtSplice):
            plan_content_filter(m, "crop-faces", "noisify", {"datatype": "audio", "magnitude_percent": 10, "seed": 1})

    def test_only_filter_kinds_allowed(self):
        m = fixture_manifest("hello-visitor")
        with pytest.raises(UnsupportedFilterKind):
            plan_content_filter(m, "crop-faces", "detect", {"target": "face", "datatype": "image"})

    def test_sink_target_rejected(self):
        m = fixture_manifest("hello-visitor")
        with pytest.raises(RewriteError):
            plan_content_filter(m, "upload", "noisify", {"datatype": "image", "magnitude_percent": 10, "seed": 1})


class TestDiff:
    def test_identity_diff_empty(self):
        m = fixture_manifest("tv-usage")
        assert manifest_diff(m, m) == ""

    def test_diff_parses_back(self):
        m = fixture_manifest("tv-usage")
        out = apply_plan(m, plan_rate_limit(m, "every-week", 2 * 604800000))
        diff = manifest_diff(m, out)
        assert "+" in diff and "interval_ms" in diff
        assert serialize_manifest(out) != serialize_manifest(m)


class TestOnGeneratedManifests:
    @given(st.integers(min_value=0, max_value=5000))
    @settings(max_examples=40, deadline=None)
    def test_rate_limit_keeps_manifests_valid(self, seed):
        rng = random.Random(seed)
        m = generate_valid(seed, 1)[0]
        injects = [n for n in m.graph if n.kind == "inject"]
        if not injects:
            return
        target = rng.choice(injects)
        factor = rng.choice([2, 3, 10])
        plan = plan_rate_limit(m, target.id, int(target.properties["interval_ms"]) * factor)
        out = apply_plan(m, plan)
        assert validate_manifest(out).ok
        # locality: everything except that one property identical
        a, b = m.to_obj(), out.to_obj()
        for na, nb in zip(a["graph"], b["graph"]):
            if na["id"] != target.id:
                assert na == nb

    @given(st.integers(min_value=0, max_value=5000))
    @settings(max_examples=25, deadline=None)
    def test_schedule_keeps_manifests_valid(self, seed):
        m = generate_valid(seed, 1)[0]
        network = [n for n in m.graph if n.kind in ("post", "publish", "stream")]
        if not network or len(m.incoming(network[0].id)) != 1:
            return
        plan = plan_time_schedule(m, network[0].id, [[HOUR, 2 * HOUR]])
        out = apply_plan(m, plan)
        assert validate_manifest(out).ok
