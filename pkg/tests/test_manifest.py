import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import random_manifest
from privhub.manifest import (
    ParseError,
    UnknownOperatorKind,
    load_manifest,
    manifest_hash,
    parse_manifest,
    serialize_manifest,
    topological_order,
    validate_manifest,
)
from conftest import MANIFESTS, fixture_manifest

SLUGS = sorted(p.stem for p in MANIFESTS.glob("*.json") if p.stem != "bindings")


def minimal_doc(**overrides) -> dict:
    doc = {
        "meta": {
            "name": "t",
            "version": "1.0.0",
            "author": "a",
            "purpose": "p",
            "min_runtime_version": "1.0",
        },
        "security": {"allowed_endpoints": ["https://x.example"], "require_tls": True},
        "graph": [
            {
                "id": "src",
                "kind": "push",
                "properties": {"device": "cam", "event": "motion", "datatype": "image"},
                "wires": ["out"],
            },
            {
                "id": "out",
                "kind": "post",
                "properties": {"destination": "https://x.example", "datatype": "image"},
                "wires": [],
            },
        ],
    }
    doc.update(overrides)
    return doc


def parse_doc(doc):
    return parse_manifest(json.dumps(doc))


def codes(report):
    return {i["code"] for i in report.to_obj()["issues"]}


def error_codes(report):
    return {i["code"] for i in report.to_obj()["issues"] if i["severity"] == "error"}


class TestParsing:
    @pytest.mark.parametrize("slug", SLUGS)
    def test_fixture_manifests_parse_and_validate(self, slug):
        m = fixture_manifest(slug)
        report = validate_manifest(m)
        assert report.ok, report.to_obj()

    @pytest.mark.parametrize("slug", SLUGS)
    def test_serialization_is_stable(self, slug):
        m = fixture_manifest(slug)
        text = serialize_manifest(m)
        again = serialize_manifest(parse_manifest(text))
        assert text == again

    def test_bad_json_reports_line(self):
        with pytest.raises(ParseError) as e:
            parse_manifest('{\n "meta": [,]\n}')
        assert e.value.line == 2

    def test_unknown_kind(self):
        doc = minimal_doc()
        doc["graph"][0]["kind"] = "teleport"
        with pytest.raises(UnknownOperatorKind):
            parse_doc(doc)

    def test_unknown_top_level_key(self):
        doc = minimal_doc()
        doc["extra"] = 1
        with pytest.raises(ParseError):
            parse_doc(doc)

    def test_wires_must_be_strings(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = [3]
        with pytest.raises(ParseError):
            parse_doc(doc)

    def test_missing_meta_field(self):
        doc = minimal_doc()
        del doc["meta"]["purpose"]
        with pytest.raises(ParseError):
            parse_doc(doc)


class TestHash:
    def test_node_order_does_not_matter(self):
        doc = minimal_doc()
        a = parse_doc(doc)
        doc["graph"].reverse()
        b = parse_doc(doc)
        assert manifest_hash(a) == manifest_hash(b)

    def test_property_change_changes_hash(self):
        a = parse_doc(minimal_doc())
        doc = minimal_doc()
        doc["graph"][0]["properties"]["event"] = "door"
        b = parse_doc(doc)
        assert manifest_hash(a) != manifest_hash(b)


class TestValidation:
    def test_duplicate_node_id(self):
        doc = minimal_doc()
        doc["graph"].append(dict(doc["graph"][0]))
        assert "DUPLICATE_NODE_ID" in error_codes(validate_manifest(parse_doc(doc)))

    def test_dangling_wire(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = ["ghost"]
        assert "DANGLING_WIRE" in error_codes(validate_manifest(parse_doc(doc)))

    def test_duplicate_wire(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = ["out", "out"]
        assert "DUPLICATE_WIRE" in error_codes(validate_manifest(parse_doc(doc)))

    def test_cycle(self):
        doc = minimal_doc()
        doc["graph"] = [
            {"id": "a", "kind": "debug", "properties": {"label": "x"}, "wires": ["b"]},
            {"id": "b", "kind": "debug", "properties": {"label": "x"}, "wires": ["a"]},
        ]
        assert "CYCLE" in error_codes(validate_manifest(parse_doc(doc)))

    def test_multi_input_non_join(self):
        doc = minimal_doc()
        doc["graph"].insert(
            1,
            {
                "id": "src2",
                "kind": "push",
                "properties": {"device": "cam2", "event": "motion", "datatype": "image"},
                "wires": ["out"],
            },
        )
        assert "MULTI_INPUT_NON_JOIN" in error_codes(validate_manifest(parse_doc(doc)))

    def test_provider_input_only_from_inject(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = ["pull1"]
        doc["graph"].insert(
            1,
            {"id": "pull1", "kind": "pull", "properties": {"device": "d", "datatype": "image"}, "wires": ["out"]},
        )
        assert "PROVIDER_INPUT" in error_codes(validate_manifest(parse_doc(doc)))

    def test_network_node_must_be_sink(self):
        doc = minimal_doc()
        doc["graph"][1]["wires"] = ["tail"]
        doc["graph"].append({"id": "tail", "kind": "debug", "properties": {"label": "x"}, "wires": []})
        assert "NETWORK_DOWNSTREAM" in error_codes(validate_manifest(parse_doc(doc)))

    def test_endpoint_not_allowed(self):
        doc = minimal_doc()
        doc["graph"][1]["properties"]["destination"] = "https://evil.example"
        assert "ENDPOINT_NOT_ALLOWED" in error_codes(validate_manifest(parse_doc(doc)))

    def test_non_network_sink(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = []
        del doc["graph"][1]
        assert "NON_NETWORK_SINK" in error_codes(validate_manifest(parse_doc(doc)))

    def test_join_input_mismatch(self):
        doc = minimal_doc()
        doc["graph"][0]["wires"] = ["j"]
        doc["graph"].insert(
            1,
            {
                "id": "j",
                "kind": "join",
                "properties": {"mode": "blocking", "window_ms": 50, "inputs_expected": 2},
                "wires": ["out"],
            },
        )
        assert "JOIN_INPUT_MISMATCH" in error_codes(validate_manifest(parse_doc(doc)))

    def test_runtime_version_too_new(self):
        doc = minimal_doc()
        doc["meta"]["min_runtime_version"] = "9.9"
        assert "RUNTIME_VERSION" in error_codes(validate_manifest(parse_doc(doc)))

    def test_unreachable_node_warns(self):
        doc = minimal_doc()
        doc["graph"].append({"id": "island", "kind": "debug", "properties": {"label": "x"}, "wires": []})
        report = validate_manifest(parse_doc(doc))
        assert report.ok
        assert "UNREACHABLE_NODE" in codes(report)

    def test_pull_without_inject_warns(self):
        doc = minimal_doc()
        doc["graph"][0] = {
            "id": "src",
            "kind": "pull",
            "properties": {"device": "d", "datatype": "image"},
            "wires": ["out"],
        }
        report = validate_manifest(parse_doc(doc))
        assert "NO_TRIGGER" in codes(report)


class TestPropertySchema:
    def test_missing_required(self):
        doc = minimal_doc()
        del doc["graph"][0]["properties"]["device"]
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))

    def test_push_event_is_optional(self):
        doc = minimal_doc()
        del doc["graph"][0]["properties"]["event"]
        assert validate_manifest(parse_doc(doc)).ok

    def test_unknown_property(self):
        doc = minimal_doc()
        doc["graph"][0]["properties"]["resolution"] = "hd"
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))

    def test_enum_violation(self):
        doc = minimal_doc()
        doc["graph"][0]["properties"]["datatype"] = "hologram"
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))

    def test_type_violation(self):
        doc = minimal_doc()
        doc["graph"][1]["properties"]["destination"] = 5
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))

    def test_conditional_requirement(self):
        doc = minimal_doc()
        doc["graph"][0] = {
            "id": "src",
            "kind": "inject",
            "properties": {"mode": "interval"},
            "wires": ["out"],
        }
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))

    def test_minimum_violation(self):
        doc = minimal_doc()
        doc["graph"][0] = {
            "id": "src",
            "kind": "inject",
            "properties": {"mode": "interval", "interval_ms": 0},
            "wires": ["out"],
        }
        assert "PROPERTY_SCHEMA" in error_codes(validate_manifest(parse_doc(doc)))


class TestTopologicalOrder:
    def test_lexicographic_among_ready(self):
        doc = minimal_doc()
        doc["graph"] = [
            {"id": "b", "kind": "push", "properties": {"device": "d", "event": "e", "datatype": "image"}, "wires": ["z"]},
            {"id": "a", "kind": "push", "properties": {"device": "d", "event": "e", "datatype": "image"}, "wires": ["z"]},
            {"id": "z", "kind": "join", "properties": {"mode": "nonblocking", "inputs_expected": 2}, "wires": ["out"]},
            {"id": "out", "kind": "post", "properties": {"destination": "https://x.example", "datatype": "image"}, "wires": []},
        ]
        m = parse_doc(doc)
        assert topological_order(m) == ["a", "b", "z", "out"]

    def test_cycle_raises(self):
        doc = minimal_doc()
        doc["graph"] = [
            {"id": "a", "kind": "debug", "properties": {"label": "x"}, "wires": ["b"]},
            {"id": "b", "kind": "debug", "properties": {"label": "x"}, "wires": ["a"]},
        ]
        with pytest.raises(ValueError):
            topological_order(parse_doc(doc))


class TestGeneratedManifests:
    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_generator_output_always_validates(self, seed):
        m = random_manifest(random.Random(seed))
        if len(m.graph) > 10:
            return
        report = validate_manifest(m)
        assert report.ok, report.to_obj()

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_serialize_parse_fixpoint(self, seed):
        m = random_manifest(random.Random(seed))
        text = serialize_manifest(m)
        assert serialize_manifest(parse_manifest(text)) == text
