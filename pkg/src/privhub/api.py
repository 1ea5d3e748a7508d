"""HTTP facade for the hub runtime.

One process owns one HubRuntime; every route takes a lock, so handlers
may mutate engine state freely.  Responses are plain JSON built from
the core dataclasses; pydantic is used only to validate request bodies.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field, model_validator

from . import RUNTIME_VERSION, __version__
from .analyzer import derive_egress_permissions, generate_descriptions, infer_edge_types
from .manifest import Manifest, ParseError, parse_manifest, serialize_manifest, validate_manifest
from .model import DataKind, PrivHubError, canonical_json
from .rewriter import (
    RewriteError,
    RewriteInvalid,
    apply_plan,
    manifest_diff,
    plan_content_filter,
    plan_rate_limit,
    plan_time_schedule,
)
from .runtime import HubRuntime, InstallRejected, InterceptRule, UnknownApp, UnknownPermission
from .runtime.drivers import IncompatibleBinding, MissingBinding


class InstallRequest(BaseModel):
    manifest: dict | str
    bindings: dict[str, str] = Field(default_factory=dict)
    app_id: str | None = None

    def manifest_text(self) -> str:
        if isinstance(self.manifest, str):
            return self.manifest
        return canonical_json(self.manifest)


class AnalyzeRequest(BaseModel):
    manifest: dict | str

    def manifest_text(self) -> str:
        if isinstance(self.manifest, str):
            return self.manifest
        return canonical_json(self.manifest)


class PermissionUpdate(BaseModel):
    id: str
    state: Literal["allowed", "denied"]


class RewriteRequest(BaseModel):
    kind: Literal["rate_limit", "time_schedule", "content_filter"]
    node: str
    interval_ms: int | None = None
    blocked_windows: list[list[int]] | None = None
    filter_kind: str | None = None
    properties: dict[str, Any] = Field(default_factory=dict)
    dry_run: bool = False

    @model_validator(mode="after")
    def _check_params(self) -> "RewriteRequest":
        if self.kind == "rate_limit" and self.interval_ms is None:
            raise ValueError("rate_limit needs interval_ms")
        if self.kind == "time_schedule" and not self.blocked_windows:
            raise ValueError("time_schedule needs blocked_windows")
        if self.kind == "content_filter" and not self.filter_kind:
            raise ValueError("content_filter needs filter_kind")
        return self


class InterceptRequest(BaseModel):
    label: str
    kind: str
    transform: Literal["spoof", "noisify"]
    params: dict[str, Any] = Field(default_factory=dict)


class ClockAdvance(BaseModel):
    to_ms: int | None = None
    by_ms: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _exactly_one(self) -> "ClockAdvance":
        if (self.to_ms is None) == (self.by_ms is None):
            raise ValueError("give exactly one of to_ms or by_ms")
        return self


def _app_summary(rt: HubRuntime, app) -> dict:
    return {
        "id": app.id,
        "name": app.manifest.meta.name,
        "version": app.manifest.meta.version,
        "purpose": app.manifest.meta.purpose,
        "state": app.state,
        "installed_at": app.installed_at,
        "manifest_hash": app.manifest_hash,
        "bindings": dict(app.bindings),
        "pending_permissions": sum(1 for s in app.permissions.values() if s == "pending"),
    }


def _analysis_obj(manifest: Manifest) -> dict:
    analysis = infer_edge_types(manifest)
    return {
        "manifest_hash": analysis.manifest_hash,
        "order": list(analysis.order),
        "edges": [ann.to_obj() for ann in analysis.edges.values()],
        "warnings": list(analysis.warnings),
        "descriptions": [d.to_obj() for d in generate_descriptions(manifest, analysis)],
        "permissions": [p.to_obj() for p in derive_egress_permissions(manifest, analysis)],
    }


def _build_plan(manifest: Manifest, req: RewriteRequest):
    if req.kind == "rate_limit":
        return plan_rate_limit(manifest, req.node, req.interval_ms)
    if req.kind == "time_schedule":
        return plan_time_schedule(manifest, req.node, [tuple(w) for w in req.blocked_windows])
    return plan_content_filter(manifest, req.node, req.filter_kind, req.properties)


def create_app(
    runtime: HubRuntime | None = None,
    data_dir: Path | str | None = None,
    ledger_path: Path | str | None = None,
    frontend_dir: Path | str | None = None,
) -> FastAPI:
    if runtime is None:
        data_dir = data_dir or os.environ.get("PRIVHUB_DATA_DIR") or _default_data_dir()
        ledger_path = ledger_path or os.environ.get("PRIVHUB_LEDGER")
        runtime = HubRuntime(data_dir=data_dir, ledger_path=ledger_path)
    if frontend_dir is None and os.environ.get("PRIVHUB_FRONTEND"):
        frontend_dir = os.environ["PRIVHUB_FRONTEND"]

    app = FastAPI(title="privhub", version=__version__)
    app.state.runtime = runtime
    app.state.lock = threading.Lock()
    rt = runtime

    def fail(status: int, code: str, message: str, **extra) -> HTTPException:
        return HTTPException(status_code=status, detail={"code": code, "message": message, **extra})

    def parse_or_422(text: str) -> Manifest:
        try:
            return parse_manifest(text)
        except ParseError as e:
            raise fail(422, "PARSE", str(e), line=e.line)

    def require_app(app_id: str):
        try:
            return rt._require_app(app_id)
        except UnknownApp:
            raise fail(404, "UNKNOWN_APP", f"no app {app_id!r}")

    @app.exception_handler(PrivHubError)
    def _privhub_error(_req: Request, exc: PrivHubError):
        return JSONResponse(status_code=500, content={"detail": {"code": "INTERNAL", "message": str(exc)}})

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "runtime_version": RUNTIME_VERSION,
            "package_version": __version__,
            "clock_ms": rt.clock.now_ms,
            "apps": len(rt.apps),
        }

    @app.post("/analyze")
    def analyze(req: AnalyzeRequest) -> dict:
        manifest = parse_or_422(req.manifest_text())
        report = validate_manifest(manifest)
        out: dict = {"valid": report.ok, "issues": report.to_obj()["issues"]}
        if report.ok:
            out.update(_analysis_obj(manifest))
        return out

    @app.get("/apps")
    def list_apps() -> list[dict]:
        with app.state.lock:
            return [_app_summary(rt, a) for a in sorted(rt.apps.values(), key=lambda a: a.id)]

    @app.post("/apps", status_code=201)
    def install(req: InstallRequest) -> dict:
        manifest = parse_or_422(req.manifest_text())
        with app.state.lock:
            try:
                state = rt.install_app(manifest, bindings=req.bindings, app_id=req.app_id)
            except InstallRejected as e:
                raise fail(422, "INVALID_MANIFEST", "manifest failed validation", issues=e.report.to_obj()["issues"])
            except (MissingBinding, IncompatibleBinding) as e:
                raise fail(422, "BINDING", str(e))
            except PrivHubError as e:
                raise fail(422, "INSTALL", str(e))
            return _app_summary(rt, state)

    @app.get("/apps/{app_id}")
    def app_detail(app_id: str) -> dict:
        with app.state.lock:
            state = require_app(app_id)
            out = _app_summary(rt, state)
            out["manifest"] = state.manifest.to_obj()
            out["analysis_warnings"] = list(state.analysis.warnings)
            return out

    @app.delete("/apps/{app_id}", status_code=204)
    def uninstall(app_id: str) -> None:
        with app.state.lock:
            require_app(app_id)
            rt.uninstall_app(app_id)

    @app.post("/apps/{app_id}/pause")
    def pause(app_id: str) -> dict:
        with app.state.lock:
            require_app(app_id)
            rt.pause_app(app_id)
            return {"id": app_id, "state": rt.apps[app_id].state}

    @app.post("/apps/{app_id}/resume")
    def resume(app_id: str) -> dict:
        with app.state.lock:
            require_app(app_id)
            rt.resume_app(app_id)
            return {"id": app_id, "state": rt.apps[app_id].state}

    @app.get("/apps/{app_id}/descriptions")
    def descriptions(app_id: str) -> list[dict]:
        with app.state.lock:
            require_app(app_id)
            return [d.to_obj() for d in rt.descriptions(app_id)]

    @app.get("/apps/{app_id}/permissions")
    def permissions(app_id: str) -> list[dict]:
        with app.state.lock:
            require_app(app_id)
            return rt.permissions(app_id)

    @app.put("/apps/{app_id}/permissions")
    def set_permission(app_id: str, req: PermissionUpdate) -> list[dict]:
        with app.state.lock:
            require_app(app_id)
            try:
                rt.set_permission(app_id, req.id, allow=req.state == "allowed")
            except UnknownPermission:
                raise fail(422, "UNKNOWN_PERMISSION", f"no permission {req.id!r} on {app_id!r}")
            return rt.permissions(app_id)

    @app.get("/apps/{app_id}/label")
    def label(app_id: str) -> dict:
        with app.state.lock:
            require_app(app_id)
            return rt.label(app_id).to_obj()

    @app.get("/apps/{app_id}/manifest")
    def manifest_text(app_id: str) -> dict:
        with app.state.lock:
            state = require_app(app_id)
            return {"id": app_id, "manifest": serialize_manifest(state.manifest)}

    @app.post("/apps/{app_id}/rewrites")
    def rewrite(app_id: str, req: RewriteRequest) -> dict:
        with app.state.lock:
            state = require_app(app_id)
            try:
                plan = _build_plan(state.manifest, req)
                new_manifest = apply_plan(state.manifest, plan)
            except RewriteInvalid as e:
                raise fail(422, "REWRITE_INVALID", "rewritten manifest failed validation", issues=e.report.to_obj()["issues"])
            except (RewriteError, KeyError, ValueError) as e:
                raise fail(422, type(e).__name__, str(e))
            diff = manifest_diff(state.manifest, new_manifest)
            out = {
                "note": plan.note,
                "identity": plan.is_identity,
                "diff": diff,
                "applied": False,
            }
            if not req.dry_run and not plan.is_identity:
                rt.apply_rewrite(app_id, new_manifest)
                out["applied"] = True
                out["permissions"] = rt.permissions(app_id)
            return out

    @app.post("/apps/{app_id}/intercepts")
    def intercept(app_id: str, req: InterceptRequest) -> list[dict]:
        with app.state.lock:
            require_app(app_id)
            try:
                rule = InterceptRule(req.label, DataKind(req.kind), req.transform, dict(req.params))
                rt.intercept_transform(app_id, rule)
            except (PrivHubError, ValueError) as e:
                raise fail(422, "INTERCEPT", str(e))
            return rt.permissions(app_id)

    @app.post("/apps/{app_id}/inject/{node_id}", status_code=202)
    def inject(app_id: str, node_id: str) -> dict:
        with app.state.lock:
            require_app(app_id)
            before = len(rt.trace.egress)
            try:
                rt.fire_inject(app_id, node_id)
            except (KeyError, ValueError) as e:
                raise fail(422, "INJECT", str(e))
            return {"fired": node_id, "egress_events": len(rt.trace.egress) - before}

    @app.get("/egress")
    def egress(
        app_id: str | None = Query(default=None, alias="app"),
        content: str | None = None,
        from_ms: int | None = None,
        to_ms: int | None = None,
        node: str | None = None,
        group_by: str | None = None,
    ) -> list[dict]:
        with app.state.lock:
            try:
                return rt.query_egress(
                    app=app_id, content=content, ts_from=from_ms, ts_to=to_ms, node=node, group_by=group_by
                )
            except ValueError as e:
                raise fail(422, "QUERY", str(e))

    @app.get("/trace")
    def trace(app_id: str | None = Query(default=None, alias="app"), limit: int = Query(default=200, ge=1, le=2000)) -> dict:
        with app.state.lock:
            t = rt.trace
            deliveries = [d for d in t.deliveries if app_id is None or d.app == app_id][-limit:]
            egress_events = [e for e in t.egress if app_id is None or e.app == app_id][-limit:]
            diags = t.diagnostics[-limit:]
            return {
                "deliveries": [d.to_obj() for d in deliveries],
                "egress": [e.to_obj() for e in egress_events],
                "diagnostics": [d.to_obj() for d in diags],
            }

    @app.get("/clock")
    def clock() -> dict:
        return {"now_ms": rt.clock.now_ms}

    @app.post("/clock/advance")
    def advance(req: ClockAdvance) -> dict:
        with app.state.lock:
            target = req.to_ms if req.to_ms is not None else rt.clock.now_ms + req.by_ms
            if target < rt.clock.now_ms:
                raise fail(422, "CLOCK", "cannot run backwards")
            before_e, before_d = len(rt.trace.egress), len(rt.trace.deliveries)
            rt.run_until(target)
            return {
                "now_ms": rt.clock.now_ms,
                "egress_events": len(rt.trace.egress) - before_e,
                "deliveries": len(rt.trace.deliveries) - before_d,
            }

    @app.get("/drivers")
    def drivers() -> list[dict]:
        return [
            {"name": d.name, "kind": d.kind.value, "push_period_ms": d.push_period_ms}
            for d in sorted(rt.drivers.values(), key=lambda d: d.name)
        ]

    @app.get("/fixtures")
    def fixtures() -> list[dict]:
        out: list[dict] = []
        manifest_dir = rt.data_dir / "manifests" if rt.data_dir else None
        if not manifest_dir or not manifest_dir.is_dir():
            return out
        hints_path = manifest_dir / "bindings.json"
        hints = json.loads(hints_path.read_text()) if hints_path.is_file() else {}
        for path in sorted(manifest_dir.glob("*.json")):
            if path.name == "bindings.json":
                continue
            try:
                m = parse_manifest(path.read_text())
            except ParseError:
                continue
            out.append(
                {
                    "slug": path.stem,
                    "name": m.meta.name,
                    "version": m.meta.version,
                    "purpose": m.meta.purpose,
                    "manifest": m.to_obj(),
                    "suggested_bindings": hints.get(path.stem, {}),
                }
            )
        return out

    if frontend_dir:
        front = Path(frontend_dir)

        @app.get("/ui")
        def ui_index():
            index = front / "index.html"
            if not index.is_file():
                raise fail(404, "NO_UI", "frontend not built")
            return FileResponse(index)

        @app.get("/ui/{asset:path}")
        def ui_asset(asset: str):
            target = (front / asset).resolve()
            if not str(target).startswith(str(front.resolve())) or not target.is_file():
                raise fail(404, "NO_ASSET", asset)
            return FileResponse(target)

    return app


def _default_data_dir() -> Path | None:
    here = Path.cwd() / "fixtures"
    return here if here.is_dir() else None


__all__ = ["create_app"]
