"""Command line client for the hub service.

Except for `analyze` (pure static check, runs in-process) and `serve`,
every command talks HTTP to a running hub, so the CLI stays a thin
veneer over the same API the dashboard uses.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .analyzer import derive_egress_permissions, generate_descriptions, infer_edge_types
from .manifest import ParseError, parse_manifest, validate_manifest

DEFAULT_URL = "http://127.0.0.1:8787"


class Ctx:
    def __init__(self, url: str):
        self.url = url.rstrip("/")

    def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            r = httpx.request(method, self.url + path, timeout=60.0, **kwargs)
        except httpx.HTTPError as e:
            raise click.ClickException(f"cannot reach hub at {self.url}: {e}")
        if r.status_code >= 400:
            try:
                detail = r.json().get("detail")
            except ValueError:
                detail = r.text
            raise click.ClickException(f"{method} {path} -> {r.status_code}: {json.dumps(detail)}")
        return r


pass_ctx = click.make_pass_decorator(Ctx)


@click.group()
@click.option("--url", envvar="PRIVHUB_URL", default=DEFAULT_URL, show_default=True, help="Hub service base URL.")
@click.pass_context
def main(ctx: click.Context, url: str) -> None:
    """Inspect and steer smart home apps running on the hub."""
    ctx.obj = Ctx(url)


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Emit the full analysis as JSON.")
def analyze(manifest_path: Path, as_json: bool) -> None:
    """Validate a manifest and show what it would disclose."""
    text = manifest_path.read_text(encoding="utf-8")
    try:
        manifest = parse_manifest(text)
    except ParseError as e:
        if as_json:
            click.echo(json.dumps({"valid": False, "issues": [{"code": "PARSE", "message": str(e)}]}))
        else:
            click.echo(f"parse error: {e}", err=True)
        sys.exit(1)
    report = validate_manifest(manifest)
    issues = report.to_obj()["issues"]
    if not report.ok:
        if as_json:
            click.echo(json.dumps({"valid": False, "issues": issues}, indent=2))
        else:
            for i in issues:
                click.echo(f"{i['severity']}: [{i['code']}] {i['message']}", err=True)
        sys.exit(1)
    analysis = infer_edge_types(manifest)
    descriptions = generate_descriptions(manifest, analysis)
    permissions = derive_egress_permissions(manifest, analysis)
    if as_json:
        click.echo(
            json.dumps(
                {
                    "valid": True,
                    "issues": issues,
                    "descriptions": [d.to_obj() for d in descriptions],
                    "permissions": [p.to_obj() for p in permissions],
                    "warnings": list(analysis.warnings),
                },
                indent=2,
            )
        )
        return
    click.echo(f"{manifest.meta.name} {manifest.meta.version} - valid")
    for i in issues:
        click.echo(f"  warning: [{i['code']}] {i['message']}")
    for d in descriptions:
        click.echo(f"  {d.rendered}")
    for p in permissions:
        click.echo(f"  permission: {p.display}  [{p.id}]")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8787, show_default=True, type=int)
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Fixture root with media/, spoof/, manifests/.")
@click.option("--ledger", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Egress ledger file (NDJSON).")
@click.option("--frontend", type=click.Path(file_okay=False, path_type=Path), default=None, help="Built dashboard to serve at /ui.")
def serve(host: str, port: int, data_dir: Path | None, ledger: Path | None, frontend: Path | None) -> None:
    """Run the hub service."""
    import uvicorn

    from .api import create_app

    app = create_app(data_dir=data_dir, ledger_path=ledger, frontend_dir=frontend)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--bind", "binds", multiple=True, metavar="DEVICE=DRIVER", help="Bind a manifest device to a hub driver.")
@click.option("--app-id", default=None, help="Explicit app id instead of a generated one.")
@pass_ctx
def install(ctx: Ctx, manifest_path: Path, binds: tuple[str, ...], app_id: str | None) -> None:
    """Install an app from a manifest file."""
    bindings = {}
    for b in binds:
        if "=" not in b:
            raise click.ClickException(f"--bind wants DEVICE=DRIVER, got {b!r}")
        device, driver = b.split("=", 1)
        bindings[device] = driver
    body = {"manifest": manifest_path.read_text(encoding="utf-8"), "bindings": bindings, "app_id": app_id}
    r = ctx.request("POST", "/apps", json=body)
    info = r.json()
    click.echo(f"installed {info['id']} ({info['name']} {info['version']}), {info['pending_permissions']} permission(s) pending")


@main.command()
@pass_ctx
def apps(ctx: Ctx) -> None:
    """List installed apps."""
    rows = ctx.request("GET", "/apps").json()
    if not rows:
        click.echo("no apps installed")
        return
    for a in rows:
        click.echo(f"{a['id']:24} {a['state']:8} {a['name']} {a['version']}  pending={a['pending_permissions']}")


@main.command()
@click.argument("app_id")
@pass_ctx
def uninstall(ctx: Ctx, app_id: str) -> None:
    """Remove an installed app."""
    ctx.request("DELETE", f"/apps/{app_id}")
    click.echo(f"uninstalled {app_id}")


@main.command()
@click.argument("app_id")
@pass_ctx
def describe(ctx: Ctx, app_id: str) -> None:
    """Print the privacy descriptions for an app."""
    for d in ctx.request("GET", f"/apps/{app_id}/descriptions").json():
        click.echo(d["rendered"])
        for w in d.get("warnings", []):
            click.echo(f"  warning: {w}")


@main.command()
@click.argument("app_id")
@click.option("--allow", "allow_id", default=None, metavar="PERMISSION_ID")
@click.option("--deny", "deny_id", default=None, metavar="PERMISSION_ID")
@click.option("--allow-all", is_flag=True)
@pass_ctx
def permissions(ctx: Ctx, app_id: str, allow_id: str | None, deny_id: str | None, allow_all: bool) -> None:
    """Show or change an app's egress permissions."""
    if allow_all:
        rows = ctx.request("GET", f"/apps/{app_id}/permissions").json()
        for p in rows:
            ctx.request("PUT", f"/apps/{app_id}/permissions", json={"id": p["id"], "state": "allowed"})
    elif allow_id:
        ctx.request("PUT", f"/apps/{app_id}/permissions", json={"id": allow_id, "state": "allowed"})
    elif deny_id:
        ctx.request("PUT", f"/apps/{app_id}/permissions", json={"id": deny_id, "state": "denied"})
    for p in ctx.request("GET", f"/apps/{app_id}/permissions").json():
        click.echo(f"{p['state']:8} {p['display']:32} -> {p['destination']}  [{p['id']}]")


def _parse_window(text: str) -> list[int]:
    def minute_of_day(hhmm: str) -> int:
        hh, mm = hhmm.split(":")
        return (int(hh) * 60 + int(mm)) * 60_000

    start, end = text.split("-", 1)
    return [minute_of_day(start), minute_of_day(end)]


@main.command()
@click.argument("app_id")
@click.argument("mode", type=click.Choice(["rate-limit", "schedule", "filter"]))
@click.argument("node")
@click.option("--interval-ms", type=int, default=None, help="New interval for rate-limit.")
@click.option("--block", "blocks", multiple=True, metavar="HH:MM-HH:MM", help="Blocked window for schedule (repeatable).")
@click.option("--filter-kind", default=None, help="Operator kind inserted by filter mode.")
@click.option("--prop", "props", multiple=True, metavar="KEY=JSONVALUE", help="Property for the inserted filter node.")
@click.option("--dry-run", is_flag=True, help="Show the diff without applying.")
@pass_ctx
def rewrite(
    ctx: Ctx,
    app_id: str,
    mode: str,
    node: str,
    interval_ms: int | None,
    blocks: tuple[str, ...],
    filter_kind: str | None,
    props: tuple[str, ...],
    dry_run: bool,
) -> None:
    """Apply a privacy rewrite to a running app."""
    body: dict = {"node": node, "dry_run": dry_run}
    if mode == "rate-limit":
        body["kind"] = "rate_limit"
        body["interval_ms"] = interval_ms
    elif mode == "schedule":
        body["kind"] = "time_schedule"
        body["blocked_windows"] = [_parse_window(b) for b in blocks]
    else:
        body["kind"] = "content_filter"
        body["filter_kind"] = filter_kind
        properties = {}
        for p in props:
            if "=" not in p:
                raise click.ClickException(f"--prop wants KEY=JSONVALUE, got {p!r}")
            k, v = p.split("=", 1)
            try:
                properties[k] = json.loads(v)
            except ValueError:
                properties[k] = v
        body["properties"] = properties
    out = ctx.request("POST", f"/apps/{app_id}/rewrites", json=body).json()
    click.echo(out["note"])
    if out["identity"]:
        click.echo("no change needed")
        return
    click.echo(out["diff"], nl=False)
    click.echo("applied" if out["applied"] else "not applied (dry run)")


@main.command()
@click.option("--app", "app_id", default=None)
@click.option("--content", default=None)
@click.option("--group-by", default=None, type=click.Choice(["app", "content", "node", "dest", "day"]))
@click.option("--from-ms", type=int, default=None)
@click.option("--to-ms", type=int, default=None)
@pass_ctx
def egress(ctx: Ctx, app_id: str | None, content: str | None, group_by: str | None, from_ms: int | None, to_ms: int | None) -> None:
    """Query the egress ledger."""
    params = {k: v for k, v in [("app", app_id), ("content", content), ("group_by", group_by), ("from_ms", from_ms), ("to_ms", to_ms)] if v is not None}
    rows = ctx.request("GET", "/egress", params=params).json()
    if not rows:
        click.echo("no egress recorded")
        return
    for row in rows:
        key = {k: v for k, v in row.items() if k not in ("items", "bytes", "blocked_items")}
        tag = ", ".join(f"{k}={v}" for k, v in key.items()) or "total"
        click.echo(f"{tag}: {row['items']} item(s), {row['bytes']} byte(s), {row['blocked_items']} blocked")


@main.command()
@click.argument("app_id")
@click.argument("node")
@pass_ctx
def inject(ctx: Ctx, app_id: str, node: str) -> None:
    """Manually fire an inject node."""
    out = ctx.request("POST", f"/apps/{app_id}/inject/{node}").json()
    click.echo(f"fired {out['fired']}, {out['egress_events']} egress event(s)")


@main.group()
def clock() -> None:
    """Virtual clock control."""


@clock.command("show")
@pass_ctx
def clock_show(ctx: Ctx) -> None:
    click.echo(str(ctx.request("GET", "/clock").json()["now_ms"]))


@clock.command("advance")
@click.option("--by-ms", type=int, default=None)
@click.option("--to-ms", type=int, default=None)
@pass_ctx
def clock_advance(ctx: Ctx, by_ms: int | None, to_ms: int | None) -> None:
    body = {"by_ms": by_ms} if by_ms is not None else {"to_ms": to_ms}
    out = ctx.request("POST", "/clock/advance", json=body).json()
    click.echo(f"now {out['now_ms']} ms, {out['egress_events']} egress event(s), {out['deliveries']} deliveries")


@main.command()
@click.argument("app_id")
@pass_ctx
def label(ctx: Ctx, app_id: str) -> None:
    """Print the app's data nutrition label."""
    doc = ctx.request("GET", f"/apps/{app_id}/label").json()
    click.echo(f"{doc['app_name']} {doc['version']} - {doc['purpose']}")
    for dest in doc["destinations"]:
        click.echo(f"sends to {dest['destination']}:")
        for e in dest["entries"]:
            cond = f" {e['condition']}" if e["condition"] else ""
            click.echo(f"  {e['permission']}: {e['trigger']}{cond}; sent {e['sent_items']} item(s) / {e['sent_bytes']} byte(s), blocked {e['blocked_items']}")


if __name__ == "__main__":
    main()
