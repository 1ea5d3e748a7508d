/** Pure presenters: API objects in, display atoms out.
 *
 * An atom is one piece of text the dashboard shows, addressed by a slot
 * id. Values the hub computed (sentences, counts, diffs, permission
 * fields) pass through verbatim so the screen can be byte-compared with
 * the API response; only genuinely presentational strings (clock label,
 * applied/dry-run wording) are composed here.
 */

import type {
  AppSummary,
  Description,
  EgressRow,
  LabelDoc,
  PermissionRow,
  RewriteResponse,
} from "./client.js";

export interface Atom {
  slot: string;
  text: string;
}

export function appAtoms(app: AppSummary): Atom[] {
  return [
    { slot: `app.${app.id}.name`, text: app.name },
    { slot: `app.${app.id}.version`, text: app.version },
    { slot: `app.${app.id}.purpose`, text: app.purpose },
    { slot: `app.${app.id}.state`, text: app.state },
    { slot: `app.${app.id}.pending`, text: String(app.pending_permissions) },
  ];
}

export function sentenceAtoms(appId: string, descriptions: Description[]): Atom[] {
  return descriptions.map((d, i) => ({
    slot: `app.${appId}.sentence.${i}`,
    text: d.rendered,
  }));
}

export function permissionAtoms(appId: string, rows: PermissionRow[]): Atom[] {
  return rows.flatMap((p) => [
    { slot: `app.${appId}.perm.${p.id}.state`, text: p.state },
    { slot: `app.${appId}.perm.${p.id}.display`, text: p.display },
    { slot: `app.${appId}.perm.${p.id}.destination`, text: p.destination },
  ]);
}

/** The non-count keys of a grouped ledger row, "k=v" joined, or "total". */
export function egressRowTag(row: EgressRow): string {
  const parts = Object.entries(row)
    .filter(([k]) => k !== "items" && k !== "bytes" && k !== "blocked_items")
    .map(([k, v]) => `${k}=${v}`);
  return parts.length ? parts.join(", ") : "total";
}

export function egressAtoms(appId: string, rows: EgressRow[]): Atom[] {
  return rows.flatMap((row, i) => [
    { slot: `app.${appId}.egress.${i}.tag`, text: egressRowTag(row) },
    { slot: `app.${appId}.egress.${i}.items`, text: String(row.items) },
    { slot: `app.${appId}.egress.${i}.bytes`, text: String(row.bytes) },
    { slot: `app.${appId}.egress.${i}.blocked`, text: String(row.blocked_items) },
  ]);
}

export function rewriteAtoms(appId: string, rw: RewriteResponse): Atom[] {
  const atoms: Atom[] = [
    { slot: `app.${appId}.rewrite.note`, text: rw.note },
    {
      slot: `app.${appId}.rewrite.status`,
      text: rw.identity ? "no change needed" : rw.applied ? "applied" : "dry run",
    },
  ];
  if (!rw.identity) {
    atoms.push({ slot: `app.${appId}.rewrite.diff`, text: rw.diff });
  }
  return atoms;
}

export function labelAtoms(appId: string, doc: LabelDoc): Atom[] {
  const atoms: Atom[] = [
    { slot: `app.${appId}.label.name`, text: doc.app_name },
    { slot: `app.${appId}.label.version`, text: doc.version },
    { slot: `app.${appId}.label.purpose`, text: doc.purpose },
  ];
  doc.destinations.forEach((dest, di) => {
    atoms.push({ slot: `app.${appId}.label.dest.${di}`, text: dest.destination });
    dest.entries.forEach((e, ei) => {
      const base = `app.${appId}.label.dest.${di}.entry.${ei}`;
      atoms.push(
        { slot: `${base}.permission`, text: e.permission },
        { slot: `${base}.trigger`, text: e.trigger },
        { slot: `${base}.condition`, text: e.condition ?? "" },
        { slot: `${base}.sent_items`, text: String(e.sent_items) },
        { slot: `${base}.sent_bytes`, text: String(e.sent_bytes) },
        { slot: `${base}.blocked`, text: String(e.blocked_items) },
      );
    });
  });
  return atoms;
}

const MS_PER_DAY = 86_400_000;

/** Presentational only: "day 1, 06:30" for 113400000. */
export function clockLabel(nowMs: number): string {
  const day = Math.floor(nowMs / MS_PER_DAY);
  const rest = nowMs % MS_PER_DAY;
  const hh = String(Math.floor(rest / 3_600_000)).padStart(2, "0");
  const mm = String(Math.floor((rest % 3_600_000) / 60_000)).padStart(2, "0");
  return `day ${day}, ${hh}:${mm}`;
}

export function clockAtoms(nowMs: number): Atom[] {
  return [
    { slot: "clock.now_ms", text: String(nowMs) },
    { slot: "clock.label", text: clockLabel(nowMs) },
  ];
}
