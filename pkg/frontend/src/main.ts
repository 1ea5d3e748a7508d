/** Browser entry: renders the hub state into #app and wires controls.
 * Every displayed value is an Atom placed in a [data-slot] element, so
 * tests can address the exact text on screen. */

import { HubClient } from "./client.js";
import type { AppSummary, RewriteResponse } from "./client.js";
import {
  appAtoms,
  clockAtoms,
  egressAtoms,
  labelAtoms,
  permissionAtoms,
  rewriteAtoms,
  sentenceAtoms,
  type Atom,
} from "./views.js";

const client = new HubClient("");
const MS_PER_DAY = 86_400_000;
const lastRewrite = new Map<string, RewriteResponse>();

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function slotEl(tag: string, atom: Atom, className?: string): HTMLElement {
  const node = el(tag, className, atom.text);
  node.dataset.slot = atom.slot;
  return node;
}

function atomMap(atoms: Atom[]): Map<string, Atom> {
  return new Map(atoms.map((a) => [a.slot, a]));
}

async function renderHeader(root: HTMLElement): Promise<void> {
  const { now_ms } = await client.clock();
  const bar = el("header", "clock");
  const atoms = atomMap(clockAtoms(now_ms));
  bar.append(
    slotEl("span", atoms.get("clock.label")!, "clock-label"),
    slotEl("span", atoms.get("clock.now_ms")!, "clock-ms"),
  );
  const advance = el("button", "", "advance one day") as HTMLButtonElement;
  advance.addEventListener("click", async () => {
    await client.advanceClock(MS_PER_DAY);
    await renderAll();
  });
  bar.append(advance);
  root.append(bar);
}

async function renderCatalog(root: HTMLElement, installed: Set<string>): Promise<void> {
  const fixtures = await client.fixtures();
  const section = el("section", "catalog");
  section.append(el("h2", "", "available apps"));
  for (const f of fixtures) {
    const row = el("div", "catalog-row");
    row.append(el("span", "", `${f.name} ${f.version}`));
    const install = el("button", "", installed.has(f.slug) ? "installed" : "install") as HTMLButtonElement;
    install.disabled = installed.has(f.slug);
    install.addEventListener("click", async () => {
      await client.install(f.manifest, f.suggested_bindings, f.slug);
      await renderAll();
    });
    row.append(install);
    section.append(row);
  }
  root.append(section);
}

function permissionControls(appId: string, permissionId: string, state: string): HTMLElement {
  const holder = el("span", "perm-actions");
  for (const next of ["allowed", "denied"] as const) {
    const btn = el("button", "", next === "allowed" ? "allow" : "deny") as HTMLButtonElement;
    btn.disabled = state === next;
    btn.addEventListener("click", async () => {
      await client.setPermission(appId, permissionId, next);
      await renderAll();
    });
    holder.append(btn);
  }
  return holder;
}

function rewriteForm(app: AppSummary): HTMLElement {
  const form = el("div", "rewrite-form");
  const node = el("input") as HTMLInputElement;
  node.placeholder = "inject node id";
  const interval = el("input") as HTMLInputElement;
  interval.placeholder = "interval ms";
  const run = async (dry: boolean) => {
    const rw = await client.rewrite(app.id, {
      kind: "rate_limit",
      node: node.value,
      interval_ms: Number(interval.value),
      dry_run: dry,
    });
    lastRewrite.set(app.id, rw);
    await renderAll();
  };
  const dryBtn = el("button", "", "dry run") as HTMLButtonElement;
  dryBtn.addEventListener("click", () => run(true));
  const applyBtn = el("button", "", "apply") as HTMLButtonElement;
  applyBtn.addEventListener("click", () => run(false));
  form.append(node, interval, dryBtn, applyBtn);
  return form;
}

async function renderApp(root: HTMLElement, app: AppSummary): Promise<void> {
  const card = el("section", "app-card");
  const head = atomMap(appAtoms(app));
  const title = el("h2");
  title.append(
    slotEl("span", head.get(`app.${app.id}.name`)!),
    document.createTextNode(" "),
    slotEl("span", head.get(`app.${app.id}.version`)!),
  );
  card.append(title);
  const meta = el("p", "app-meta");
  meta.append(
    slotEl("span", head.get(`app.${app.id}.purpose`)!),
    document.createTextNode(" | "),
    slotEl("span", head.get(`app.${app.id}.state`)!),
    document.createTextNode(" | pending: "),
    slotEl("span", head.get(`app.${app.id}.pending`)!),
  );
  card.append(meta);

  const descriptions = await client.descriptions(app.id);
  const flows = el("ul", "sentences");
  for (const atom of sentenceAtoms(app.id, descriptions)) {
    flows.append(slotEl("li", atom));
  }
  card.append(flows);

  const permissions = await client.permissions(app.id);
  const permTable = el("table", "permissions");
  const permAtoms = atomMap(permissionAtoms(app.id, permissions));
  for (const p of permissions) {
    const tr = el("tr");
    for (const field of ["state", "display", "destination"]) {
      tr.append(slotEl("td", permAtoms.get(`app.${app.id}.perm.${p.id}.${field}`)!));
    }
    const actions = el("td");
    actions.append(permissionControls(app.id, p.id, p.state));
    tr.append(actions);
    permTable.append(tr);
  }
  card.append(permTable);

  const egressRows = await client.egress({ app: app.id, group_by: "content" });
  const ledger = el("table", "egress");
  const header = el("tr");
  for (const h of ["content", "items", "bytes", "blocked"]) header.append(el("th", "", h));
  ledger.append(header);
  const rowAtoms = egressAtoms(app.id, egressRows);
  for (let i = 0; i < egressRows.length; i++) {
    const tr = el("tr");
    for (const a of rowAtoms.slice(i * 4, i * 4 + 4)) tr.append(slotEl("td", a));
    ledger.append(tr);
  }
  card.append(ledger);

  const labelDoc = await client.label(app.id);
  const labelBox = el("div", "label");
  for (const atom of labelAtoms(app.id, labelDoc)) {
    labelBox.append(slotEl("div", atom));
  }
  card.append(labelBox);

  card.append(rewriteForm(app));
  const rw = lastRewrite.get(app.id);
  if (rw) {
    const out = el("div", "rewrite-result");
    for (const atom of rewriteAtoms(app.id, rw)) {
      out.append(slotEl(atom.slot.endsWith(".diff") ? "pre" : "div", atom));
    }
    card.append(out);
  }

  const remove = el("button", "danger", "uninstall") as HTMLButtonElement;
  remove.addEventListener("click", async () => {
    await client.uninstall(app.id);
    lastRewrite.delete(app.id);
    await renderAll();
  });
  card.append(remove);
  root.append(card);
}

async function renderAll(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  root.textContent = "";
  try {
    await renderHeader(root);
    const apps = await client.apps();
    await renderCatalog(root, new Set(apps.map((a) => a.id)));
    for (const app of apps) {
      await renderApp(root, app);
    }
  } catch (err) {
    root.append(el("p", "error", String(err)));
  }
}

renderAll();
