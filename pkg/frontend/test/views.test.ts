import { describe, expect, it } from "vitest";

import type { AppSummary, Description, EgressRow, LabelDoc, PermissionRow, RewriteResponse } from "../src/client.js";
import {
  appAtoms,
  clockAtoms,
  clockLabel,
  egressAtoms,
  egressRowTag,
  labelAtoms,
  permissionAtoms,
  rewriteAtoms,
  sentenceAtoms,
} from "../src/views.js";

const APP: AppSummary = {
  id: "hv",
  name: "HelloVisitor",
  version: "1.2.0",
  purpose: "Announce visitors at the front door",
  state: "running",
  installed_at: 0,
  manifest_hash: "abc123",
  bindings: { camera: "hall-camera" },
  pending_permissions: 1,
};

function text(atoms: { slot: string; text: string }[], slot: string): string {
  const hit = atoms.find((a) => a.slot === slot);
  if (!hit) throw new Error(`no atom for ${slot}`);
  return hit.text;
}

describe("appAtoms", () => {
  it("passes fields through and stringifies the pending count", () => {
    const atoms = appAtoms(APP);
    expect(text(atoms, "app.hv.name")).toBe("HelloVisitor");
    expect(text(atoms, "app.hv.version")).toBe("1.2.0");
    expect(text(atoms, "app.hv.state")).toBe("running");
    expect(text(atoms, "app.hv.pending")).toBe("1");
  });
});

describe("sentenceAtoms", () => {
  it("keeps rendered sentences byte-identical", () => {
    const descs: Description[] = [
      {
        network_node: "upload",
        trigger: "the camera detects motion",
        content: "cropped face images",
        destination: "HelloVisitor.com",
        condition: null,
        rendered:
          "When the camera detects motion, the app sends cropped face images to HelloVisitor.com.",
        warnings: [],
      },
    ];
    const atoms = sentenceAtoms("hv", descs);
    expect(atoms).toHaveLength(1);
    expect(atoms[0].slot).toBe("app.hv.sentence.0");
    expect(atoms[0].text).toBe(descs[0].rendered);
  });
});

describe("permissionAtoms", () => {
  it("emits one atom per displayed cell, verbatim", () => {
    const rows: PermissionRow[] = [
      {
        id: "upload|face|cropped|image",
        network_node: "upload",
        content: { label: "face", qualifier: "cropped" },
        kind: "image",
        destination: "https://HelloVisitor.com",
        display: "face image",
        state: "pending",
      },
    ];
    const atoms = permissionAtoms("hv", rows);
    expect(text(atoms, "app.hv.perm.upload|face|cropped|image.state")).toBe("pending");
    expect(text(atoms, "app.hv.perm.upload|face|cropped|image.display")).toBe("face image");
    expect(text(atoms, "app.hv.perm.upload|face|cropped|image.destination")).toBe(
      "https://HelloVisitor.com",
    );
  });
});

describe("egress atoms", () => {
  const rows: EgressRow[] = [
    { content: "face image", items: 114, bytes: 739354, blocked_items: 0 },
    { items: 3, bytes: 42, blocked_items: 7 },
  ];

  it("tags grouped rows by their key fields and falls back to total", () => {
    expect(egressRowTag(rows[0])).toBe("content=face image");
    expect(egressRowTag(rows[1])).toBe("total");
  });

  it("stringifies counts without formatting", () => {
    const atoms = egressAtoms("hv", rows);
    expect(text(atoms, "app.hv.egress.0.items")).toBe("114");
    expect(text(atoms, "app.hv.egress.0.bytes")).toBe("739354");
    expect(text(atoms, "app.hv.egress.1.blocked")).toBe("7");
  });
});

describe("rewriteAtoms", () => {
  const base: RewriteResponse = {
    note: "rate limit timer to 7200000 ms",
    identity: false,
    diff: '-    "interval_ms": 1800000\n+    "interval_ms": 7200000\n',
    applied: false,
  };

  it("keeps the diff byte-identical and words the status", () => {
    const atoms = rewriteAtoms("wl", base);
    expect(text(atoms, "app.wl.rewrite.diff")).toBe(base.diff);
    expect(text(atoms, "app.wl.rewrite.status")).toBe("dry run");
    expect(text(atoms, "app.wl.rewrite.note")).toBe(base.note);
  });

  it("marks applied rewrites and omits the diff for identities", () => {
    expect(text(rewriteAtoms("wl", { ...base, applied: true }), "app.wl.rewrite.status")).toBe(
      "applied",
    );
    const identity = rewriteAtoms("wl", { ...base, identity: true, diff: "" });
    expect(text(identity, "app.wl.rewrite.status")).toBe("no change needed");
    expect(identity.some((a) => a.slot.endsWith(".diff"))).toBe(false);
  });
});

describe("labelAtoms", () => {
  it("flattens destinations and entries with exact counts", () => {
    const doc: LabelDoc = {
      app_name: "HelloVisitor",
      purpose: "Announce visitors at the front door",
      version: "1.2.0",
      destinations: [
        {
          destination: "HelloVisitor.com",
          entries: [
            {
              permission: "face image",
              trigger: "the camera detects motion",
              condition: null,
              sent_items: 114,
              sent_bytes: 739354,
              blocked_items: 0,
            },
          ],
        },
      ],
    };
    const atoms = labelAtoms("hv", doc);
    expect(text(atoms, "app.hv.label.dest.0")).toBe("HelloVisitor.com");
    expect(text(atoms, "app.hv.label.dest.0.entry.0.permission")).toBe("face image");
    expect(text(atoms, "app.hv.label.dest.0.entry.0.condition")).toBe("");
    expect(text(atoms, "app.hv.label.dest.0.entry.0.sent_bytes")).toBe("739354");
  });
});

describe("clock", () => {
  it("shows raw ms verbatim plus a readable day label", () => {
    const atoms = clockAtoms(113_400_000);
    expect(text(atoms, "clock.now_ms")).toBe("113400000");
    expect(text(atoms, "clock.label")).toBe("day 1, 07:30");
    expect(clockLabel(0)).toBe("day 0, 00:00");
    expect(clockLabel(86_400_000 - 60_000)).toBe("day 0, 23:59");
  });
});
