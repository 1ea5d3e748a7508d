import { describe, expect, it } from "vitest";

import { HubApiError, HubClient } from "../src/client.js";

interface Call {
  url: string;
  method: string;
  body: unknown;
}

function stubClient(status: number, payload: unknown): { client: HubClient; calls: Call[] } {
  const calls: Call[] = [];
  const fetchFn = (async (url: RequestInfo | URL, init?: RequestInit) => {
    calls.push({
      url: String(url),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: `status ${status}`,
      json: async () => payload,
    } as Response;
  }) as typeof fetch;
  return { client: new HubClient("http://hub", fetchFn), calls };
}

describe("HubClient", () => {
  it("builds egress queries from defined params only", async () => {
    const { client, calls } = stubClient(200, []);
    await client.egress({ app: "hv", group_by: "content", from_ms: 0 });
    expect(calls[0].url).toBe("http://hub/egress?app=hv&group_by=content&from_ms=0");
    await client.egress();
    expect(calls[1].url).toBe("http://hub/egress");
  });

  it("posts install bodies with manifest, bindings and app id", async () => {
    const { client, calls } = stubClient(201, { id: "hv" });
    await client.install({ graph: [] }, { camera: "hall-camera" }, "hv");
    expect(calls[0]).toEqual({
      url: "http://hub/apps",
      method: "POST",
      body: { manifest: { graph: [] }, bindings: { camera: "hall-camera" }, app_id: "hv" },
    });
  });

  it("puts permission updates with the literal state", async () => {
    const { client, calls } = stubClient(200, []);
    await client.setPermission("hv", "upload|face|cropped|image", "denied");
    expect(calls[0].method).toBe("PUT");
    expect(calls[0].url).toBe("http://hub/apps/hv/permissions");
    expect(calls[0].body).toEqual({ id: "upload|face|cropped|image", state: "denied" });
  });

  it("sends rewrite requests unchanged", async () => {
    const { client, calls } = stubClient(200, { note: "", identity: true, diff: "", applied: false });
    await client.rewrite("wl", { kind: "rate_limit", node: "timer", interval_ms: 7200000, dry_run: true });
    expect(calls[0].body).toEqual({
      kind: "rate_limit",
      node: "timer",
      interval_ms: 7200000,
      dry_run: true,
    });
  });

  it("treats 204 as void", async () => {
    const { client } = stubClient(204, undefined);
    await expect(client.uninstall("hv")).resolves.toBeUndefined();
  });

  it("surfaces the api error code and message", async () => {
    const { client } = stubClient(404, { detail: { code: "UNKNOWN_APP", message: "no app 'zz'" } });
    const err = await client.app("zz").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(HubApiError);
    expect((err as HubApiError).code).toBe("UNKNOWN_APP");
    expect((err as HubApiError).status).toBe(404);
    expect((err as HubApiError).message).toBe("no app 'zz'");
  });

  it("falls back to a generic code when detail is absent", async () => {
    const { client } = stubClient(500, { oops: true });
    const err = await client.health().catch((e: unknown) => e);
    expect((err as HubApiError).code).toBe("UNKNOWN");
    expect((err as HubApiError).message).toBe("status 500");
  });
});
