/** Typed client for the hub's HTTP API. Every dashboard read goes
 * through here; nothing in the UI touches runtime internals. */

export interface AppSummary {
  id: string;
  name: string;
  version: string;
  purpose: string;
  state: string;
  installed_at: number;
  manifest_hash: string;
  bindings: Record<string, string>;
  pending_permissions: number;
}

export interface AppDetail extends AppSummary {
  manifest: unknown;
  analysis_warnings: string[];
}

export interface Description {
  network_node: string;
  trigger: string;
  content: string;
  destination: string;
  condition: string | null;
  rendered: string;
  warnings: string[];
}

export interface PermissionRow {
  id: string;
  network_node: string;
  content: { label: string; qualifier: string };
  kind: string;
  destination: string;
  display: string;
  state: string;
}

export interface RewriteRequest {
  kind: "rate_limit" | "time_schedule" | "content_filter";
  node: string;
  dry_run?: boolean;
  interval_ms?: number;
  blocked_windows?: [number, number][];
  filter_kind?: string;
  properties?: Record<string, unknown>;
}

export interface RewriteResponse {
  note: string;
  identity: boolean;
  diff: string;
  applied: boolean;
  permissions?: PermissionRow[];
}

export interface EgressRow {
  items: number;
  bytes: number;
  blocked_items: number;
  [groupKey: string]: unknown;
}

export interface EgressQuery {
  app?: string;
  content?: string;
  node?: string;
  from_ms?: number;
  to_ms?: number;
  group_by?: "app" | "content" | "node" | "dest" | "day";
}

export interface LabelEntry {
  permission: string;
  trigger: string;
  condition: string | null;
  sent_items: number;
  sent_bytes: number;
  blocked_items: number;
}

export interface LabelDoc {
  app_name: string;
  purpose: string;
  version: string;
  destinations: { destination: string; entries: LabelEntry[] }[];
}

export interface FixtureEntry {
  slug: string;
  name: string;
  version: string;
  purpose: string;
  manifest: unknown;
  suggested_bindings: Record<string, string>;
}

export interface ClockState {
  now_ms: number;
}

export interface AdvanceResult {
  now_ms: number;
  egress_events: number;
  deliveries: number;
}

export interface AnalyzeResponse {
  valid: boolean;
  issues: { severity: string; code: string; message: string }[];
  descriptions?: Description[];
  permissions?: Omit<PermissionRow, "state">[];
  [extra: string]: unknown;
}

export class HubApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "HubApiError";
  }
}

export class HubClient {
  constructor(
    readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    if (res.status === 204) return undefined as T;
    const payload = await res.json();
    if (!res.ok) {
      const detail = (payload as { detail?: { code?: string; message?: string } }).detail ?? {};
      throw new HubApiError(res.status, detail.code ?? "UNKNOWN", detail.message ?? res.statusText);
    }
    return payload as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  fixtures(): Promise<FixtureEntry[]> {
    return this.request("GET", "/fixtures");
  }

  analyze(manifest: unknown): Promise<AnalyzeResponse> {
    return this.request("POST", "/analyze", { manifest });
  }

  apps(): Promise<AppSummary[]> {
    return this.request("GET", "/apps");
  }

  app(id: string): Promise<AppDetail> {
    return this.request("GET", `/apps/${id}`);
  }

  install(manifest: unknown, bindings: Record<string, string>, appId?: string): Promise<AppSummary> {
    return this.request("POST", "/apps", { manifest, bindings, app_id: appId });
  }

  uninstall(id: string): Promise<void> {
    return this.request("DELETE", `/apps/${id}`);
  }

  descriptions(id: string): Promise<Description[]> {
    return this.request("GET", `/apps/${id}/descriptions`);
  }

  permissions(id: string): Promise<PermissionRow[]> {
    return this.request("GET", `/apps/${id}/permissions`);
  }

  setPermission(id: string, permissionId: string, state: "allowed" | "denied"): Promise<PermissionRow[]> {
    return this.request("PUT", `/apps/${id}/permissions`, { id: permissionId, state });
  }

  label(id: string): Promise<LabelDoc> {
    return this.request("GET", `/apps/${id}/label`);
  }

  manifestText(id: string): Promise<{ id: string; manifest: string }> {
    return this.request("GET", `/apps/${id}/manifest`);
  }

  rewrite(id: string, req: RewriteRequest): Promise<RewriteResponse> {
    return this.request("POST", `/apps/${id}/rewrites`, req);
  }

  egress(query: EgressQuery = {}): Promise<EgressRow[]> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, String(value));
    }
    const qs = params.toString();
    return this.request("GET", qs ? `/egress?${qs}` : "/egress");
  }

  clock(): Promise<ClockState> {
    return this.request("GET", "/clock");
  }

  advanceClock(byMs: number): Promise<AdvanceResult> {
    return this.request("POST", "/clock/advance", { by_ms: byMs });
  }
}
