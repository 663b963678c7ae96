/** Thin fetch client for the JSON API. One method per documented route. */

import type {
  AnnotationsPayload,
  GrantPayload,
  ItemPayload,
  MembersPayload,
  RenderedViewPayload,
  TypeDef,
  TypeInfo,
  WhoAmI,
} from "./types.js";

/** An API failure with the service's machine-readable error code. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface GrantRequest {
  ability: string;
  effect: "allow" | "deny";
  subject_kind: "agent" | "collection" | "everyone";
  subject_id?: number | null;
  target_item?: number | null;
  target_type?: string | null;
  target_piece?: string | null;
}

export interface ListItemsParams {
  type?: string;
  subtypes?: boolean;
  include_inactive?: boolean;
  where?: string[];
}

function query(params: Record<string, unknown>): string {
  const search = new URLSearchParams();
  for (const [name, value] of Object.entries(params)) {
    if (value === undefined || value === null) continue;
    if (Array.isArray(value)) {
      for (const entry of value) search.append(name, String(entry));
    } else {
      search.append(name, String(value));
    }
  }
  const text = search.toString();
  return text ? `?${text}` : "";
}

export class ApiClient {
  constructor(
    public baseUrl: string,
    public token: string | null = null,
  ) {}

  withToken(token: string | null): ApiClient {
    return new ApiClient(this.baseUrl, token);
  }

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await fetch(this.baseUrl.replace(/\/+$/, "") + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    let data: any = null;
    if (text) {
      try {
        data = JSON.parse(text);
      } catch {
        data = text;
      }
    }
    if (!response.ok) {
      if (data && typeof data === "object" && data.error) {
        throw new ApiError(response.status, data.error.code, data.error.message);
      }
      // auth and request validation come from the framework, not the engine
      const fallback = response.status === 401 ? "unauthorized" : "invalid_request";
      const message =
        data && typeof data === "object" && "detail" in data
          ? JSON.stringify(data.detail)
          : String(data ?? response.statusText);
      throw new ApiError(response.status, fallback, message);
    }
    return data;
  }

  // introspection
  serviceRoot(): Promise<{ service: string; format_version: string; root_type: string }> {
    return this.request("GET", "/");
  }
  whoami(): Promise<WhoAmI> {
    return this.request("GET", "/whoami");
  }
  listTypes(): Promise<{ types: TypeDef[] }> {
    return this.request("GET", "/types");
  }
  getType(name: string): Promise<TypeInfo> {
    return this.request("GET", `/type/${encodeURIComponent(name)}`);
  }
  defineTypes(text: string): Promise<{ defined: string[] }> {
    return this.request("POST", "/types", { text });
  }

  // items
  listItems(params: ListItemsParams = {}): Promise<{ type: string; items: number[] }> {
    return this.request("GET", `/items${query({ ...params })}`);
  }
  createItem(
    type_name: string,
    pieces: Record<string, unknown>,
    self_created = false,
  ): Promise<ItemPayload> {
    return this.request("POST", "/item", { type_name, pieces, self_created });
  }
  getItem(id: number): Promise<ItemPayload> {
    return this.request("GET", `/item/${id}`);
  }
  updateItem(id: number, pieces: Record<string, unknown>): Promise<ItemPayload> {
    return this.request("PATCH", `/item/${id}`, { pieces });
  }
  versions(id: number): Promise<{ id: number; versions: number[]; current: number }> {
    return this.request("GET", `/item/${id}/versions`);
  }
  getVersion(id: number, version: number): Promise<ItemPayload> {
    return this.request("GET", `/item/${id}/version/${version}`);
  }
  deactivate(id: number): Promise<{ id: number; active: boolean }> {
    return this.request("POST", `/item/${id}/deactivate`);
  }
  reactivate(id: number): Promise<{ id: number; active: boolean }> {
    return this.request("POST", `/item/${id}/reactivate`);
  }
  destroy(id: number): Promise<{ id: number; destroyed: boolean }> {
    return this.request("POST", `/item/${id}/destroy`);
  }

  // annotations
  annotations(id: number, version?: number): Promise<AnnotationsPayload> {
    return this.request("GET", `/item/${id}/annotations${query({ version })}`);
  }
  createComment(id: number, body: string, item_version?: number): Promise<ItemPayload> {
    return this.request("POST", `/item/${id}/comments`, { body, item_version });
  }
  createTransclusion(
    id: number,
    document_version: number,
    character_offset: number,
    target_item: number,
  ): Promise<ItemPayload> {
    return this.request("POST", `/item/${id}/transclusions`, {
      document_version,
      character_offset,
      target_item,
    });
  }
  createExcerpt(id: number, piece: string): Promise<ItemPayload> {
    return this.request("POST", `/item/${id}/excerpts`, { piece });
  }
  resolveExcerpt(id: number): Promise<Record<string, unknown>> {
    return this.request("GET", `/excerpt/${id}`);
  }

  // views
  view(
    id: number,
    params: { action?: string; viewer?: string; version?: number } = {},
  ): Promise<RenderedViewPayload> {
    return this.request("GET", `/item/${id}/view${query({ ...params })}`);
  }
  actions(id: number): Promise<{ id: number; actions: string[] }> {
    return this.request("GET", `/item/${id}/actions`);
  }

  // collections
  members(collection: number, indirect = false): Promise<MembersPayload> {
    return this.request(
      "GET",
      `/collection/${collection}/members${query({ indirect: indirect || undefined })}`,
    );
  }
  addMember(
    collection: number,
    member: number,
  ): Promise<{ collection: number; member: number; membership: number }> {
    return this.request("POST", `/collection/${collection}/members`, { member });
  }
  removeMembership(membership: number): Promise<{ membership: number; active: boolean }> {
    return this.request("DELETE", `/membership/${membership}`);
  }
  collectionsOf(id: number, direct = false): Promise<{ id: number; collections: number[] }> {
    return this.request("GET", `/item/${id}/collections${query({ direct: direct || undefined })}`);
  }

  // permissions
  grantsFor(id: number): Promise<{ id: number; grants: GrantPayload[] }> {
    return this.request("GET", `/item/${id}/grants`);
  }
  addGrant(grant: GrantRequest): Promise<{ grant_id: number }> {
    return this.request("POST", "/grants", grant);
  }
  revokeGrant(id: number): Promise<{ grant_id: number; revoked: boolean }> {
    return this.request("DELETE", `/grant/${id}`);
  }

  // export / import
  exportBundle(): Promise<Record<string, unknown>> {
    return this.request("GET", "/export");
  }
  importBundle(bundle: Record<string, unknown>): Promise<{ imported: boolean; items: number }> {
    return this.request("POST", "/import", bundle);
  }
}
