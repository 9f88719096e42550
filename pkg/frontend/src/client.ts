import type { Provenance, Region } from "./types.js";

export class ServiceRequestError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service responded ${status}: ${detail}`);
    this.name = "ServiceRequestError";
  }
}

export interface ServiceImage {
  bytes: Uint8Array;
  provenance: Provenance;
  warning?: string;
}

export interface HealthInfo {
  status: string;
  model_resolution: number;
  n_attr: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed wrapper over the inference service. Every image the studio
 * shows comes back from here as the raw response body; nothing is
 * re-encoded client-side.
 */
export class StudioClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(signal?: AbortSignal): Promise<HealthInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/health`, { signal });
    if (!resp.ok) throw await this.asError(resp);
    return (await resp.json()) as HealthInfo;
  }

  async attributes(signal?: AbortSignal): Promise<string[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/attributes`, { signal });
    if (!resp.ok) throw await this.asError(resp);
    return (await resp.json()) as string[];
  }

  async swap(
    source: Uint8Array,
    target: Uint8Array,
    gd: boolean,
    signal?: AbortSignal,
  ): Promise<ServiceImage> {
    const fields: Record<string, string> = { gd: String(gd), strict: "false" };
    const form = this.imageForm({ source, target }, fields);
    return this.postImage("/swap", form, { operation: "swap", parameters: fields }, signal);
  }

  async edit(
    image: Uint8Array,
    deltas: Record<string, number>,
    region: Region,
    signal?: AbortSignal,
  ): Promise<ServiceImage> {
    const fields: Record<string, string> = {
      deltas: JSON.stringify(deltas),
      region,
      strict: "false",
    };
    const form = this.imageForm({ image }, fields);
    return this.postImage("/edit", form, { operation: "edit", parameters: fields }, signal);
  }

  async sample(
    image: Uint8Array | null,
    region: Region,
    seed: number,
    signal?: AbortSignal,
  ): Promise<ServiceImage> {
    const fields: Record<string, string> = { region, seed: String(seed), strict: "false" };
    const form = this.imageForm(image ? { image } : {}, fields);
    return this.postImage("/sample", form, { operation: "sample", parameters: fields }, signal);
  }

  async interpolate(
    a: Uint8Array,
    b: Uint8Array,
    t: number,
    region: Region,
    signal?: AbortSignal,
  ): Promise<ServiceImage> {
    const fields: Record<string, string> = { t: String(t), region, strict: "false" };
    const form = this.imageForm({ a, b }, fields);
    return this.postImage(
      "/interpolate",
      form,
      { operation: "interpolate", parameters: fields },
      signal,
    );
  }

  private imageForm(
    images: Record<string, Uint8Array>,
    fields: Record<string, string>,
  ): FormData {
    const form = new FormData();
    for (const [name, bytes] of Object.entries(images)) {
      form.append(name, new Blob([bytes as BlobPart], { type: "image/png" }), `${name}.png`);
    }
    for (const [name, value] of Object.entries(fields)) {
      form.append(name, value);
    }
    return form;
  }

  private async postImage(
    path: string,
    form: FormData,
    provenance: Provenance,
    signal?: AbortSignal,
  ): Promise<ServiceImage> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      body: form,
      signal,
    });
    if (!resp.ok) throw await this.asError(resp);
    const bytes = new Uint8Array(await resp.arrayBuffer());
    const warning = resp.headers.get("warning");
    return { bytes, provenance, ...(warning !== null ? { warning } : {}) };
  }

  private async asError(resp: Response): Promise<ServiceRequestError> {
    let detail = resp.statusText || "request failed";
    try {
      const doc = (await resp.json()) as { detail?: unknown };
      if (typeof doc.detail === "string") detail = doc.detail;
      else if (doc.detail !== undefined) detail = JSON.stringify(doc.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    return new ServiceRequestError(resp.status, detail);
  }
}
