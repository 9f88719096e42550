import type { HistoryEntry, Provenance, Region, ResultImage, SlotName } from "./types.js";
import { base64ToBytes, bytesToBase64, clamp01 } from "./util.js";

interface SessionJson {
  version: 1;
  source: string | null;
  target: string | null;
  lastResult: { image: string; provenance: Provenance; warning?: string } | null;
  attributePanel: { face: Record<string, number>; hair: Record<string, number> };
  history: { request: Provenance; thumbnail: string }[];
}

/**
 * All studio state: the two uploaded portraits, the last service result
 * with its provenance, the per-region attribute panel, and the history
 * strip. History is append-only; attribute values are clamped to [0, 1]
 * on every write, including deserialization.
 */
export class Session {
  sourceImage: Uint8Array | null = null;
  targetImage: Uint8Array | null = null;
  lastResult: ResultImage | null = null;
  private readonly panel: { face: Map<string, number>; hair: Map<string, number> } = {
    face: new Map(),
    hair: new Map(),
  };
  private readonly entries: HistoryEntry[] = [];

  setImage(slot: SlotName, bytes: Uint8Array): void {
    if (slot === "source") this.sourceImage = bytes;
    else this.targetImage = bytes;
  }

  image(slot: SlotName): Uint8Array | null {
    return slot === "source" ? this.sourceImage : this.targetImage;
  }

  /** Record a service result and append it to the history strip. */
  acceptResult(result: ResultImage): void {
    this.lastResult = result;
    this.entries.push({ request: result.provenance, thumbnail: result.bytes });
  }

  /** Feed the last result into the next operation as source or target. */
  promoteResult(slot: SlotName): void {
    if (!this.lastResult) throw new Error("no result to promote");
    this.setImage(slot, this.lastResult.bytes);
  }

  setAttribute(region: "face" | "hair", name: string, value: number): void {
    this.panel[region].set(name, clamp01(value));
  }

  attribute(region: "face" | "hair", name: string): number | undefined {
    return this.panel[region].get(name);
  }

  /** Deltas to send for an edit over the given region ("both" merges). */
  deltas(region: Region): Record<string, number> {
    const out: Record<string, number> = {};
    if (region === "face" || region === "both") {
      for (const [name, value] of this.panel.face) out[name] = value;
    }
    if (region === "hair" || region === "both") {
      for (const [name, value] of this.panel.hair) out[name] = value;
    }
    return out;
  }

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  toJSON(): string {
    const doc: SessionJson = {
      version: 1,
      source: this.sourceImage ? bytesToBase64(this.sourceImage) : null,
      target: this.targetImage ? bytesToBase64(this.targetImage) : null,
      lastResult: this.lastResult
        ? {
            image: bytesToBase64(this.lastResult.bytes),
            provenance: this.lastResult.provenance,
            ...(this.lastResult.warning !== undefined
              ? { warning: this.lastResult.warning }
              : {}),
          }
        : null,
      attributePanel: {
        face: Object.fromEntries(this.panel.face),
        hair: Object.fromEntries(this.panel.hair),
      },
      history: this.entries.map((e) => ({
        request: e.request,
        thumbnail: bytesToBase64(e.thumbnail),
      })),
    };
    return JSON.stringify(doc, null, 1);
  }

  static fromJSON(text: string): Session {
    const doc = JSON.parse(text) as SessionJson;
    if (doc.version !== 1) throw new Error(`unsupported session version ${doc.version}`);
    const session = new Session();
    if (doc.source) session.sourceImage = base64ToBytes(doc.source);
    if (doc.target) session.targetImage = base64ToBytes(doc.target);
    if (doc.lastResult) {
      session.lastResult = {
        bytes: base64ToBytes(doc.lastResult.image),
        provenance: doc.lastResult.provenance,
        ...(doc.lastResult.warning !== undefined ? { warning: doc.lastResult.warning } : {}),
      };
    }
    for (const region of ["face", "hair"] as const) {
      for (const [name, value] of Object.entries(doc.attributePanel[region])) {
        session.setAttribute(region, name, value);
      }
    }
    for (const entry of doc.history) {
      session.entries.push({
        request: entry.request,
        thumbnail: base64ToBytes(entry.thumbnail),
      });
    }
    return session;
  }
}
