import type { StudioClient, ServiceImage } from "./client.js";
import type { Session } from "./session.js";
import type { PanelName, Region, ResultImage, SlotName } from "./types.js";

function isAbort(err: unknown): boolean {
  // Abort rejections are DOMExceptions in browsers and, depending on the
  // runtime, may not inherit Error; match on the name alone.
  return (
    typeof err === "object" && err !== null && (err as { name?: unknown }).name === "AbortError"
  );
}

/**
 * Single-flight lane: starting a new task aborts the one in flight, and
 * a superseded task's result is never applied, even if its request
 * manages to complete after the abort.
 */
export class PanelLane {
  private inflight: AbortController | null = null;
  private generation = 0;

  /** Resolves null when this task was superseded or aborted. */
  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T | null> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const mine = ++this.generation;
    try {
      const value = await task(controller.signal);
      if (mine !== this.generation) return null;
      return value;
    } catch (err) {
      if (isAbort(err) || mine !== this.generation) return null;
      throw err;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  get busy(): boolean {
    return this.inflight !== null;
  }
}

/**
 * Drives the four studio panels against the service, writing accepted
 * results into the session. One in-flight request per panel; a newer
 * action on the same panel cancels the stale one.
 */
export class StudioController {
  readonly lanes: Record<PanelName, PanelLane> = {
    swap: new PanelLane(),
    edit: new PanelLane(),
    sample: new PanelLane(),
    interpolate: new PanelLane(),
  };
  /** The sample panel's current gallery, in seed order. */
  gallery: ResultImage[] = [];
  /** Last failure per panel, for inline display next to a retry control. */
  errors: Partial<Record<PanelName, string>> = {};

  constructor(
    readonly client: StudioClient,
    readonly session: Session,
  ) {}

  /** Swap the source's face into the target; the result joins the history. */
  async swap(gd: boolean): Promise<ResultImage | null> {
    const source = this.required("source");
    const target = this.required("target");
    return this.accept("swap", (signal) => this.client.swap(source, target, gd, signal));
  }

  /** Re-render one slot's image with the panel's attribute values applied. */
  async edit(slot: SlotName, region: Region): Promise<ResultImage | null> {
    const image = this.required(slot);
    const deltas = this.session.deltas(region);
    return this.accept("edit", (signal) => this.client.edit(image, deltas, region, signal));
  }

  /**
   * Draw `count` seeded samples (seeds 0..count-1) around the slot's
   * image, or from scratch when no slot is given. Fills the gallery; each
   * drawn sample joins the history.
   */
  async samples(count: number, region: Region, slot?: SlotName): Promise<ResultImage[] | null> {
    const base = slot ? this.required(slot) : null;
    let drawn: ServiceImage[] | null;
    try {
      drawn = await this.lanes.sample.run(async (signal) => {
        const all: ServiceImage[] = [];
        for (let seed = 0; seed < count; seed++) {
          all.push(await this.client.sample(base, region, seed, signal));
        }
        return all;
      });
    } catch (err) {
      this.errors.sample = err instanceof Error ? err.message : String(err);
      throw err;
    }
    if (drawn === null) return null;
    delete this.errors.sample;
    this.gallery = drawn;
    for (const item of drawn) this.session.acceptResult(item);
    return drawn;
  }

  /** Promote a gallery entry to the session's last result. */
  promoteSample(index: number): void {
    const item = this.gallery[index];
    if (!item) throw new Error(`no gallery entry ${index}`);
    this.session.lastResult = item;
  }

  /** Blend source toward target at position t, varying one region. */
  async interpolate(t: number, region: Region): Promise<ResultImage | null> {
    const a = this.required("source");
    const b = this.required("target");
    return this.accept("interpolate", (signal) =>
      this.client.interpolate(a, b, t, region, signal),
    );
  }

  private required(slot: SlotName): Uint8Array {
    const bytes = this.session.image(slot);
    if (!bytes) throw new Error(`no ${slot} image uploaded`);
    return bytes;
  }

  private async accept(
    panel: PanelName,
    task: (signal: AbortSignal) => Promise<ServiceImage>,
  ): Promise<ResultImage | null> {
    try {
      const result = await this.lanes[panel].run(task);
      if (result === null) return null;
      delete this.errors[panel];
      this.session.acceptResult(result);
      return result;
    } catch (err) {
      this.errors[panel] = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }
}
