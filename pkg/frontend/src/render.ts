import type { StudioController } from "./controller.js";
import type { PanelName, Region, ResultImage, SlotName } from "./types.js";

/**
 * Single-page layout: inputs on the left, result in the center, the
 * attribute panel on the right, history strip along the bottom. Every
 * image element shows service bytes verbatim (object URL over the exact
 * response body) and upscales with nearest-neighbor rendering so
 * desk-scale outputs stay honest instead of smoothed.
 */

const PIXELATED = "image-rendering: pixelated; width: 256px; height: 256px;";
const THUMB = "image-rendering: pixelated; width: 64px; height: 64px;";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

/** Track object URLs so stale ones can be revoked when an image updates. */
export class ImageView {
  private url: string | null = null;

  constructor(readonly img: HTMLImageElement) {}

  show(bytes: Uint8Array): void {
    const next = URL.createObjectURL(new Blob([bytes as BlobPart], { type: "image/png" }));
    if (this.url) URL.revokeObjectURL(this.url);
    this.url = next;
    this.img.src = next;
  }
}

export class StudioView {
  readonly root: HTMLElement;
  readonly sourceView: ImageView;
  readonly targetView: ImageView;
  readonly resultView: ImageView;
  readonly resultCaption: HTMLElement;
  readonly errorBoxes: Record<PanelName, HTMLElement>;
  readonly retryButtons: Record<PanelName, HTMLButtonElement>;
  readonly historyStrip: HTMLElement;
  readonly galleryGrid: HTMLElement;
  readonly sliders = new Map<string, HTMLInputElement>();
  region: Region = "both";
  editSlot: SlotName = "source";
  private lastAction: Partial<Record<PanelName, () => void>> = {};

  constructor(
    private readonly doc: Document,
    private readonly controller: StudioController,
    attributeNames: string[],
  ) {
    this.root = el(doc, "div", { id: "studio" });
    const columns = el(doc, "div", { id: "columns", style: "display: flex; gap: 16px;" });
    this.root.appendChild(columns);

    // Left: uploads.
    const inputs = el(doc, "div", { id: "inputs" });
    columns.appendChild(inputs);
    this.sourceView = this.uploadBox(inputs, "source");
    this.targetView = this.uploadBox(inputs, "target");

    // Center: actions and the result.
    const center = el(doc, "div", { id: "result-panel" });
    columns.appendChild(center);
    const actions = el(doc, "div", { id: "actions" });
    center.appendChild(actions);
    this.actionButton(actions, "swap", "Swap faces", () => this.runSwap(false));
    this.actionButton(actions, "swap-gd", "Swap (stitched)", () => this.runSwap(true), "swap");
    this.actionButton(actions, "sample", "Random parts", () => this.runSamples());
    const scrub = el(doc, "input", {
      id: "interpolate-t",
      type: "range",
      min: "0",
      max: "1",
      step: "0.05",
      value: "0.5",
    });
    scrub.addEventListener("change", () => this.runInterpolate(Number(scrub.value)));
    actions.appendChild(scrub);

    const figure = el(doc, "figure");
    center.appendChild(figure);
    const resultImg = el(doc, "img", { id: "result", alt: "result", style: PIXELATED });
    figure.appendChild(resultImg);
    this.resultView = new ImageView(resultImg);
    this.resultCaption = el(doc, "figcaption", { id: "result-caption" });
    figure.appendChild(this.resultCaption);
    const promoteSource = el(doc, "button", { id: "promote-source" }, "Use as source");
    promoteSource.addEventListener("click", () => this.promote("source"));
    const promoteTarget = el(doc, "button", { id: "promote-target" }, "Use as target");
    promoteTarget.addEventListener("click", () => this.promote("target"));
    center.appendChild(promoteSource);
    center.appendChild(promoteTarget);

    this.errorBoxes = {} as Record<PanelName, HTMLElement>;
    this.retryButtons = {} as Record<PanelName, HTMLButtonElement>;
    for (const panel of ["swap", "edit", "sample", "interpolate"] as const) {
      const box = el(doc, "div", { id: `error-${panel}`, class: "error", hidden: "" });
      const message = el(doc, "span");
      const retry = el(doc, "button", {}, "Retry");
      retry.addEventListener("click", () => this.lastAction[panel]?.());
      box.appendChild(message);
      box.appendChild(retry);
      center.appendChild(box);
      this.errorBoxes[panel] = box;
      this.retryButtons[panel] = retry;
    }

    // Right: attribute panel mirroring the service vocabulary.
    const panel = el(doc, "div", { id: "attribute-panel" });
    columns.appendChild(panel);
    const regionSelect = el(doc, "select", { id: "region" });
    for (const value of ["face", "hair", "both"]) {
      regionSelect.appendChild(el(doc, "option", { value }, value));
    }
    regionSelect.value = this.region;
    regionSelect.addEventListener("change", () => {
      this.region = regionSelect.value as Region;
    });
    panel.appendChild(regionSelect);
    for (const name of attributeNames) {
      const row = el(doc, "label", { class: "attribute-row" }, name);
      const slider = el(doc, "input", {
        id: `attr-${name}`,
        type: "range",
        min: "0",
        max: "1",
        step: "0.01",
        value: "0",
      });
      slider.addEventListener("change", () => {
        const region = name.startsWith("hair") ? "hair" : "face";
        this.controller.session.setAttribute(region, name, Number(slider.value));
      });
      row.appendChild(slider);
      panel.appendChild(row);
      this.sliders.set(name, slider);
    }
    const apply = el(doc, "button", { id: "apply-edit" }, "Apply attributes");
    apply.addEventListener("click", () => this.runEdit());
    panel.appendChild(apply);

    // Bottom strips: sample gallery, then history.
    this.galleryGrid = el(doc, "div", { id: "gallery" });
    this.root.appendChild(this.galleryGrid);
    this.historyStrip = el(doc, "div", { id: "history" });
    this.root.appendChild(this.historyStrip);
  }

  private uploadBox(parent: HTMLElement, slot: SlotName): ImageView {
    const box = el(this.doc, "div", { class: "upload" });
    const input = el(this.doc, "input", { id: `upload-${slot}`, type: "file", accept: "image/png" });
    const img = el(this.doc, "img", { id: `${slot}-preview`, alt: slot, style: PIXELATED });
    const view = new ImageView(img);
    input.addEventListener("change", () => {
      const file = input.files?.[0];
      if (!file) return;
      void file.arrayBuffer().then((buf) => {
        const bytes = new Uint8Array(buf);
        this.controller.session.setImage(slot, bytes);
        view.show(bytes);
      });
    });
    box.appendChild(el(this.doc, "span", {}, slot));
    box.appendChild(input);
    box.appendChild(img);
    parent.appendChild(box);
    return view;
  }

  private actionButton(
    parent: HTMLElement,
    id: string,
    label: string,
    action: () => void,
    panel: PanelName = id as PanelName,
  ): void {
    const button = el(this.doc, "button", { id: `do-${id}` }, label);
    button.addEventListener("click", () => {
      this.lastAction[panel] = action;
      action();
    });
    parent.appendChild(button);
  }

  private promote(slot: SlotName): void {
    this.controller.session.promoteResult(slot);
    const bytes = this.controller.session.image(slot);
    if (bytes) (slot === "source" ? this.sourceView : this.targetView).show(bytes);
  }

  runSwap(gd: boolean): void {
    this.lastAction.swap = () => this.runSwap(gd);
    void this.finish("swap", this.controller.swap(gd));
  }

  runEdit(): void {
    this.lastAction.edit = () => this.runEdit();
    void this.finish("edit", this.controller.edit(this.editSlot, this.region));
  }

  runInterpolate(t: number): void {
    this.lastAction.interpolate = () => this.runInterpolate(t);
    void this.finish("interpolate", this.controller.interpolate(t, this.region));
  }

  runSamples(count = 8): void {
    this.lastAction.sample = () => this.runSamples(count);
    void this.controller
      .samples(count, this.region)
      .then((drawn) => {
        if (drawn === null) return;
        this.showError("sample", null);
        this.galleryGrid.replaceChildren();
        drawn.forEach((item, index) => {
          const thumb = el(this.doc, "img", {
            class: "gallery-thumb",
            alt: `sample ${index}`,
            style: THUMB,
          });
          new ImageView(thumb).show(item.bytes);
          thumb.addEventListener("click", () => {
            this.controller.promoteSample(index);
            this.showResult(item);
          });
          this.galleryGrid.appendChild(thumb);
        });
        this.refreshHistory();
      })
      .catch(() => this.showError("sample", this.controller.errors.sample ?? "failed"));
  }

  private async finish(panel: PanelName, pending: Promise<ResultImage | null>): Promise<void> {
    try {
      const result = await pending;
      if (result === null) return; // superseded by a newer action
      this.showError(panel, null);
      this.showResult(result);
      this.refreshHistory();
    } catch {
      this.showError(panel, this.controller.errors[panel] ?? "failed");
    }
  }

  showResult(result: ResultImage): void {
    this.resultView.show(result.bytes);
    const params = JSON.stringify(result.provenance.parameters);
    this.resultCaption.textContent = result.warning
      ? `${result.provenance.operation} ${params} — ${result.warning}`
      : `${result.provenance.operation} ${params}`;
  }

  private showError(panel: PanelName, message: string | null): void {
    const box = this.errorBoxes[panel];
    if (message === null) {
      box.setAttribute("hidden", "");
      return;
    }
    box.removeAttribute("hidden");
    const span = box.querySelector("span");
    if (span) span.textContent = message;
  }

  refreshHistory(): void {
    this.historyStrip.replaceChildren();
    for (const entry of this.controller.session.history) {
      const thumb = el(this.doc, "img", {
        class: "history-thumb",
        alt: entry.request.operation,
        style: THUMB,
        title: `${entry.request.operation} ${JSON.stringify(entry.request.parameters)}`,
      });
      new ImageView(thumb).show(entry.thumbnail);
      this.historyStrip.appendChild(thumb);
    }
  }
}
