export type Region = "face" | "hair" | "both";

export type SlotName = "source" | "target";

/** Which single-flight lane a request runs in; one in-flight request per panel. */
export type PanelName = "swap" | "edit" | "sample" | "interpolate";

/** Exactly what was asked of the service, recorded next to every result. */
export interface Provenance {
  operation: string;
  /** Form fields as sent, stringified verbatim. */
  parameters: Record<string, string>;
}

/** A service-produced image; `bytes` is the response body, untouched. */
export interface ResultImage {
  bytes: Uint8Array;
  provenance: Provenance;
  /** Resize note from the service's Warning header, if any. */
  warning?: string;
}

export interface HistoryEntry {
  request: Provenance;
  thumbnail: Uint8Array;
}

export interface ServiceError {
  status: number;
  detail: string;
}
