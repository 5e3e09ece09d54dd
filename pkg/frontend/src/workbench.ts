/**
 * Template workbench state: the characterization form model, its
 * key-value persistence document, and a preview controller that always
 * reflects the latest edit (in-flight requests are cancelled when a
 * newer one starts).
 */

import { ChannelClient, PreviewResult } from "./api.js";
import { RenderParams } from "./protocol.js";

export interface FeaturesModel {
  provider: string;
  design: string;
  target: string;
  kind: "output" | "input";
  codeTypes: string[];
  markupFormat: "HTML" | "XHTML";
  aesthetic: string;
  primaryColor: string;
  secondaryColor: string;
  preferredSize: string;
  minSize: string;
  maxSize: string;
  fontResize: "reflow" | "fixed" | "scale";
}

export const DEFAULT_FEATURES: FeaturesModel = {
  provider: "studio",
  design: "draft",
  target: "foaf.Person",
  kind: "output",
  codeTypes: ["html"],
  markupFormat: "HTML",
  aesthetic: "plain",
  primaryColor: "black",
  secondaryColor: "white",
  preferredSize: "320x240",
  minSize: "160x120",
  maxSize: "640x480",
  fontResize: "reflow",
};

/** The registry's key-value characterization document. */
export function featuresDocument(m: FeaturesModel): string {
  return [
    `provider = ${m.provider}`,
    `design = ${m.design}`,
    `target = ${m.target}`,
    `kind = ${m.kind}`,
    `codeTypes = ${m.codeTypes.join(", ")}`,
    `markupFormat = ${m.markupFormat}`,
    `aesthetic = ${m.aesthetic}`,
    `primaryColor = ${m.primaryColor}`,
    `secondaryColor = ${m.secondaryColor}`,
    `preferredSize = ${m.preferredSize}`,
    `minSize = ${m.minSize}`,
    `maxSize = ${m.maxSize}`,
    `fontResize = ${m.fontResize}`,
  ].join("\n") + "\n";
}

export const MACRO_SNIPPETS: Record<string, string> = {
  property: "[{OmemoGetP propName='foaf.name'}]",
  "server URL": "[{OmemoBaseURL}]",
  conditional: "[{OmemoConditionalVizFor propName='foaf.mbox' designerID='studio' designID='draft'}]",
  link: "[{OmemoGetLink relationName='foaf.knows'}]",
};

export type PreviewOutcome =
  | { kind: "rendered"; result: PreviewResult }
  | { kind: "superseded" }
  | { kind: "failed"; message: string };

export class PreviewController {
  private inflight: AbortController | null = null;
  private serial = 0;

  constructor(private client: ChannelClient) {}

  /**
   * Fetch a preview for the current state.  Starting a newer refresh
   * aborts this one, which then reports "superseded" instead of racing
   * the pane.
   */
  async refresh(params: RenderParams): Promise<PreviewOutcome> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const ticket = ++this.serial;
    try {
      const result = await this.client.preview(params, controller.signal);
      if (ticket !== this.serial) {
        return { kind: "superseded" };
      }
      return { kind: "rendered", result };
    } catch (err) {
      if (controller.signal.aborted) {
        return { kind: "superseded" };
      }
      return { kind: "failed", message: err instanceof Error ? err.message : String(err) };
    } finally {
      if (this.inflight === controller) {
        this.inflight = null;
      }
    }
  }
}

/** Preview parameters for one saved test source. */
export function previewParams(m: FeaturesModel, sourceUrl: string,
                              registered: boolean): RenderParams {
  const params: RenderParams = {
    action: m.kind === "input" ? "renderInput" : "renderOutput",
    object: m.target,
    outputFormat: m.markupFormat,
  };
  if (params.action === "renderOutput") {
    params.source = sourceUrl;
  }
  if (registered) {
    params.provider = `${m.provider}.${m.design}`;
  }
  return params;
}
