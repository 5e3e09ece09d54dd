/**
 * Embed-snippet generation: a copyable iframe (or loader script) whose
 * URL is a valid GET request against the rendering endpoint.
 */

import { RenderParams, buildRenderUrl } from "./protocol.js";

export interface EmbedConfig {
  endpoint: string;
  object: string;
  source: string;
  provider?: string;
  outputFormat?: "HTML" | "XHTML";
  userProfile?: string;
  width?: number;
  height?: number;
}

export function embedParams(cfg: EmbedConfig): RenderParams {
  return {
    action: "renderOutput",
    object: cfg.object,
    source: cfg.source,
    provider: cfg.provider || undefined,
    outputFormat: cfg.outputFormat,
    userProfile: cfg.userProfile || undefined,
  };
}

export function buildEmbedUrl(cfg: EmbedConfig): string {
  return buildRenderUrl(cfg.endpoint, embedParams(cfg));
}

function escapeAttr(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/"/g, "&quot;").replace(/</g, "&lt;");
}

export function iframeSnippet(cfg: EmbedConfig): string {
  const url = buildEmbedUrl(cfg);
  const width = cfg.width ?? 320;
  const height = cfg.height ?? 240;
  return `<iframe src="${escapeAttr(url)}" width="${width}" height="${height}" frameborder="0"></iframe>`;
}

export function scriptSnippet(cfg: EmbedConfig, targetId = "semviz-embed"): string {
  const url = buildEmbedUrl(cfg);
  return [
    `<div id="${targetId}"></div>`,
    `<script>`,
    `fetch(${JSON.stringify(url)})`,
    `  .then(function (r) { return r.text(); })`,
    `  .then(function (html) { document.getElementById(${JSON.stringify(targetId)}).innerHTML = html; });`,
    `</script>`,
  ].join("\n");
}
