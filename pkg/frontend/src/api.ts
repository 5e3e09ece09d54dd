/**
 * Thin client for the engine.  Every byte shown in the UI comes from
 * these documented endpoints: /render, /metadata, /describe, /match,
 * /templates.  Nothing is computed locally.
 */

import { RenderParams, buildRenderUrl, renderQuery, validateRenderParams } from "./protocol.js";

export interface PreviewResult {
  status: number;
  contentType: string;
  body: string;
}

export interface MatchCandidate {
  id: string;
  target: string;
  hardPass: boolean;
  aestheticDistance: number;
  colorPenalty: number;
  total: number;
  trace: string[];
  winner: boolean;
}

export interface MatchReport {
  object: string;
  profileFound: boolean;
  winner: string | null;
  candidates: MatchCandidate[];
}

export interface TemplateInfo {
  id: string;
  target: string;
  kind: string;
  markupFormat: string;
}

export class ChannelClient {
  constructor(
    private endpoint: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  renderUrl(params: RenderParams): string {
    return buildRenderUrl(this.endpoint, params);
  }

  async preview(params: RenderParams, signal?: AbortSignal): Promise<PreviewResult> {
    const problems = validateRenderParams("GET", params);
    if (problems.length) {
      throw new Error(problems.join("; "));
    }
    const resp = await this.fetchFn(`${this.endpoint}/render?${renderQuery(params)}`, { signal });
    return {
      status: resp.status,
      contentType: resp.headers.get("Content-Type") ?? "",
      body: await resp.text(),
    };
  }

  async describe(object: string): Promise<string> {
    const query = new URLSearchParams({ object });
    const resp = await this.fetchFn(`${this.endpoint}/describe?${query}`);
    if (!resp.ok) throw new Error(`describe failed: ${resp.status}`);
    return resp.text();
  }

  async metadata(): Promise<string> {
    const resp = await this.fetchFn(`${this.endpoint}/metadata`);
    if (!resp.ok) throw new Error(`metadata failed: ${resp.status}`);
    return resp.text();
  }

  async match(object: string, profileTurtle: string): Promise<MatchReport> {
    const body = new URLSearchParams({ object, profile: profileTurtle });
    const resp = await this.fetchFn(`${this.endpoint}/match`, {
      method: "POST",
      headers: { "Content-Type": "application/x-www-form-urlencoded" },
      body: body.toString(),
    });
    if (!resp.ok) throw new Error(`match failed: ${resp.status}`);
    return resp.json() as Promise<MatchReport>;
  }

  async listTemplates(): Promise<TemplateInfo[]> {
    const resp = await this.fetchFn(`${this.endpoint}/templates`);
    if (!resp.ok) throw new Error(`template listing failed: ${resp.status}`);
    return resp.json() as Promise<TemplateInfo[]>;
  }

  async registerTemplate(features: string, body: string, overwrite = false): Promise<string> {
    const payload = new URLSearchParams({ features, body });
    if (overwrite) payload.set("overwrite", "true");
    const resp = await this.fetchFn(`${this.endpoint}/templates`, {
      method: "POST",
      headers: { "Content-Type": "application/x-www-form-urlencoded" },
      body: payload.toString(),
    });
    const data = (await resp.json()) as { id?: string; error?: string };
    if (!resp.ok || !data.id) {
      throw new Error(data.error ?? `registration failed: ${resp.status}`);
    }
    return data.id;
  }
}
