/**
 * Client-side mirror of the engine's request validation, so the UI can
 * refuse to build a URL the endpoint would reject.  Must stay in sync
 * with the server's parameter table (see the repository README).
 */

export type Method = "GET" | "POST";

export interface RenderParams {
  action: string;
  object: string;
  source?: string;
  provider?: string;
  outputFormat?: string;
  userProfile?: string;
  focus?: string;
}

const ACTIONS = new Set(["renderOutput", "renderInput"]);
const OUTPUT_FORMATS = new Set(["HTML", "XHTML"]);

export function isValidElementRef(text: string): boolean {
  const parts = text.split(".");
  if (parts.length < 2 || parts.length > 3) return false;
  return parts.every((p) => p.length > 0);
}

export function isValidProviderId(text: string): boolean {
  const parts = text.split(".");
  return parts.length === 2 && parts.every((p) => p.length > 0);
}

/** Every rule the request would violate; an empty list means acceptable. */
export function validateRenderParams(method: Method, params: RenderParams): string[] {
  const problems: string[] = [];
  if (!ACTIONS.has(params.action)) {
    problems.push(`unknown action: ${params.action || "(missing)"}`);
  }
  if (!params.object) {
    problems.push("missing object");
  } else if (!isValidElementRef(params.object)) {
    problems.push(`malformed object: ${params.object}`);
  }
  if (method === "GET" && params.action === "renderOutput" && !params.source) {
    problems.push("GET renderOutput requires source");
  }
  if (method === "POST" && params.source) {
    problems.push("POST requests must not carry source");
  }
  if (params.provider && !isValidProviderId(params.provider)) {
    problems.push(`malformed provider: ${params.provider}`);
  }
  if (params.outputFormat && !OUTPUT_FORMATS.has(params.outputFormat)) {
    problems.push(`unknown outputFormat: ${params.outputFormat}`);
  }
  if (method === "POST" && params.userProfile) {
    problems.push("userProfile is GET-only");
  }
  return problems;
}

/** Query string in the exact wire vocabulary. */
export function renderQuery(params: RenderParams): string {
  const query = new URLSearchParams();
  query.set("action", params.action);
  query.set("object", params.object);
  if (params.source) query.set("source", params.source);
  if (params.provider) query.set("provider", params.provider);
  if (params.outputFormat) query.set("outputFormat", params.outputFormat);
  if (params.userProfile) query.set("userProfile", params.userProfile);
  if (params.focus) query.set("focus", params.focus);
  return query.toString();
}

/** A GET /render URL; throws if the engine would answer 4xx. */
export function buildRenderUrl(endpoint: string, params: RenderParams): string {
  const problems = validateRenderParams("GET", params);
  if (problems.length) {
    throw new Error(`invalid render request: ${problems.join("; ")}`);
  }
  return `${endpoint}/render?${renderQuery(params)}`;
}
