/**
 * Wires the three panels to the engine: the template workbench (edit,
 * characterize, register, live preview over saved test sources), the
 * profile editor with its scored candidate table, and the embed-snippet
 * generator.  All data flows through the documented channel endpoints.
 */

import { ChannelClient } from "./api.js";
import {
  IMPAIRMENT_OPTIONS, PROTOCOL_OPTIONS, STYLE_OPTIONS, ProfileFacets,
  isEmptyProfile, profileToTurtle, reportRows,
} from "./profile.js";
import { EmbedConfig, buildEmbedUrl, iframeSnippet, scriptSnippet } from "./snippet.js";
import {
  DEFAULT_FEATURES, FeaturesModel, MACRO_SNIPPETS, PreviewController,
  featuresDocument, previewParams,
} from "./workbench.js";

const client = new ChannelClient("");
const preview = new PreviewController(client);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

// ---------------------------------------------------------------------------
// Workbench panel

const DEFAULT_BODY = `<div class="card">
<h2>[{OmemoGetP propName='foaf.name'}]</h2>
<p>mail: [{OmemoGetP propName='foaf.mbox'}]</p>
<p>knows: [{OmemoGetLink relationName='foaf.knows'}]</p>
</div>`;

const state = {
  features: { ...DEFAULT_FEATURES } as FeaturesModel,
  body: DEFAULT_BODY,
  sources: [] as string[],
  activeSource: "",
  registered: false,
};

function readFeaturesForm(): FeaturesModel {
  return {
    provider: el<HTMLInputElement>("f-provider").value.trim(),
    design: el<HTMLInputElement>("f-design").value.trim(),
    target: el<HTMLInputElement>("f-target").value.trim(),
    kind: el<HTMLSelectElement>("f-kind").value as FeaturesModel["kind"],
    codeTypes: ["html", "css", "script"].filter(
      (c) => el<HTMLInputElement>(`f-code-${c}`).checked),
    markupFormat: el<HTMLSelectElement>("f-markup").value as FeaturesModel["markupFormat"],
    aesthetic: el<HTMLInputElement>("f-aesthetic").value.trim() || "plain",
    primaryColor: el<HTMLInputElement>("f-primary").value.trim() || "black",
    secondaryColor: el<HTMLInputElement>("f-secondary").value.trim() || "white",
    preferredSize: el<HTMLInputElement>("f-preferred").value.trim() || "320x240",
    minSize: el<HTMLInputElement>("f-min").value.trim() || "160x120",
    maxSize: el<HTMLInputElement>("f-max").value.trim() || "640x480",
    fontResize: el<HTMLSelectElement>("f-font").value as FeaturesModel["fontResize"],
  };
}

async function registerDraft(overwrite: boolean): Promise<boolean> {
  state.features = readFeaturesForm();
  state.body = el<HTMLTextAreaElement>("body-editor").value;
  const status = el<HTMLElement>("register-status");
  try {
    const id = await client.registerTemplate(featuresDocument(state.features), state.body, overwrite);
    state.registered = true;
    status.textContent = `registered ${id}`;
    status.className = "ok";
    return true;
  } catch (err) {
    state.registered = false;
    status.textContent = String(err instanceof Error ? err.message : err);
    status.className = "error";
    return false;
  }
}

async function refreshPreview(): Promise<void> {
  const pane = el<HTMLIFrameElement>("preview-pane");
  const note = el<HTMLElement>("preview-status");
  if (!state.activeSource && state.features.kind === "output") {
    note.textContent = "add a test source URL to preview";
    return;
  }
  const outcome = await preview.refresh(
    previewParams(state.features, state.activeSource, state.registered));
  if (outcome.kind === "superseded") return;
  if (outcome.kind === "failed") {
    note.textContent = outcome.message;
    return;
  }
  note.textContent = `HTTP ${outcome.result.status} (${outcome.result.contentType})`;
  pane.srcdoc = outcome.result.body;  // diagnostic pages show inline too
}

let previewTimer: ReturnType<typeof setTimeout> | undefined;

function schedulePreview(): void {
  clearTimeout(previewTimer);
  previewTimer = setTimeout(async () => {
    await registerDraft(true);
    await refreshPreview();
  }, 300);
}

function renderSourceList(): void {
  const list = el<HTMLElement>("source-list");
  list.innerHTML = "";
  for (const url of state.sources) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = url;
    button.className = url === state.activeSource ? "active" : "";
    button.addEventListener("click", () => {
      state.activeSource = url;
      renderSourceList();
      void refreshPreview();
    });
    item.appendChild(button);
    list.appendChild(item);
  }
}

function wireWorkbench(): void {
  el<HTMLTextAreaElement>("body-editor").value = DEFAULT_BODY;
  el<HTMLElement>("macro-buttons").append(
    ...Object.entries(MACRO_SNIPPETS).map(([label, snippet]) => {
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = label;
      button.addEventListener("click", () => {
        const editor = el<HTMLTextAreaElement>("body-editor");
        const at = editor.selectionStart ?? editor.value.length;
        editor.value = editor.value.slice(0, at) + snippet + editor.value.slice(at);
        schedulePreview();
      });
      return button;
    }),
  );
  el<HTMLTextAreaElement>("body-editor").addEventListener("input", schedulePreview);
  for (const input of document.querySelectorAll("#features-form input, #features-form select")) {
    input.addEventListener("change", schedulePreview);
  }
  el<HTMLButtonElement>("add-source").addEventListener("click", () => {
    const input = el<HTMLInputElement>("source-input");
    const url = input.value.trim();
    if (!url) return;
    if (!state.sources.includes(url)) state.sources.push(url);
    state.activeSource = url;
    input.value = "";
    renderSourceList();
    void refreshPreview();
  });
  el<HTMLButtonElement>("register-btn").addEventListener("click", () => {
    void registerDraft(true).then(refreshPreview);
  });
  el<HTMLButtonElement>("describe-btn").addEventListener("click", async () => {
    const target = readFeaturesForm().target;
    try {
      el<HTMLElement>("describe-output").textContent = await client.describe(target);
    } catch (err) {
      el<HTMLElement>("describe-output").textContent = String(err);
    }
  });
}

// ---------------------------------------------------------------------------
// Profile panel

function readProfileForm(): ProfileFacets {
  return {
    protocol: el<HTMLSelectElement>("p-protocol").value,
    aesthetic: el<HTMLSelectElement>("p-aesthetic").value,
    impairments: IMPAIRMENT_OPTIONS.filter(
      (name) => el<HTMLInputElement>(`p-imp-${name}`).checked),
  };
}

async function refreshMatch(): Promise<void> {
  const facets = readProfileForm();
  const object = el<HTMLInputElement>("p-object").value.trim() || "foaf.Person";
  const table = el<HTMLElement>("match-table");
  const report = await client.match(object, profileToTurtle(facets));
  const rows = reportRows(report);
  if (!rows.length) {
    table.innerHTML = "<p>no templates registered for this element</p>";
    return;
  }
  const body = rows.map((row) => `
    <tr class="${row.status}${row.status === "winner" ? " highlight" : ""}">
      <td>${escapeHtml(row.id)}</td><td>${row.status}</td>
      <td>${row.total}</td><td>${row.aestheticDistance}</td><td>${row.colorPenalty}</td>
      <td><details><summary>trace</summary><pre>${escapeHtml(row.trace.join("\n"))}</pre></details></td>
    </tr>`).join("");
  table.innerHTML = `
    <table><tr><th>template</th><th>status</th><th>total</th>
    <th>aesthetic</th><th>colour</th><th></th></tr>${body}</table>`;
  const note = isEmptyProfile(facets) ? " (empty profile: every candidate scores 0)" : "";
  el<HTMLElement>("match-status").textContent =
    (report.winner ? `best: ${report.winner}` : "no eligible template; default applies") + note;

  if (report.winner && state.activeSource) {
    const winnerPreview = await client.preview({
      action: "renderOutput", object, source: state.activeSource, provider: report.winner,
    });
    el<HTMLIFrameElement>("winner-pane").srcdoc = winnerPreview.body;
  }
}

function wireProfile(): void {
  const protocol = el<HTMLSelectElement>("p-protocol");
  for (const option of PROTOCOL_OPTIONS) {
    protocol.add(new Option(option || "(unset)", option));
  }
  const aesthetic = el<HTMLSelectElement>("p-aesthetic");
  for (const option of STYLE_OPTIONS) {
    aesthetic.add(new Option(option || "(unset)", option));
  }
  const impairments = el<HTMLElement>("p-impairments");
  for (const name of IMPAIRMENT_OPTIONS) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.id = `p-imp-${name}`;
    label.append(box, ` ${name}`);
    impairments.appendChild(label);
  }
  for (const control of document.querySelectorAll("#profile-form select, #profile-form input")) {
    control.addEventListener("change", () => void refreshMatch());
  }
  el<HTMLButtonElement>("match-btn").addEventListener("click", () => void refreshMatch());
}

// ---------------------------------------------------------------------------
// Snippet panel

function readEmbedConfig(): EmbedConfig {
  return {
    endpoint: window.location.origin,
    object: el<HTMLInputElement>("e-object").value.trim(),
    source: el<HTMLInputElement>("e-source").value.trim(),
    provider: el<HTMLInputElement>("e-provider").value.trim() || undefined,
    outputFormat: el<HTMLInputElement>("e-xhtml").checked ? "XHTML" : undefined,
    userProfile: el<HTMLInputElement>("e-profile").value.trim() || undefined,
  };
}

function wireSnippet(): void {
  const update = () => {
    const output = el<HTMLTextAreaElement>("snippet-output");
    try {
      const cfg = readEmbedConfig();
      output.value = el<HTMLInputElement>("e-script").checked
        ? scriptSnippet(cfg)
        : iframeSnippet(cfg);
      el<HTMLElement>("snippet-status").textContent = buildEmbedUrl(cfg);
    } catch (err) {
      output.value = "";
      el<HTMLElement>("snippet-status").textContent = String(
        err instanceof Error ? err.message : err);
    }
  };
  for (const control of document.querySelectorAll("#snippet-form input")) {
    control.addEventListener("input", update);
  }
  update();
}

document.addEventListener("DOMContentLoaded", () => {
  wireWorkbench();
  wireProfile();
  wireSnippet();
});
