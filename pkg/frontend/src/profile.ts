/**
 * Profile editing: turn the three facet controls into a profile graph
 * the matcher understands, and shape its JSON report for the table.
 */

import { MatchReport } from "./api.js";

export interface ProfileFacets {
  /** protocol term name in the device ontology, e.g. "WAP2.0"; "" = unset */
  protocol: string;
  /** style term name in the taxonomy, e.g. "simple"; "" = unset */
  aesthetic: string;
  /** impairment term names, e.g. ["redGreenDeficiency"] */
  impairments: string[];
}

export const PROTOCOL_OPTIONS = ["", "WAP2.0", "desktop"];
export const STYLE_OPTIONS = ["", "simple", "minimal", "baroque", "ornate", "decorated"];
export const IMPAIRMENT_OPTIONS = ["redGreenDeficiency"];

export const USER34: ProfileFacets = {
  protocol: "WAP2.0",
  aesthetic: "simple",
  impairments: ["redGreenDeficiency"],
};

/**
 * The profile as Turtle.  Facet values point straight at the auxiliary
 * ontologies' terms, so matching works without extra alignment links;
 * an empty facet is simply omitted.
 */
export function profileToTurtle(facets: ProfileFacets): string {
  const lines = [
    "@prefix a: <http://profiles.example/ns#> .",
    "@prefix z1: <http://ontologies.example/protocol#> .",
    "@prefix z3: <http://ontologies.example/style#> .",
    "@prefix z5: <http://ontologies.example/impairment#> .",
    "",
  ];
  const facts = ["a:webUser a a:UserProfile"];
  if (facets.protocol) facts.push(`    a:deviceProtocol z1:${facets.protocol}`);
  if (facets.aesthetic) facts.push(`    a:prefersStyle z3:${facets.aesthetic}`);
  for (const impairment of facets.impairments) {
    facts.push(`    a:hasImpairment z5:${impairment}`);
  }
  lines.push(facts.join(" ;\n") + " .");
  return lines.join("\n") + "\n";
}

export function isEmptyProfile(facets: ProfileFacets): boolean {
  return !facets.protocol && !facets.aesthetic && facets.impairments.length === 0;
}

export interface MatchRow {
  id: string;
  status: "winner" | "eligible" | "excluded";
  total: number;
  aestheticDistance: number;
  colorPenalty: number;
  trace: string[];
}

/** Rows for the candidate table, in the report's ranking order. */
export function reportRows(report: MatchReport): MatchRow[] {
  return report.candidates.map((c) => ({
    id: c.id,
    status: c.winner ? "winner" : c.hardPass ? "eligible" : "excluded",
    total: c.total,
    aestheticDistance: c.aestheticDistance,
    colorPenalty: c.colorPenalty,
    trace: c.trace,
  }));
}

export function winnerOf(report: MatchReport): string | null {
  return report.winner;
}
