// Pure view models: everything the DOM layer renders is computed here from
// service payloads, so the bindings can be tested without a browser.

import type {
  CandidatePayload, HistoryPayload, HistoryRow, SampleView,
} from "./types.js";

export const MAX_SAMPLES = 10;

export interface HighlightedSample {
  sentenceId: string;
  before: string;
  highlight: string;
  after: string;
  layers: { name: string; cells: string[] }[];
}

export interface CandidatePanel {
  kind: "candidate";
  token: string;
  iteration: number;
  rule: string;
  frequency: number;
  samples: HighlightedSample[];
  truncated: boolean;
}

export interface IdlePanel {
  kind: "idle";
  status: string; // "parsing", "stopped", ...
}

export type Panel = CandidatePanel | IdlePanel;

export function idlePanel(status: string): IdlePanel {
  return { kind: "idle", status };
}

function sampleView(sample: SampleView): HighlightedSample {
  const words = sample.words;
  const layers = Object.keys(sample.layers).sort().map((name) => {
    const cells = new Array<string>(words.length).fill("");
    for (const tok of sample.layers[name]) {
      if (tok.v === null) continue;
      cells[tok.s] = tok.e - tok.s > 1 ? `${tok.v} [${tok.s}..${tok.e})` : tok.v;
    }
    return { name, cells };
  });
  return {
    sentenceId: sample.sentence_id,
    before: words.slice(0, sample.start).join(" "),
    highlight: words.slice(sample.start, sample.end).join(" "),
    after: words.slice(sample.end).join(" "),
    layers,
  };
}

export function candidatePanel(payload: CandidatePayload): CandidatePanel {
  const samples = payload.samples.slice(0, MAX_SAMPLES).map(sampleView);
  return {
    kind: "candidate",
    token: payload.token,
    iteration: payload.iteration,
    rule: payload.rule,
    frequency: payload.frequency,
    samples,
    truncated: payload.samples.length > MAX_SAMPLES,
  };
}

export interface Series {
  label: string;
  points: { iteration: number; value: number }[];
}

export interface HistoryCharts {
  iterations: number[];
  series: Series[];
}

const SERIES_FIELDS: [keyof HistoryRow, string][] = [
  ["coverage", "coverage"],
  ["fully_parsed", "fully parsed"],
  ["avg_operations", "operations"],
  ["avg_tree_depth", "tree depth"],
  ["avg_leaf_count", "leaf nodes"],
  ["avg_null_leaf_count", "null leaves"],
  ["frequency", "top-rule frequency"],
];

export function historyCharts(payload: HistoryPayload): HistoryCharts {
  const rows = payload.rows;
  return {
    iterations: rows.map((r) => r.iteration),
    series: SERIES_FIELDS.map(([field, label]) => ({
      label,
      points: rows.map((r) => ({
        iteration: r.iteration,
        value: Number(r[field]),
      })),
    })),
  };
}

// keyboard shortcuts for the few-seconds decision loop
export const PROPERTY_KEYS: Record<string, string> = {
  p: "positive",
  n: "neutral",
  i: "non-inducible",
  g: "negative",
};

export const PROPERTY_BUTTONS = ["positive", "neutral", "non-inducible"];
