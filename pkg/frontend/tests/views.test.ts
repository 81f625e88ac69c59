import { describe, expect, it } from "vitest";
import { readFileSync } from "fs";
import { join } from "path";

import {
  MAX_SAMPLES, PROPERTY_BUTTONS, PROPERTY_KEYS, candidatePanel,
  historyCharts, idlePanel,
} from "../src/views.js";
import type { CandidatePayload, HistoryPayload } from "../src/types.js";

function fixture<T>(name: string): T {
  const raw = readFileSync(join(__dirname, "fixtures", name), "utf8");
  return JSON.parse(raw) as T;
}

const candidate = fixture<CandidatePayload>("candidate.json");
const history = fixture<HistoryPayload>("history.json");

describe("candidatePanel", () => {
  it("renders rule text, frequency and highlighted samples", () => {
    const panel = candidatePanel(candidate);
    expect(panel.kind).toBe("candidate");
    expect(panel.rule).toContain("::=");
    expect(panel.rule.startsWith("<")).toBe(true);
    expect(panel.frequency).toBeGreaterThanOrEqual(1);
    expect(panel.samples.length).toBeGreaterThan(0);
    for (const [i, sample] of panel.samples.entries()) {
      const source = candidate.samples[i];
      const full = [sample.before, sample.highlight, sample.after]
        .filter((part) => part.length > 0)
        .join(" ");
      expect(full).toBe(source.words.join(" "));
      expect(sample.highlight).toBe(
        source.words.slice(source.start, source.end).join(" "));
    }
  });

  it("lists the layered interpretation of each sample", () => {
    const panel = candidatePanel(candidate);
    const layers = panel.samples[0].layers.map((l) => l.name);
    expect(layers).toContain("class");
    expect(layers).toContain("lexical");
    const lexical = panel.samples[0].layers.find((l) => l.name === "lexical")!;
    expect(lexical.cells).toEqual(candidate.samples[0].words);
  });

  it("caps rendering at ten samples", () => {
    const flooded: CandidatePayload = {
      ...candidate,
      samples: Array.from({ length: 25 }, () => candidate.samples[0]),
    };
    const panel = candidatePanel(flooded);
    expect(panel.samples.length).toBe(MAX_SAMPLES);
    expect(panel.truncated).toBe(true);
  });

  it("renders rule and frequency alone when there are no samples", () => {
    const bare = candidatePanel({ ...candidate, samples: [] });
    expect(bare.samples).toEqual([]);
    expect(bare.truncated).toBe(false);
    expect(bare.rule).toBe(candidate.rule);
  });

  it("idle panel carries the session status", () => {
    expect(idlePanel("parsing")).toEqual({ kind: "idle", status: "parsing" });
  });
});

describe("historyCharts", () => {
  it("binds every series to the payload rows exactly", () => {
    const charts = historyCharts(history);
    expect(charts.iterations).toEqual(history.rows.map((r) => r.iteration));
    const coverage = charts.series.find((s) => s.label === "coverage")!;
    expect(coverage.points.map((p) => p.value)).toEqual(
      history.rows.map((r) => r.coverage));
    const frequency = charts.series.find(
      (s) => s.label === "top-rule frequency")!;
    expect(frequency.points.map((p) => p.value)).toEqual(
      history.rows.map((r) => r.frequency));
    const labels = charts.series.map((s) => s.label);
    expect(labels).toEqual(["coverage", "fully parsed", "operations",
                            "tree depth", "leaf nodes", "null leaves",
                            "top-rule frequency"]);
  });

  it("keeps monotone data monotone in the bindings", () => {
    const coverage = historyCharts(history).series[0].points.map((p) => p.value);
    const sorted = [...coverage].sort((a, b) => a - b);
    expect(coverage).toEqual(sorted);
  });

  it("renders an empty state for an empty history", () => {
    const charts = historyCharts({ rows: [] });
    expect(charts.iterations).toEqual([]);
    for (const series of charts.series) {
      expect(series.points).toEqual([]);
    }
  });
});

describe("decision affordances", () => {
  it("exposes the three property buttons", () => {
    expect(PROPERTY_BUTTONS).toEqual(["positive", "neutral", "non-inducible"]);
  });

  it("maps the keyboard shortcuts", () => {
    expect(PROPERTY_KEYS["p"]).toBe("positive");
    expect(PROPERTY_KEYS["n"]).toBe("neutral");
    expect(PROPERTY_KEYS["i"]).toBe("non-inducible");
  });
});
