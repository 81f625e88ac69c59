// Payload shapes of the session service endpoints.

export type Property = "positive" | "neutral" | "negative" | "non-inducible";

export interface SessionDescriptor {
  session_id: string;
  status: "idle" | "parsing" | "awaiting-decision" | "stopped";
  iteration: number;
  pending: boolean;
  grammar_version: number;
  grammar_rules: number;
  corpus_sentences: number;
}

export interface LayerToken {
  v: string | null;
  s: number;
  e: number;
}

export interface SampleView {
  sentence_id: string;
  start: number;
  end: number;
  words: string[];
  layers: Record<string, LayerToken[]>;
}

export interface CandidatePayload {
  token: string;
  iteration: number;
  rule: string;
  frequency: number;
  samples: SampleView[];
  properties: string[];
}

export interface HistoryRow {
  iteration: number;
  rule: string;
  property: string;
  frequency: number;
  coverage: number;
  fully_parsed: number;
  avg_operations: number;
  avg_tree_depth: number;
  avg_leaf_count: number;
  avg_null_leaf_count: number;
}

export interface HistoryPayload {
  rows: HistoryRow[];
}

export interface DecisionReply {
  status?: "accepted" | "already-applied";
  token?: string;
  property?: string;
  error?: string;
}
