// Typed client for the session service. The only mutating call is the
// decision post; the token from the candidate payload makes it idempotent,
// and the client additionally keeps at most one request in flight and
// remembers applied tokens, so a double click or a retry after a network
// error can never apply a decision twice.

import type {
  CandidatePayload, DecisionReply, HistoryPayload, SessionDescriptor,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type DecisionOutcome =
  | { kind: "applied"; token: string }
  | { kind: "duplicate"; token: string }
  | { kind: "conflict"; message: string }
  | { kind: "rejected"; message: string }
  | { kind: "network-error"; message: string };

export class SessionClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  private inFlight: Promise<DecisionOutcome> | null = null;
  private readonly applied = new Set<string>();

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async getJson<T>(path: string): Promise<T | null> {
    const resp = await this.fetchImpl(this.base + path);
    if (resp.status === 404) return null;
    if (!resp.ok) throw new Error(`${path}: HTTP ${resp.status}`);
    return (await resp.json()) as T;
  }

  session(): Promise<SessionDescriptor | null> {
    return this.getJson<SessionDescriptor>("/session");
  }

  candidate(): Promise<CandidatePayload | null> {
    return this.getJson<CandidatePayload>("/session/candidate");
  }

  history(): Promise<HistoryPayload | null> {
    return this.getJson<HistoryPayload>("/session/history");
  }

  grammarText(): Promise<string> {
    return this.fetchImpl(this.base + "/grammar").then((r) => r.text());
  }

  hasApplied(token: string): boolean {
    return this.applied.has(token);
  }

  get busy(): boolean {
    return this.inFlight !== null;
  }

  async submitDecision(token: string, property: string): Promise<DecisionOutcome> {
    if (this.applied.has(token)) {
      return { kind: "duplicate", token };
    }
    if (this.inFlight) {
      // one decision at a time: a second click joins the first request
      return this.inFlight;
    }
    this.inFlight = this.post(token, property);
    try {
      return await this.inFlight;
    } finally {
      this.inFlight = null;
    }
  }

  private async post(token: string, property: string): Promise<DecisionOutcome> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + "/session/decision", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ token, property }),
      });
    } catch (err) {
      // network failure: token not marked applied, a retry stays safe
      return { kind: "network-error", message: String(err) };
    }
    const body = (await resp.json()) as DecisionReply;
    if (resp.status === 409) {
      return { kind: "conflict", message: body.error ?? "conflict" };
    }
    if (!resp.ok) {
      return { kind: "rejected", message: body.error ?? `HTTP ${resp.status}` };
    }
    this.applied.add(token);
    return body.status === "already-applied"
      ? { kind: "duplicate", token }
      : { kind: "applied", token };
  }
}
