import { describe, expect, it } from "vitest";

import { SessionClient } from "../src/api.js";

interface Call {
  url: string;
  init?: RequestInit;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** A scripted fetch stub recording every request. */
function stubFetch(handler: (call: Call, postCount: number) => Response | Error) {
  const calls: Call[] = [];
  let posts = 0;
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const call = { url, init };
    calls.push(call);
    if (init?.method === "POST") posts += 1;
    const out = handler(call, posts);
    if (out instanceof Error) throw out;
    return out;
  };
  return { impl, calls, postCount: () => posts };
}

const serverState = () => {
  // minimal exactly-once server double: first POST per token accepted,
  // later ones already-applied
  const applied = new Set<string>();
  return (call: Call): Response => {
    if (call.init?.method !== "POST") {
      return jsonResponse(200, {});
    }
    const body = JSON.parse(String(call.init.body));
    if (applied.has(body.token)) {
      return jsonResponse(200, { status: "already-applied", token: body.token });
    }
    applied.add(body.token);
    return jsonResponse(200, { status: "accepted", token: body.token });
  };
};

describe("SessionClient.submitDecision", () => {
  it("applies a decision once and reports duplicates after that", async () => {
    const server = serverState();
    const { impl, postCount } = stubFetch((call) => server(call));
    const client = new SessionClient("http://x", impl);
    const first = await client.submitDecision("iter-1", "positive");
    const second = await client.submitDecision("iter-1", "positive");
    expect(first.kind).toBe("applied");
    expect(second.kind).toBe("duplicate");
    expect(postCount()).toBe(1); // the duplicate never reached the wire
    expect(client.hasApplied("iter-1")).toBe(true);
  });

  it("joins two concurrent clicks into a single request", async () => {
    const server = serverState();
    const { impl, postCount } = stubFetch((call) => server(call));
    const client = new SessionClient("http://x", impl);
    const [a, b] = await Promise.all([
      client.submitDecision("iter-2", "neutral"),
      client.submitDecision("iter-2", "neutral"),
    ]);
    expect(postCount()).toBe(1);
    expect(a.kind).toBe("applied");
    expect(b.kind).toBe("applied"); // both callers see the one outcome
  });

  it("surfaces a conflict for a stale token", async () => {
    const { impl } = stubFetch(() =>
      jsonResponse(409, { error: "no pending candidate for this token" }));
    const client = new SessionClient("http://x", impl);
    const outcome = await client.submitDecision("iter-9", "positive");
    expect(outcome.kind).toBe("conflict");
    expect(client.hasApplied("iter-9")).toBe(false);
  });

  it("surfaces a rejection for an unknown property", async () => {
    const { impl } = stubFetch(() =>
      jsonResponse(400, { error: "unknown property 'sideways'" }));
    const client = new SessionClient("http://x", impl);
    const outcome = await client.submitDecision("iter-1", "sideways");
    expect(outcome.kind).toBe("rejected");
  });

  it("leaves the token retryable after a network failure", async () => {
    let failures = 1;
    const server = serverState();
    const { impl, postCount } = stubFetch((call) => {
      if (call.init?.method === "POST" && failures-- > 0) {
        return new Error("connection reset");
      }
      return server(call);
    });
    const client = new SessionClient("http://x", impl);
    const first = await client.submitDecision("iter-3", "positive");
    expect(first.kind).toBe("network-error");
    expect(client.hasApplied("iter-3")).toBe(false);
    const retry = await client.submitDecision("iter-3", "positive");
    expect(retry.kind).toBe("applied");
    expect(postCount()).toBe(2);
  });

  it("treats a server-side already-applied reply as a duplicate", async () => {
    const { impl } = stubFetch(() =>
      jsonResponse(200, { status: "already-applied", token: "iter-4" }));
    const client = new SessionClient("http://x", impl);
    const outcome = await client.submitDecision("iter-4", "positive");
    expect(outcome.kind).toBe("duplicate");
  });
});

describe("SessionClient reads", () => {
  it("returns null for a 404 candidate (session parsing)", async () => {
    const { impl } = stubFetch(() =>
      jsonResponse(404, { error: "no pending candidate" }));
    const client = new SessionClient("http://x", impl);
    expect(await client.candidate()).toBeNull();
  });

  it("fetches the descriptor, candidate and history unmodified", async () => {
    const payloads: Record<string, unknown> = {
      "/session": { status: "awaiting-decision", iteration: 3 },
      "/session/candidate": { token: "iter-4", rule: "<A> ::= b", samples: [] },
      "/session/history": { rows: [{ iteration: 1, coverage: 0.5 }] },
    };
    const { impl, calls } = stubFetch((call) => {
      const path = call.url.replace("http://x", "");
      return jsonResponse(200, payloads[path]);
    });
    const client = new SessionClient("http://x", impl);
    expect(await client.session()).toEqual(payloads["/session"]);
    expect(await client.candidate()).toEqual(payloads["/session/candidate"]);
    expect(await client.history()).toEqual(payloads["/session/history"]);
    expect(calls.every((c) => !c.init || c.init.method !== "POST")).toBe(true);
  });
});
