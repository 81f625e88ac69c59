// Entry point: poll the session service once a second, render the pending
// candidate and the history charts, submit decisions exactly once.

import { SessionClient } from "./api.js";
import { renderCharts, renderPanel, renderStatus } from "./dom.js";
import {
  PROPERTY_KEYS, candidatePanel, historyCharts, idlePanel,
} from "./views.js";
import type { CandidatePayload } from "./types.js";

const POLL_MS = 1000;

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://127.0.0.1:8765";
const client = new SessionClient(base);

const statusEl = document.getElementById("status") as HTMLElement;
const panelEl = document.getElementById("candidate") as HTMLElement;
const chartsEl = document.getElementById("charts") as HTMLElement;

let current: CandidatePayload | null = null;
let notice = "";

async function decide(property: string): Promise<void> {
  if (!current) return;
  const token = current.token;
  render(false);
  const outcome = await client.submitDecision(token, property);
  switch (outcome.kind) {
    case "applied":
      notice = `applied ${property} (${token})`;
      break;
    case "duplicate":
      notice = `already applied (${token})`;
      break;
    case "conflict":
      notice = `conflict: ${outcome.message}`;
      break;
    case "rejected":
      notice = `rejected: ${outcome.message}`;
      break;
    case "network-error":
      notice = `network error, safe to retry: ${outcome.message}`;
      render(true); // token not applied: re-enable the buttons
      return;
  }
  await refresh();
}

function render(enabled: boolean): void {
  if (current) {
    renderPanel(panelEl, candidatePanel(current),
                enabled && !client.hasApplied(current.token), decide);
  }
}

async function refresh(): Promise<void> {
  try {
    const descriptor = await client.session();
    if (!descriptor) return;
    renderStatus(statusEl,
      `${descriptor.session_id}: ${descriptor.status}, iteration ` +
      `${descriptor.iteration}, ${descriptor.grammar_rules} rules` +
      (notice ? ` — ${notice}` : ""));
    if (descriptor.status === "awaiting-decision") {
      const candidate = await client.candidate();
      if (candidate) {
        const fresh = !current || current.token !== candidate.token;
        current = candidate;
        if (fresh) notice = "";
        render(!client.busy);
      }
    } else {
      current = null;
      renderPanel(panelEl, idlePanel(descriptor.status), false, decide);
    }
    const history = await client.history();
    if (history) renderCharts(chartsEl, historyCharts(history));
  } catch (err) {
    renderStatus(statusEl, `service unreachable: ${err}`);
  }
}

document.addEventListener("keydown", (ev) => {
  const property = PROPERTY_KEYS[ev.key];
  if (property && current && !client.busy) {
    void decide(property);
  }
});

void refresh();
setInterval(() => void refresh(), POLL_MS);
