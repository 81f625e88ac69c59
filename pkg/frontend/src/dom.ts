// Browser glue: renders the pure view models into the page. Nothing in
// here computes state; it is deliberately kept to createElement calls so
// the logic stays in views.ts / api.ts where the tests live.

import type { HistoryCharts, Panel } from "./views.js";
import { PROPERTY_BUTTONS } from "./views.js";

export function renderPanel(
  root: HTMLElement,
  panel: Panel,
  enabled: boolean,
  onDecide: (property: string) => void,
): void {
  root.innerHTML = "";
  if (panel.kind === "idle") {
    const p = document.createElement("p");
    p.className = "idle";
    p.textContent = panel.status === "stopped"
      ? "session stopped"
      : "parsing…";
    root.appendChild(p);
    return;
  }
  const head = document.createElement("div");
  head.className = "rule";
  const ruleEl = document.createElement("code");
  ruleEl.textContent = panel.rule;
  const freqEl = document.createElement("span");
  freqEl.className = "freq";
  freqEl.textContent = ` ×${panel.frequency} (iteration ${panel.iteration})`;
  head.append(ruleEl, freqEl);
  root.appendChild(head);

  const buttons = document.createElement("div");
  buttons.className = "buttons";
  for (const property of PROPERTY_BUTTONS) {
    const btn = document.createElement("button");
    btn.textContent = property;
    btn.dataset.property = property;
    btn.disabled = !enabled;
    btn.addEventListener("click", () => onDecide(property));
    buttons.appendChild(btn);
  }
  root.appendChild(buttons);

  const list = document.createElement("ol");
  list.className = "samples";
  for (const sample of panel.samples) {
    const item = document.createElement("li");
    const line = document.createElement("div");
    const mark = document.createElement("mark");
    mark.textContent = sample.highlight;
    line.append(
      document.createTextNode(sample.before + " "),
      mark,
      document.createTextNode(" " + sample.after),
    );
    item.appendChild(line);
    const table = document.createElement("table");
    table.className = "layers";
    for (const layer of sample.layers) {
      const tr = document.createElement("tr");
      const th = document.createElement("th");
      th.textContent = layer.name;
      tr.appendChild(th);
      for (const cell of layer.cells) {
        const td = document.createElement("td");
        td.textContent = cell;
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }
    item.appendChild(table);
    list.appendChild(item);
  }
  root.appendChild(list);
  if (panel.truncated) {
    const note = document.createElement("p");
    note.textContent = "showing the first 10 samples";
    root.appendChild(note);
  }
}

export function renderCharts(root: HTMLElement, charts: HistoryCharts): void {
  root.innerHTML = "";
  if (!charts.iterations.length) {
    const p = document.createElement("p");
    p.className = "idle";
    p.textContent = "no recorded iterations yet";
    root.appendChild(p);
    return;
  }
  for (const series of charts.series) {
    const block = document.createElement("figure");
    const caption = document.createElement("figcaption");
    const last = series.points[series.points.length - 1];
    caption.textContent = `${series.label} — ${last.value.toFixed(3)}`;
    const canvas = document.createElement("canvas");
    canvas.width = 420;
    canvas.height = 80;
    drawSeries(canvas, series.points.map((p) => p.value));
    block.append(caption, canvas);
    root.appendChild(block);
  }
}

function drawSeries(canvas: HTMLCanvasElement, values: number[]): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, lo + 1e-9);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#2b6cb0";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  values.forEach((value, idx) => {
    const x = 4 + (idx / Math.max(1, values.length - 1)) * (canvas.width - 8);
    const y = canvas.height - 6
      - ((value - lo) / (hi - lo)) * (canvas.height - 12);
    if (idx === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

export function renderStatus(el: HTMLElement, text: string): void {
  el.textContent = text;
}
