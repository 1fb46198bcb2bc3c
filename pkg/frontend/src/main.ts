/** Bootstrap: wire the store, canvas, legend, and toolbar to the API. */

import { ApiClient, ApiRequestError } from "./api.js";
import { nearestPoint, pointsInRect, toData, type Transform } from "./geometry.js";
import { computeTransform, drawScatter, hoverHtml, legendHtml } from "./render.js";
import { ViewStore } from "./store.js";
import type { Rect } from "./types.js";

const api = new ApiClient("");
const params = new URLSearchParams(window.location.search);
const annotator = params.get("annotator") ?? "annotator";

const canvas = document.getElementById("scatter") as HTMLCanvasElement;
const legend = document.getElementById("legend") as HTMLUListElement;
const tooltip = document.getElementById("tooltip") as HTMLDivElement;
const status = document.getElementById("status") as HTMLDivElement;
const projectSelect = document.getElementById("project") as HTMLSelectElement;
const lemmaSelect = document.getElementById("lemma") as HTMLSelectElement;

let store = new ViewStore("", annotator);
let transform: Transform;
let hoverIndex = -1;
let dragStart: [number, number] | null = null;
let dragRect: Rect | null = null;

function redraw(): void {
  transform = computeTransform(store, canvas);
  drawScatter(store, canvas, transform, { hoverIndex, dragRect });
  legend.innerHTML = legendHtml(store);
  const assignButton = document.getElementById("assign") as HTMLButtonElement;
  assignButton.disabled = !store.canAssign;
  (document.getElementById("undo") as HTMLButtonElement).disabled = store.undoDepth === 0;
}

function say(message: string, isError = false): void {
  status.textContent = message;
  status.className = isError ? "error" : "";
}

async function refreshView(): Promise<void> {
  try {
    const view = await api.getView(store.project, lemmaSelect.value);
    store.applyView(view);
    say(`${view.ids.length} sentences, revision ${view.revision}`);
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 409) {
      say("no projection yet — computing one...");
      await api.recompute(store.project, lemmaSelect.value, { seed: 42 });
      const view = await api.getView(store.project, lemmaSelect.value);
      store.applyView(view);
      say(`${view.ids.length} sentences, revision ${view.revision}`);
    } else {
      say(err instanceof Error ? err.message : String(err), true);
      return;
    }
  }
  redraw();
}

async function loadProjects(): Promise<void> {
  const { projects } = await api.listProjects();
  projectSelect.innerHTML = projects
    .map((p) => `<option value="${p.id}">${p.id} (${p.lang})</option>`)
    .join("");
  if (projects.length > 0) {
    projectSelect.value = params.get("project") ?? projects[0].id;
    await loadLemmas();
  }
}

async function loadLemmas(): Promise<void> {
  store = new ViewStore(projectSelect.value, annotator);
  const { lemmas } = await api.listLemmas(projectSelect.value);
  lemmaSelect.innerHTML = lemmas
    .map((l) => `<option value="${l.lemma}">${l.lemma} (${l.n_sentences})</option>`)
    .join("");
  const wanted = params.get("lemma");
  if (wanted && lemmas.some((l) => l.lemma === wanted)) lemmaSelect.value = wanted;
  if (lemmas.length > 0) await refreshView();
}

canvas.addEventListener("mousedown", (ev) => {
  const [x, y] = toData(transform, ev.offsetX, ev.offsetY);
  dragStart = [x, y];
  dragRect = null;
});

canvas.addEventListener("mousemove", (ev) => {
  const [x, y] = toData(transform, ev.offsetX, ev.offsetY);
  if (dragStart) {
    dragRect = { x0: dragStart[0], y0: dragStart[1], x1: x, y1: y };
    redraw();
    return;
  }
  const radius = 10 / transform.scale;
  const found = nearestPoint(store.points, x, y, radius);
  if (found !== hoverIndex) {
    hoverIndex = found;
    if (found >= 0) {
      tooltip.innerHTML = hoverHtml(store, found);
      tooltip.style.left = `${ev.offsetX + 14}px`;
      tooltip.style.top = `${ev.offsetY + 14}px`;
      tooltip.style.display = "block";
    } else {
      tooltip.style.display = "none";
    }
    redraw();
  }
});

canvas.addEventListener("mouseup", (ev) => {
  if (!dragStart) return;
  const [x, y] = toData(transform, ev.offsetX, ev.offsetY);
  const moved = Math.hypot(x - dragStart[0], y - dragStart[1]) * transform.scale > 4;
  if (moved && dragRect) {
    store.select(pointsInRect(store.points, dragRect), ev.shiftKey);
  } else {
    const found = nearestPoint(store.points, x, y, 10 / transform.scale);
    if (found >= 0) {
      if (ev.shiftKey) store.togglePoint(found);
      else store.select([found]);
    } else if (!ev.shiftKey) {
      store.select([]);
    }
  }
  dragStart = null;
  dragRect = null;
  redraw();
});

legend.addEventListener("click", (ev) => {
  const item = (ev.target as HTMLElement).closest(".legend-item") as HTMLElement | null;
  if (!item) return;
  store.currentSense = item.dataset.sense ?? null;
  redraw();
});

(document.getElementById("assign") as HTMLButtonElement).addEventListener("click", async () => {
  const outcome = await store.assignSelection(api);
  if (outcome.failed.length > 0) {
    say(`${outcome.failed.length} assignment(s) rejected: ${outcome.failed[0].reason}`, true);
  } else {
    say(`${outcome.applied.length} sentence(s) assigned to ${store.currentSense}`);
  }
  redraw();
});

(document.getElementById("undo") as HTMLButtonElement).addEventListener("click", async () => {
  await store.undo(api);
  say("reverted last assignment");
  redraw();
});

(document.getElementById("new-sense") as HTMLButtonElement).addEventListener("click", async () => {
  const senseId = window.prompt("New sense id:");
  if (!senseId) return;
  const gloss = window.prompt("Gloss:") ?? "";
  try {
    await api.addSense(store.project, store.lemma, senseId, gloss);
    await refreshView();
  } catch (err) {
    say(err instanceof Error ? err.message : String(err), true);
  }
});

(document.getElementById("refresh") as HTMLButtonElement).addEventListener("click", refreshView);
(document.getElementById("recompute") as HTMLButtonElement).addEventListener("click", async () => {
  say("recomputing clusters and projection...");
  await api.recompute(store.project, lemmaSelect.value, { seed: 42 });
  await refreshView();
});

projectSelect.addEventListener("change", loadLemmas);
lemmaSelect.addEventListener("change", refreshView);

loadProjects().catch((err) => say(err instanceof Error ? err.message : String(err), true));
