/**
 * Local view state: mirrors the latest /view response, tracks the selection,
 * applies annotations optimistically (rolling back per point on server
 * rejection), and keeps an undo stack of at most 100 local actions.
 */

import type { PointState, SenseDef, ViewResponse } from "./types.js";

/** The slice of the HTTP client the store needs; lets tests substitute fakes. */
export interface AnnotationApi {
  assign(
    project: string,
    sentenceId: string,
    lemma: string,
    senseId: string,
    annotator: string,
  ): Promise<{ revision: number }>;
  unassign(
    project: string,
    sentenceId: string,
    lemma: string,
    annotator: string,
  ): Promise<{ status: string; revision: number }>;
}

const UNDO_DEPTH = 100;

interface UndoEntry {
  /** previous sense per affected point index, to restore on undo */
  previous: Map<number, string | null>;
  senseId: string;
}

export interface AssignOutcome {
  applied: number[];
  failed: { index: number; reason: string }[];
}

export class ViewStore {
  project: string;
  lemma = "";
  annotator: string;
  points: PointState[] = [];
  inventory: SenseDef[] = [];
  revision = 0;
  selection = new Set<number>();
  currentSense: string | null = null;
  private undoStack: UndoEntry[] = [];

  constructor(project: string, annotator: string) {
    this.project = project;
    this.annotator = annotator;
  }

  applyView(view: ViewResponse): void {
    this.lemma = view.lemma;
    this.inventory = view.sense_inventory;
    this.revision = view.revision;
    this.points = view.ids.map((id, i) => ({
      id,
      x: view.points[i][0],
      y: view.points[i][1],
      cluster: view.clusters ? view.clusters[i] : 0,
      sense: view.senses[i],
      sentence: view.sentences[i],
    }));
    this.selection.clear();
  }

  /** Per-sense counts over the local state; drives the live legend. */
  legendCounts(): Record<string, number> {
    const counts: Record<string, number> = {};
    for (const sense of this.inventory) counts[sense.sense_id] = 0;
    for (const point of this.points) {
      if (point.sense !== null) counts[point.sense] = (counts[point.sense] ?? 0) + 1;
    }
    return counts;
  }

  select(indices: number[], additive = false): void {
    if (!additive) this.selection.clear();
    for (const i of indices) {
      if (i >= 0 && i < this.points.length) this.selection.add(i);
    }
  }

  togglePoint(index: number): void {
    if (this.selection.has(index)) this.selection.delete(index);
    else this.selection.add(index);
  }

  get canAssign(): boolean {
    return this.currentSense !== null && this.selection.size > 0;
  }

  /**
   * POST one annotation per selected point. Local state updates first;
   * rejected points roll back individually with the server's reason.
   */
  async assignSelection(api: AnnotationApi): Promise<AssignOutcome> {
    if (!this.canAssign) return { applied: [], failed: [] };
    const senseId = this.currentSense as string;
    const targets = [...this.selection].sort((a, b) => a - b);

    const previous = new Map<number, string | null>();
    for (const i of targets) {
      previous.set(i, this.points[i].sense);
      this.points[i].sense = senseId; // optimistic recolor
    }

    const outcome: AssignOutcome = { applied: [], failed: [] };
    for (const i of targets) {
      try {
        const result = await api.assign(this.project, this.points[i].id, this.lemma, senseId, this.annotator);
        this.revision = Math.max(this.revision, result.revision);
        outcome.applied.push(i);
      } catch (err) {
        this.points[i].sense = previous.get(i) ?? null; // rollback this point
        previous.delete(i);
        outcome.failed.push({ index: i, reason: err instanceof Error ? err.message : String(err) });
      }
    }
    if (previous.size > 0) {
      this.undoStack.push({ previous, senseId });
      if (this.undoStack.length > UNDO_DEPTH) this.undoStack.shift();
    }
    return outcome;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  /**
   * Revert the latest assignment: points that were unlabeled before get a
   * DELETE, points that carried another sense get re-assigned to it.
   */
  async undo(api: AnnotationApi): Promise<boolean> {
    const entry = this.undoStack.pop();
    if (!entry) return false;
    for (const [index, previousSense] of entry.previous) {
      const point = this.points[index];
      if (previousSense === null) {
        const result = await api.unassign(this.project, point.id, this.lemma, this.annotator);
        this.revision = Math.max(this.revision, result.revision);
        point.sense = null;
      } else {
        const result = await api.assign(this.project, point.id, this.lemma, previousSense, this.annotator);
        this.revision = Math.max(this.revision, result.revision);
        point.sense = previousSense;
      }
    }
    return true;
  }

  localSenses(): (string | null)[] {
    return this.points.map((p) => p.sense);
  }
}
