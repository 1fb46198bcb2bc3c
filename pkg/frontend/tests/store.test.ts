import { describe, expect, it } from "vitest";

import type { AnnotationApi } from "../src/store.js";
import { ViewStore } from "../src/store.js";
import type { ViewResponse } from "../src/types.js";

function makeView(n: number, senses: (string | null)[] = []): ViewResponse {
  return {
    lemma: "qeyd",
    method: "pca",
    ids: Array.from({ length: n }, (_, i) => `s${i}`),
    points: Array.from({ length: n }, (_, i) => [i, i % 3] as [number, number]),
    clusters: Array.from({ length: n }, (_, i) => i % 2),
    senses: Array.from({ length: n }, (_, i) => senses[i] ?? null),
    sentences: Array.from({ length: n }, (_, i) => ({
      text: `Sentence ${i} with qeyd inside.`,
      target_span: [13, 17] as [number, number],
      surface_form: "qeyd",
    })),
    sense_inventory: [
      { sense_id: "A", gloss: "first" },
      { sense_id: "B", gloss: "second" },
    ],
    counts: {},
    revision: 1,
  };
}

class FakeApi implements AnnotationApi {
  calls: { kind: string; sentenceId: string; senseId?: string }[] = [];
  rejectIds = new Set<string>();
  private revision = 10;

  async assign(_p: string, sentenceId: string, _l: string, senseId: string): Promise<{ revision: number }> {
    if (this.rejectIds.has(sentenceId)) throw new Error(`rejected ${sentenceId}`);
    this.calls.push({ kind: "assign", sentenceId, senseId });
    return { revision: ++this.revision };
  }

  async unassign(_p: string, sentenceId: string): Promise<{ status: string; revision: number }> {
    this.calls.push({ kind: "unassign", sentenceId });
    return { status: "removed", revision: ++this.revision };
  }
}

describe("ViewStore", () => {
  it("mirrors the view response", () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(4, ["A", null, null, "B"]));
    expect(store.points).toHaveLength(4);
    expect(store.points[0].sense).toBe("A");
    expect(store.points[1].cluster).toBe(1);
    expect(store.legendCounts()).toEqual({ A: 1, B: 1 });
  });

  it("cannot assign without a sense or selection", () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(3));
    expect(store.canAssign).toBe(false);
    store.select([0, 1]);
    expect(store.canAssign).toBe(false);
    store.currentSense = "A";
    expect(store.canAssign).toBe(true);
  });

  it("applies optimistic recolors and posts one annotation per point", async () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(5));
    store.select([1, 2, 4]);
    store.currentSense = "A";
    const api = new FakeApi();
    const outcome = await store.assignSelection(api);
    expect(outcome.applied).toEqual([1, 2, 4]);
    expect(api.calls.filter((c) => c.kind === "assign")).toHaveLength(3);
    expect(store.localSenses()).toEqual([null, "A", "A", null, "A"]);
    expect(store.legendCounts()).toEqual({ A: 3, B: 0 });
  });

  it("rolls back individual points the server rejects", async () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(3, ["B", null, null]));
    store.select([0, 1, 2]);
    store.currentSense = "A";
    const api = new FakeApi();
    api.rejectIds.add("s1");
    const outcome = await store.assignSelection(api);
    expect(outcome.applied).toEqual([0, 2]);
    expect(outcome.failed).toHaveLength(1);
    expect(outcome.failed[0].index).toBe(1);
    expect(store.localSenses()).toEqual(["A", null, "A"]);
  });

  it("undo restores previous labels: DELETE for fresh, re-assign for overwritten", async () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(3, ["B", null, null]));
    store.select([0, 1]);
    store.currentSense = "A";
    const api = new FakeApi();
    await store.assignSelection(api);
    expect(store.localSenses()).toEqual(["A", "A", null]);

    const undone = await store.undo(api);
    expect(undone).toBe(true);
    expect(store.localSenses()).toEqual(["B", null, null]);
    const undoCalls = api.calls.slice(2);
    // s1 was fresh -> DELETE; s0 carried B before -> re-assigned to B
    expect(undoCalls).toContainEqual({ kind: "unassign", sentenceId: "s1" });
    expect(undoCalls).toContainEqual({ kind: "assign", sentenceId: "s0", senseId: "B" });
  });

  it("caps the undo stack at 100 actions", async () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(1));
    store.currentSense = "A";
    const api = new FakeApi();
    for (let i = 0; i < 120; i++) {
      store.select([0]);
      store.currentSense = i % 2 === 0 ? "A" : "B";
      await store.assignSelection(api);
    }
    expect(store.undoDepth).toBe(100);
  });

  it("empty selection assign is a no-op", async () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(2));
    store.currentSense = "A";
    const api = new FakeApi();
    const outcome = await store.assignSelection(api);
    expect(outcome.applied).toHaveLength(0);
    expect(api.calls).toHaveLength(0);
    expect(store.undoDepth).toBe(0);
  });

  it("selection replaces unless additive", () => {
    const store = new ViewStore("demo", "ann");
    store.applyView(makeView(5));
    store.select([0, 1]);
    store.select([2], true);
    expect([...store.selection].sort()).toEqual([0, 1, 2]);
    store.select([3]);
    expect([...store.selection]).toEqual([3]);
    store.togglePoint(3);
    expect(store.selection.size).toBe(0);
  });
});
