import { describe, expect, it } from "vitest";

import type { AnnotationItem } from "../src/api.js";
import {
  assignLabel,
  canSubmit,
  labelsPayload,
  moveCursor,
  newLabelingState,
  progress,
  validateConfig,
} from "../src/state.js";

function items(n: number): AnnotationItem[] {
  return Array.from({ length: n }, (_, i) => ({
    doc_id: `d${i}`,
    text: `text ${i}`,
    lang: "und",
    round: 0,
    position_in_batch: i,
  }));
}

describe("labeling state", () => {
  it("starts unlabeled with the cursor on the first item", () => {
    const s = newLabelingState(items(3));
    expect(progress(s)).toEqual({ labeled: 0, total: 3 });
    expect(s.cursor).toBe(0);
    expect(canSubmit(s)).toBe(false);
  });

  it("assigns a label and auto-advances to the next unlabeled item", () => {
    let s = newLabelingState(items(3));
    s = assignLabel(s, 1);
    expect(s.labels.get("d0")).toBe(1);
    expect(s.cursor).toBe(1);
    s = assignLabel(s, 0);
    expect(s.cursor).toBe(2);
  });

  it("relabeling an item keeps the batch submittable state consistent", () => {
    let s = newLabelingState(items(2));
    s = assignLabel(s, 1); // labels d0, advances to d1
    s = assignLabel(s, 1); // labels d1, cursor stays (nothing unlabeled)
    expect(canSubmit(s)).toBe(true);
    s = moveCursor(s, -1); // back to d0
    s = assignLabel(s, 0);
    expect(s.labels.get("d0")).toBe(0);
    expect(s.labels.get("d1")).toBe(1);
    expect(canSubmit(s)).toBe(true);
  });

  it("cursor movement clamps at the ends", () => {
    let s = newLabelingState(items(2));
    s = moveCursor(s, -5);
    expect(s.cursor).toBe(0);
    s = moveCursor(s, 5);
    expect(s.cursor).toBe(1);
  });

  it("submit is blocked until every item is labeled", () => {
    let s = newLabelingState(items(3));
    s = assignLabel(s, 0);
    s = assignLabel(s, 1);
    expect(canSubmit(s)).toBe(false);
    expect(() => labelsPayload(s)).toThrow(/not fully labeled/);
    s = assignLabel(s, 1);
    expect(canSubmit(s)).toBe(true);
    expect(labelsPayload(s)).toEqual({ d0: 0, d1: 1, d2: 1 });
  });

  it("empty batches can never submit", () => {
    const s = newLabelingState([]);
    expect(canSubmit(s)).toBe(false);
  });
});

describe("config validation", () => {
  const good = { rounds: 10, batch_size: 20, seed_batch_size: 20, strategy: "gcs", seed: 0 };

  it("accepts the protocol defaults", () => {
    expect(validateConfig(good)).toEqual([]);
  });

  it("mirrors the service bounds", () => {
    expect(validateConfig({ ...good, rounds: 0 })).toContainEqual(
      expect.stringContaining("rounds"),
    );
    expect(validateConfig({ ...good, batch_size: 0 })).toContainEqual(
      expect.stringContaining("batch size"),
    );
    expect(validateConfig({ ...good, seed_batch_size: -1 })).toContainEqual(
      expect.stringContaining("seed batch"),
    );
    expect(validateConfig({ ...good, strategy: "psychic" })).toContainEqual(
      expect.stringContaining("strategy"),
    );
    expect(validateConfig({ ...good, rounds: 2.5 })).not.toEqual([]);
  });
});
