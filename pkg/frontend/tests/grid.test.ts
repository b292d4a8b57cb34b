import { describe, expect, it } from "vitest";

import type { DiffEntry, ScheduleDoc } from "../src/api.js";
import {
  buildGrid,
  cellOf,
  changedCellKeys,
  describeChange,
  highlightedCellCount,
} from "../src/grid.js";

const doc: ScheduleDoc = {
  kind: "static_nurse",
  family: "X",
  row_labels: ["nurse0", "nurse1"],
  columns: ["d0", "d1", "d2"],
  rows: [
    ["s0", "", "s1"],
    ["", "s2", ""],
  ],
  objective: 4,
  feasible: true,
  status: "Optimal",
};

describe("cellOf", () => {
  it("maps nurse indices to (nurse, day)", () => {
    expect(cellOf([1, 2, 0])).toEqual([1, 2]);
  });
  it("maps worker-hour indices to (worker, hour)", () => {
    expect(cellOf([0, 5])).toEqual([0, 5]);
  });
});

describe("buildGrid", () => {
  const diff: DiffEntry[] = [
    { index: [0, 0, 0], old: 1, new: 0 },
    { index: [0, 0, 2], old: 0, new: 1 },
    { index: [1, 1, 1], old: 1, new: 0 },
  ];

  it("groups diff entries onto visible cells", () => {
    const grid = buildGrid(doc, diff);
    expect(grid.cells[0][0].changes).toHaveLength(2);
    expect(grid.cells[1][1].changes).toHaveLength(1);
    expect(grid.cells[0][2].changes).toHaveLength(0);
  });

  it("highlighted count equals diff length even when entries share a cell", () => {
    const grid = buildGrid(doc, diff);
    expect(highlightedCellCount(grid)).toBe(diff.length);
  });

  it("changed cell keys cover exactly the touched cells", () => {
    const grid = buildGrid(doc, diff);
    expect(changedCellKeys(grid)).toEqual(new Set(["0:0", "1:1"]));
  });

  it("empty diff highlights nothing", () => {
    const grid = buildGrid(doc, []);
    expect(highlightedCellCount(grid)).toBe(0);
    expect(changedCellKeys(grid).size).toBe(0);
  });
});

describe("describeChange", () => {
  it("is compact and lossless", () => {
    expect(describeChange({ index: [1, 2, 0], old: 0, new: 1 })).toBe("[1,2,0] 0 -> 1");
  });
});
