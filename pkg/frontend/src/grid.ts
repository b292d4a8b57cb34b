// Grid view-model: pure functions turning API responses into renderable
// cells. Highlights are keyed by the full variable index of each diff
// entry, so the highlighted-cell count always equals the diff length.

import type { DiffEntry, ScheduleDoc } from "./api.js";

export interface GridCell {
  label: string;
  // diff entries landing on this visible cell (may be several: a moved
  // shift flips two variables in the same nurse/day cell)
  changes: DiffEntry[];
}

export interface GridView {
  rowLabels: string[];
  columns: string[];
  cells: GridCell[][];
}

/** Visible cell coordinates for a variable index: (row, column). */
export function cellOf(index: number[]): [number, number] {
  // worker-hour indices are [w, h]; nurse indices are [n, d, s] and all
  // shifts of a day share one visible cell
  return [index[0], index[1]];
}

export function buildGrid(doc: ScheduleDoc, diff: DiffEntry[]): GridView {
  const cells: GridCell[][] = doc.rows.map((row) =>
    row.map((label) => ({ label, changes: [] as DiffEntry[] })),
  );
  for (const entry of diff) {
    const [r, c] = cellOf(entry.index);
    cells[r]?.[c]?.changes.push(entry);
  }
  return { rowLabels: doc.row_labels, columns: doc.columns, cells };
}

/** Total highlighted entries across the grid (== diff length). */
export function highlightedCellCount(view: GridView): number {
  let count = 0;
  for (const row of view.cells) {
    for (const cell of row) {
      count += cell.changes.length;
    }
  }
  return count;
}

/** Cells carrying at least one change, as "row:col" keys (for styling). */
export function changedCellKeys(view: GridView): Set<string> {
  const keys = new Set<string>();
  view.cells.forEach((row, r) =>
    row.forEach((cell, c) => {
      if (cell.changes.length > 0) keys.add(`${r}:${c}`);
    }),
  );
  return keys;
}

export function describeChange(entry: DiffEntry): string {
  const idx = entry.index.join(",");
  return `[${idx}] ${entry.old} -> ${entry.new}`;
}
