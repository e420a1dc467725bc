/** Pure view-model construction from a Trace: candidate sets replayed
 * from the step list, and per-candidate styles for one step. */

import {
  CandidateStyle,
  CellView,
  GridView,
  Step,
  Trace,
} from "./types.js";

export class TraceError extends Error {}

const CELL_RE = /^([A-Za-z_][A-Za-z0-9_]*)\[(-?\d+(?:,-?\d+)*)\]$/;

export function cellIndex(name: string): number[] {
  const m = CELL_RE.exec(name);
  if (!m) throw new TraceError(`malformed cell name: ${name}`);
  return m[2].split(",").map(Number);
}

function checkTrace(trace: Trace): void {
  if (!trace || !Array.isArray(trace.steps) ||
      typeof trace.finalGrid !== "object" || trace.finalGrid === null) {
    throw new TraceError("malformed trace");
  }
  for (const step of trace.steps) {
    if (!Array.isArray(step.mus) || !Array.isArray(step.deductions)) {
      throw new TraceError("malformed step");
    }
    for (const d of step.deductions) {
      if (d.mus_index < 0 || d.mus_index >= step.mus.length) {
        throw new TraceError(`deduction cites missing MUS ${d.mus_index}`);
      }
      cellIndex(d.var);
    }
  }
}

/** Cells and the value universe mentioned anywhere in the trace. */
export function traceGeometry(trace: Trace): {
  cells: string[]; rows: number; cols: number; values: number[];
} {
  const cells = new Set<string>(Object.keys(trace.finalGrid));
  const values = new Set<number>(Object.values(trace.finalGrid));
  for (const step of trace.steps) {
    for (const d of step.deductions) {
      cells.add(d.var);
      values.add(d.value);
    }
    for (const m of step.mus) {
      for (const [cell, v] of m.scope) {
        cells.add(cell);
        values.add(v);
      }
    }
  }
  let rows = 0;
  let cols = 0;
  for (const c of cells) {
    const idx = cellIndex(c);
    rows = Math.max(rows, idx[0]);
    cols = Math.max(cols, idx.length > 1 ? idx[1] : 1);
  }
  const sorted = [...cells].sort((a, b) => {
    const ia = cellIndex(a);
    const ib = cellIndex(b);
    for (let i = 0; i < Math.max(ia.length, ib.length); i++) {
      const d = (ia[i] ?? 0) - (ib[i] ?? 0);
      if (d !== 0) return d;
    }
    return a < b ? -1 : a > b ? 1 : 0;
  });
  return {
    cells: sorted,
    rows,
    cols,
    values: [...values].sort((a, b) => a - b),
  };
}

interface ReplayCell {
  candidates: Set<number>;
  solved: number | null;
  given: boolean;
}

/** Candidate state immediately before `index` steps have been applied.
 *
 * The trace does not record the givens' level-0 propagation, so cells
 * that receive no deduction anywhere in the trace are treated as given
 * (scope mentions don't count: givens appear in MUS scopes too) and
 * all other unsolved cells start with the full value universe. */
function replayTo(trace: Trace, index: number): Map<string, ReplayCell> {
  const geo = traceGeometry(trace);
  const touched = new Set<string>();
  for (const step of trace.steps) {
    for (const d of step.deductions) touched.add(d.var);
  }
  const state = new Map<string, ReplayCell>();
  for (const cell of geo.cells) {
    const given = !touched.has(cell) && cell in trace.finalGrid;
    state.set(cell, {
      candidates: given
        ? new Set([trace.finalGrid[cell]])
        : new Set(geo.values),
      solved: given ? trace.finalGrid[cell] : null,
      given,
    });
  }
  for (let s = 0; s < index; s++) {
    for (const d of trace.steps[s].deductions) {
      const cell = state.get(d.var)!;
      if (d.kind === "eliminate") {
        cell.candidates.delete(d.value);
      } else {
        cell.candidates = new Set([d.value]);
      }
      if (cell.candidates.size === 1) {
        cell.solved = [...cell.candidates][0];
      }
    }
  }
  return state;
}

/** The rendered grid for the state before step `index`, with candidate
 * styles describing that step's deductions and MUS scopes.  An `index`
 * equal to `trace.steps.length` renders the final grid with no step
 * annotations; an empty trace renders the givens only. */
export function renderStep(trace: Trace, index: number): GridView {
  checkTrace(trace);
  if (index < 0 || index > trace.steps.length) {
    throw new TraceError(`step ${index} out of range`);
  }
  const geo = traceGeometry(trace);
  const state = replayTo(trace, index);
  const step: Step | null =
    index < trace.steps.length ? trace.steps[index] : null;

  const deduced = new Map<string, CandidateStyle>();
  const involved = new Set<string>();
  if (step) {
    for (const d of step.deductions) {
      deduced.set(
        `${d.var}=${d.value}`,
        d.kind === "eliminate" ? "deduced-false" : "deduced-true",
      );
    }
    for (const m of step.mus) {
      for (const [cell, v] of m.scope) involved.add(`${cell}=${v}`);
    }
  }

  const cells = new Map<string, CellView>();
  for (const name of geo.cells) {
    const rc = state.get(name)!;
    const view: CellView = {
      name,
      solved: rc.solved,
      given: rc.given,
      candidates: [],
    };
    if (rc.solved === null) {
      for (const v of geo.values) {
        if (!rc.candidates.has(v)) continue;
        const key = `${name}=${v}`;
        const style: CandidateStyle =
          deduced.get(key) ?? (involved.has(key) ? "involved" : "plain");
        view.candidates.push({ value: v, style });
      }
    }
    cells.set(name, view);
  }
  return {
    rows: geo.rows,
    cols: geo.cols,
    values: geo.values,
    cells,
    descriptions: step ? step.mus.map((m) => m.description) : [],
  };
}
