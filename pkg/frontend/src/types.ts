/** Wire types: exactly the Trace JSON and job payloads served by the
 * solver's HTTP API.  The visualiser holds no solving logic; everything
 * it shows is a pure function of these payloads. */

export type DeductionKind = "eliminate" | "assign";

export interface Deduction {
  kind: DeductionKind;
  var: string;          // e.g. "grid[4,7]"
  value: number;
  mus_index: number;
}

export interface MusEntry {
  id: number;
  description: string;
  scope: [string, number][];   // (cell name, value) literals
}

export interface Step {
  kind: "unit-batch" | "standard";
  mus: MusEntry[];
  deductions: Deduction[];
}

export interface Trace {
  puzzle: string;
  seed: number;
  mode: string;
  steps: Step[];
  finalGrid: Record<string, number>;
}

export type JobStatus = "queued" | "running" | "partial" | "done" | "failed";

export interface ChoiceOption {
  deductions: { kind: DeductionKind; var: string; value: number }[];
  mus: string[];
}

export interface JobState {
  id: string;
  status: JobStatus;
  step_index: number;
  steps: Step[];
  awaiting_choice: boolean;
  choices?: ChoiceOption[];
  result?: Trace;
  error?: string;
}

export interface CatalogInstance {
  id: string;
  note: string;
}

export interface CatalogPuzzle {
  id: string;
  title: string;
  instances: CatalogInstance[];
}

export interface Catalog {
  puzzles: CatalogPuzzle[];
}

/** Candidate styles, per §"render_step": how one candidate value of an
 * unsolved cell is drawn at the current step. */
export type CandidateStyle =
  | "plain"
  | "deduced-true"
  | "deduced-false"
  | "involved";

export interface CandidateView {
  value: number;
  style: CandidateStyle;
}

export interface CellView {
  name: string;
  solved: number | null;      // bold single value when solved
  given: boolean;             // solved before any step
  candidates: CandidateView[];
}

export interface GridView {
  rows: number;
  cols: number;
  values: number[];
  cells: Map<string, CellView>;
  descriptions: string[];     // the step's MUS constraint texts, in order
}
