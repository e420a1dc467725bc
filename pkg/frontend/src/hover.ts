/** Two-way hover linking between grid candidates and the step's MUS
 * constraints, driven purely by the scope sets in the trace JSON. */

import { Step } from "./types.js";

export interface Literal {
  cell: string;
  value: number;
}

export type HoverTarget =
  | { kind: "literal"; literal: Literal }
  | { kind: "constraint"; index: number };

export interface Highlight {
  constraints: number[];   // indexes into step.mus
  literals: Literal[];
}

const key = (l: Literal) => `${l.cell}=${l.value}`;

/** Everything to glow when hovering `target` on a rendered step:
 * a literal lights every constraint whose scope contains it, a
 * constraint lights every literal of its scope. */
export function hoverLink(step: Step, target: HoverTarget): Highlight {
  if (target.kind === "constraint") {
    const m = step.mus[target.index];
    if (!m) return { constraints: [], literals: [] };
    return {
      constraints: [target.index],
      literals: m.scope.map(([cell, value]) => ({ cell, value })),
    };
  }
  const k = key(target.literal);
  const constraints: number[] = [];
  for (let i = 0; i < step.mus.length; i++) {
    if (step.mus[i].scope.some(([c, v]) => `${c}=${v}` === k)) {
      constraints.push(i);
    }
  }
  return {
    constraints,
    literals: constraints.length ? [target.literal] : [],
  };
}
