/** DOM wiring: paint a GridView, hook hover linking, drive the three
 * modes.  All solving happens server-side; this file only renders. */

import { ApiClient, runJob } from "./api.js";
import { hoverLink } from "./hover.js";
import { renderStep, TraceError, cellIndex } from "./view.js";
import { GridView, JobState, Trace } from "./types.js";

interface AppState {
  trace: Trace | null;
  step: number;
}

export function paintGrid(
  view: GridView,
  grid: HTMLElement,
  panel: HTMLElement,
): void {
  grid.innerHTML = "";
  panel.innerHTML = "";
  const table = document.createElement("table");
  table.className = "grid";
  const byPos = new Map<string, string>();
  for (const name of view.cells.keys()) {
    const idx = cellIndex(name);
    byPos.set(`${idx[0]},${idx[1] ?? 1}`, name);
  }
  for (let r = 1; r <= view.rows; r++) {
    const tr = document.createElement("tr");
    for (let c = 1; c <= view.cols; c++) {
      const td = document.createElement("td");
      const name = byPos.get(`${r},${c}`);
      const cell = name ? view.cells.get(name) : undefined;
      if (cell) {
        if (cell.solved !== null) {
          td.textContent = String(cell.solved);
          td.className = cell.given ? "given" : "solved";
        } else {
          const sub = document.createElement("div");
          sub.className = "candidates";
          for (const cand of cell.candidates) {
            const span = document.createElement("span");
            span.textContent = String(cand.value);
            span.className = `cand ${cand.style}`;
            span.dataset.cell = cell.name;
            span.dataset.value = String(cand.value);
            sub.appendChild(span);
          }
          td.appendChild(sub);
        }
      } else {
        td.className = "void";
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  grid.appendChild(table);
  const list = document.createElement("ol");
  list.className = "mus";
  view.descriptions.forEach((text, i) => {
    const li = document.createElement("li");
    li.textContent = text;
    li.dataset.constraint = String(i);
    list.appendChild(li);
  });
  panel.appendChild(list);
}

function wireHover(state: AppState, root: HTMLElement): void {
  root.addEventListener("mouseover", (ev) => {
    const el = ev.target as HTMLElement;
    if (!state.trace || state.step >= state.trace.steps.length) return;
    const step = state.trace.steps[state.step];
    let highlight;
    if (el.dataset.cell && el.dataset.value) {
      highlight = hoverLink(step, {
        kind: "literal",
        literal: { cell: el.dataset.cell, value: Number(el.dataset.value) },
      });
    } else if (el.dataset.constraint) {
      highlight = hoverLink(step, {
        kind: "constraint",
        index: Number(el.dataset.constraint),
      });
    } else {
      return;
    }
    root.querySelectorAll(".hover").forEach((n) =>
      n.classList.remove("hover"),
    );
    for (const i of highlight.constraints) {
      root
        .querySelector(`[data-constraint="${i}"]`)
        ?.classList.add("hover");
    }
    for (const lit of highlight.literals) {
      root
        .querySelector(
          `[data-cell="${lit.cell}"][data-value="${lit.value}"]`,
        )
        ?.classList.add("hover");
    }
  });
}

export function mountApp(root: HTMLElement, client: ApiClient): void {
  root.innerHTML = `
    <header>
      <select id="puzzle"></select>
      <select id="mode">
        <option value="auto">auto</option>
        <option value="manual">manual</option>
      </select>
      <button id="solve">solve</button>
      <button id="prev">&#8592;</button>
      <button id="next">&#8594;</button>
      <span id="status"></span>
    </header>
    <main>
      <div id="grid"></div>
      <div id="panel"></div>
      <div id="choices"></div>
    </main>
    <div id="error" class="banner" hidden></div>`;
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  const state: AppState = { trace: null, step: 0 };

  const show = () => {
    if (!state.trace) return;
    try {
      paintGrid(renderStep(state.trace, state.step), el("grid"), el("panel"));
      el("status").textContent =
        `step ${state.step}/${state.trace.steps.length}`;
    } catch (e) {
      if (e instanceof TraceError) {
        el("error").hidden = false;
        el("error").textContent = e.message;
        el("grid").innerHTML = "";
        el("panel").innerHTML = "";
      } else {
        throw e;
      }
    }
  };

  client.catalog().then((cat) => {
    const sel = el("puzzle") as HTMLSelectElement;
    for (const p of cat.puzzles) {
      for (const inst of p.instances) {
        const opt = document.createElement("option");
        opt.value = `${p.id}:${inst.id}`;
        opt.textContent = `${p.title} (${inst.id})`;
        sel.appendChild(opt);
      }
    }
  });

  el("solve").addEventListener("click", async () => {
    const [puzzle, instance] = (el("puzzle") as HTMLSelectElement).value
      .split(":");
    const mode = (el("mode") as HTMLSelectElement).value as "auto" | "manual";
    const id = await client.createJob({ puzzle, instance, mode, seed: 0 });
    const trace = await runJob(client, id, {
      onState: (s: JobState) => {
        el("status").textContent = `${s.status} (${s.step_index} steps)`;
      },
      onChoice: (s: JobState) =>
        new Promise<number>((resolve) => {
          const box = el("choices");
          box.innerHTML = "";
          s.choices!.forEach((opt, i) => {
            const card = document.createElement("button");
            card.className = "choice";
            card.textContent = opt.mus.join("; ");
            card.addEventListener("click", () => {
              box.innerHTML = "";
              resolve(i);
            });
            box.appendChild(card);
          });
        }),
    });
    state.trace = trace;
    state.step = 0;
    show();
  });

  el("prev").addEventListener("click", () => {
    if (state.trace && state.step > 0) {
      state.step--;
      show();
    }
  });
  el("next").addEventListener("click", () => {
    if (state.trace && state.step < state.trace.steps.length) {
      state.step++;
      show();
    }
  });
  wireHover(state, root);
}
