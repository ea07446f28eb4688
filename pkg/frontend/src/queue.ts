// Curation queue: filterable scenario list with a running tally of accepted
// scenarios per task type against a configurable target mix.

import type { ScenarioListRow } from "./types";

export interface QueueFilter {
  task_type: string; // "" means all
  status: string; // "" means all
}

export const TASK_TYPES = ["spatial", "appearance", "common_sense", "long_horizon"];

export type TargetMix = Record<string, number>;

export function defaultTargetMix(perType = 50): TargetMix {
  return Object.fromEntries(TASK_TYPES.map((t) => [t, perType]));
}

export function applyFilter(rows: ScenarioListRow[], filter: QueueFilter): ScenarioListRow[] {
  return rows.filter(
    (row) =>
      (!filter.task_type || row.task_type === filter.task_type) &&
      (!filter.status || row.status === filter.status),
  );
}

export function acceptedTally(rows: ScenarioListRow[], mix: TargetMix): Record<string, string> {
  const counts: Record<string, number> = Object.fromEntries(TASK_TYPES.map((t) => [t, 0]));
  for (const row of rows) {
    if (row.status === "accepted" && row.task_type in counts) counts[row.task_type] += 1;
  }
  return Object.fromEntries(
    TASK_TYPES.map((t) => [t, `${counts[t]}/${mix[t] ?? 0}`]),
  );
}

export function renderQueue(
  container: HTMLElement,
  rows: ScenarioListRow[],
  filter: QueueFilter,
  mix: TargetMix,
  onOpen: (id: string) => void,
): void {
  container.innerHTML = "";

  const tally = document.createElement("div");
  tally.className = "tally";
  const tallies = acceptedTally(rows, mix);
  for (const taskType of TASK_TYPES) {
    const chip = document.createElement("span");
    chip.className = "tally-chip";
    chip.dataset.taskType = taskType;
    chip.textContent = `${taskType}: ${tallies[taskType]}`;
    tally.appendChild(chip);
  }
  container.appendChild(tally);

  const list = document.createElement("ul");
  list.className = "queue";
  for (const row of applyFilter(rows, filter)) {
    const item = document.createElement("li");
    item.className = `queue-row status-${row.status}`;
    item.dataset.id = row.id;

    const open = document.createElement("button");
    open.className = "open-scenario";
    open.textContent = row.id;
    open.addEventListener("click", () => onOpen(row.id));
    item.appendChild(open);

    const meta = document.createElement("span");
    meta.className = "queue-meta";
    meta.textContent = ` ${row.task_type} - ${row.status}`
      + (row.note ? ` - note: ${row.note}` : "");
    item.appendChild(meta);

    const instruction = document.createElement("div");
    instruction.className = "queue-instruction";
    instruction.textContent = row.instruction;
    item.appendChild(instruction);

    list.appendChild(item);
  }
  container.appendChild(list);
}
