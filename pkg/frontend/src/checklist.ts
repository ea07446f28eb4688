// Relation badges and the live goal checklist. Both render exclusively from
// the last server response carried by the view model; the client never
// computes a relation locally.

import type { ScenarioViewModel } from "./state";
import type { GoalAtomWire } from "./types";

function atomLabel(atom: GoalAtomWire): string {
  const parts: string[] = [];
  if (atom.obj1_state && atom.obj1_state !== "none") {
    parts.push(`${atom.obj1_uid} is ${atom.obj1_state}`);
  }
  if (atom.position && atom.position !== "none") {
    const anchors = Array.isArray(atom.obj2_uid) ? atom.obj2_uid.join(" and ") : atom.obj2_uid;
    parts.push(`${atom.obj1_uid} ${atom.position} ${anchors}`);
  }
  return parts.join(" and ");
}

export function renderChecklist(container: HTMLElement, vm: ScenarioViewModel): void {
  container.innerHTML = "";
  const detail = vm.detail;
  if (!detail) return;
  detail.scenario.goal_conditions.forEach((disjunct, d) => {
    const section = document.createElement("section");
    section.className = "disjunct";
    const status = detail.goal_status[d] ?? disjunct.map(() => false);
    const satisfied = status.filter(Boolean).length;
    const heading = document.createElement("h4");
    heading.textContent = `Goal option ${d + 1} - ${satisfied}/${disjunct.length} satisfied`;
    section.appendChild(heading);
    const list = document.createElement("ul");
    list.className = "goal-checklist";
    disjunct.forEach((atom, i) => {
      const item = document.createElement("li");
      const checked = Boolean(status[i]);
      item.className = checked ? "atom checked" : "atom unchecked";
      item.dataset.checked = String(checked);
      item.textContent = `${checked ? "✓" : "○"} ${atomLabel(atom)}`;
      list.appendChild(item);
    });
    section.appendChild(list);
    container.appendChild(section);
  });
}

export function renderRelationBadges(container: HTMLElement, vm: ScenarioViewModel): void {
  container.innerHTML = "";
  const detail = vm.detail;
  if (!detail) return;
  const heading = document.createElement("h4");
  const focus = vm.selectedUid;
  heading.textContent = focus ? `Relations of ${focus}` : "Relations (server-inferred)";
  container.appendChild(heading);
  const relations = focus ? vm.relationsFor(focus) : detail.relations;
  const list = document.createElement("div");
  list.className = "badges";
  for (const [a, relation, b] of relations) {
    const badge = document.createElement("span");
    badge.className = "badge";
    badge.dataset.subject = a;
    badge.dataset.relation = relation;
    badge.dataset.anchor = b;
    badge.textContent = `${a} ${relation} ${b}`;
    list.appendChild(badge);
  }
  if (relations.length === 0) {
    const empty = document.createElement("span");
    empty.className = "badge empty";
    empty.textContent = "no relations inferred";
    list.appendChild(empty);
  }
  container.appendChild(list);
}
