import { describe, expect, it } from "vitest";

import { acceptedTally, applyFilter, defaultTargetMix, renderQueue } from "../src/queue";
import type { ScenarioListRow } from "../src/types";

function row(id: string, task_type: string, status: string, note = ""): ScenarioListRow {
  return {
    id, task_type, status, note,
    instruction: `do ${id}`, version: 1, has_layout: true, horizon: 1,
  };
}

const rows = [
  row("s1", "spatial", "draft"),
  row("s2", "spatial", "accepted"),
  row("s3", "long_horizon", "accepted"),
  row("s4", "long_horizon", "accepted"),
  row("s5", "appearance", "rejected", "blurry goal"),
];

describe("queue filtering and tally", () => {
  it("filters by task type and status", () => {
    expect(applyFilter(rows, { task_type: "spatial", status: "" }).map((r) => r.id))
      .toEqual(["s1", "s2"]);
    expect(applyFilter(rows, { task_type: "", status: "accepted" }).map((r) => r.id))
      .toEqual(["s2", "s3", "s4"]);
    expect(applyFilter(rows, { task_type: "long_horizon", status: "accepted" }))
      .toHaveLength(2);
  });

  it("tallies accepted counts against the target mix", () => {
    const tally = acceptedTally(rows, defaultTargetMix(50));
    expect(tally.spatial).toBe("1/50");
    expect(tally.long_horizon).toBe("2/50");
    expect(tally.appearance).toBe("0/50");
  });

  it("renders rows with notes and opens on click", () => {
    const container = document.createElement("div");
    let opened = "";
    renderQueue(container, rows, { task_type: "appearance", status: "" },
      defaultTargetMix(10), (id) => { opened = id; });
    const items = container.querySelectorAll("li.queue-row");
    expect(items).toHaveLength(1);
    expect(items[0].textContent).toContain("blurry goal");
    (items[0].querySelector("button.open-scenario") as HTMLButtonElement).click();
    expect(opened).toBe("s5");
    const chip = container.querySelector('[data-task-type="long_horizon"]');
    expect(chip?.textContent).toBe("long_horizon: 2/10");
  });
});
