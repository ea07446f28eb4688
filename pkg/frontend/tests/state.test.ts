import { describe, expect, it } from "vitest";

import { ScenarioViewModel } from "../src/state";
import type { ScenarioDetail } from "../src/types";

function detailFixture(): ScenarioDetail {
  return {
    scenario: {
      id: "s-1",
      task_type: "spatial",
      seed: 1,
      instruction: "Move a to the left of b.",
      goal_conditions: [
        [
          {
            obj1: "a", obj1_uid: "a", obj1_state: "none",
            obj2: "b", obj2_uid: "b", position: "left",
          },
        ],
      ],
      scene_graph: { description: "", edges: [], nodes: [] },
      asset_pool: [],
    },
    layout: {
      table: { extent_x: 1.2, extent_y: 0.8, surface_z: 0, margin: 0.05 },
      seed: 1,
      objects: [
        { uid: "a", center: [0, -0.12, 0.05], half_extents: [0.05, 0.05, 0.05], yaw: 0, support_uid: "table", state: "none" },
        { uid: "b", center: [0, 0, 0.05], half_extents: [0.05, 0.05, 0.05], yaw: 0, support_uid: "table", state: "none" },
      ],
    },
    relations: [["a", "right", "b"], ["b", "left", "a"]],
    goal_status: [[false]],
    status: "draft",
    note: "",
    version: 1,
    history: [],
  };
}

describe("ScenarioViewModel", () => {
  it("renders server poses until a local move overrides them", () => {
    const vm = new ScenarioViewModel();
    vm.applyServerView(detailFixture());
    expect(vm.renderPose("a")).toEqual({ x: 0, y: -0.12 });
    vm.localMove("a", 0.1, 0.2);
    expect(vm.renderPose("a")).toEqual({ x: 0.1, y: 0.2 });
    expect(vm.pendingMoves()).toEqual([{ uid: "a", x: 0.1, y: 0.2 }]);
  });

  it("never updates relations from local edits", () => {
    const vm = new ScenarioViewModel();
    vm.applyServerView(detailFixture());
    const before = vm.detail!.relations;
    vm.localMove("a", 0.4, 0.4);
    expect(vm.detail!.relations).toEqual(before);
    expect(vm.relationBetween("a", "b")).toBe("right");
  });

  it("applyServerView clears the dirty buffer and banner", () => {
    const vm = new ScenarioViewModel();
    vm.applyServerView(detailFixture());
    vm.localMove("a", 0.1, 0.1);
    vm.setBanner("error", "nope");
    const next = detailFixture();
    next.version = 2;
    next.relations = [["a", "left", "b"], ["b", "right", "a"]];
    vm.applyServerView(next);
    expect(vm.pendingMoves()).toEqual([]);
    expect(vm.banner).toBeNull();
    expect(vm.version).toBe(2);
    expect(vm.relationBetween("a", "b")).toBe("left");
  });

  it("collects goal-relevant uids including between anchors", () => {
    const vm = new ScenarioViewModel();
    const detail = detailFixture();
    detail.scenario.goal_conditions[0].push({
      obj1: "m", obj1_uid: "m", obj1_state: "none",
      obj2: ["a", "b"], obj2_uid: ["a", "b"], position: "between",
    });
    vm.applyServerView(detail);
    expect(vm.goalUids()).toEqual(new Set(["a", "b", "m"]));
  });

  it("notifies subscribers on every change", () => {
    const vm = new ScenarioViewModel();
    let calls = 0;
    vm.subscribe(() => { calls += 1; });
    vm.applyServerView(detailFixture());
    vm.select("a");
    vm.localMove("a", 0, 0);
    vm.discardLocal();
    expect(calls).toBe(4);
  });
});
