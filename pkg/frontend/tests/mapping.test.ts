import { describe, expect, it } from "vitest";

import { defaultCamera, pan, screenToWorld, worldToScreen, zoom } from "../src/view";

describe("world/screen mapping", () => {
  it("round-trips points", () => {
    const camera = defaultCamera();
    for (const [x, y] of [[0, 0], [0.3, -0.2], [-0.55, 0.35]] as const) {
      const [sx, sy] = worldToScreen(camera, x, y);
      const [wx, wy] = screenToWorld(camera, sx, sy);
      expect(wx).toBeCloseTo(x, 12);
      expect(wy).toBeCloseTo(y, 12);
    }
  });

  it("puts greater world x lower on screen (toward the viewer)", () => {
    const camera = defaultCamera();
    const [, near] = worldToScreen(camera, 0.4, 0);
    const [, far] = worldToScreen(camera, -0.4, 0);
    expect(near).toBeGreaterThan(far);
  });

  it("puts greater world y to the left on screen", () => {
    const camera = defaultCamera();
    const [leftSide] = worldToScreen(camera, 0, 0.3);
    const [rightSide] = worldToScreen(camera, 0, -0.3);
    expect(leftSide).toBeLessThan(rightSide);
  });

  it("zoom keeps the cursor's world point fixed", () => {
    let camera = defaultCamera();
    const cursor: [number, number] = [200, 140];
    const before = screenToWorld(camera, ...cursor);
    camera = zoom(camera, 1.6, ...cursor);
    const after = screenToWorld(camera, ...cursor);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
    expect(camera.scale).toBeCloseTo(520 * 1.6, 9);
  });

  it("pan shifts the view by screen pixels", () => {
    let camera = defaultCamera();
    const anchor = screenToWorld(camera, 100, 100);
    camera = pan(camera, 50, 0);
    const moved = screenToWorld(camera, 150, 0 + 100);
    expect(moved[0]).toBeCloseTo(anchor[0], 9);
    expect(moved[1]).toBeCloseTo(anchor[1], 9);
  });
});
