// Top-down SVG rendering of a layout, plus the pure world<->screen mapping
// shared with the drag handlers. The world frame matches the engine: x grows
// toward the camera (drawn downward), y grows to the camera's left (drawn
// leftward), so the rendered table reads like the robot's own camera view.

import type { ScenarioViewModel } from "./state";
import type { SceneObjectWire } from "./types";

export interface Camera {
  centerX: number; // world x at the view center
  centerY: number; // world y at the view center
  scale: number; // pixels per meter
  width: number; // svg pixel size
  height: number;
}

export function defaultCamera(width = 800, height = 560): Camera {
  return { centerX: 0, centerY: 0, scale: 520, width, height };
}

// Screen: +sx right, +sy down. World: +x toward camera -> down on screen;
// +y to the camera's left -> left on screen.
export function worldToScreen(camera: Camera, x: number, y: number): [number, number] {
  const sx = camera.width / 2 - (y - camera.centerY) * camera.scale;
  const sy = camera.height / 2 + (x - camera.centerX) * camera.scale;
  return [sx, sy];
}

export function screenToWorld(camera: Camera, sx: number, sy: number): [number, number] {
  const x = camera.centerX + (sy - camera.height / 2) / camera.scale;
  const y = camera.centerY - (sx - camera.width / 2) / camera.scale;
  return [x, y];
}

export function zoom(camera: Camera, factor: number, sx: number, sy: number): Camera {
  const [wx, wy] = screenToWorld(camera, sx, sy);
  const scale = Math.min(3000, Math.max(120, camera.scale * factor));
  // Keep the world point under the cursor fixed.
  const centerX = wx - (sy - camera.height / 2) / scale;
  const centerY = wy + (sx - camera.width / 2) / scale;
  return { ...camera, scale, centerX, centerY };
}

export function pan(camera: Camera, dsx: number, dsy: number): Camera {
  return {
    ...camera,
    centerX: camera.centerX - dsy / camera.scale,
    centerY: camera.centerY + dsx / camera.scale,
  };
}

function footprintHalf(object: SceneObjectWire): [number, number] {
  const [hx, hy] = object.half_extents;
  const c = Math.abs(Math.cos(object.yaw));
  const s = Math.abs(Math.sin(object.yaw));
  return [hx * c + hy * s, hx * s + hy * c];
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function supportDepth(object: SceneObjectWire, byUid: Map<string, SceneObjectWire>): number {
  let depth = 0;
  let current = object;
  while (current.support_uid !== "table") {
    const support = byUid.get(current.support_uid);
    if (!support) break;
    depth += 1;
    current = support;
  }
  return depth;
}

/** Redraw the whole scene into the svg root. Cheap at tabletop scale. */
export function renderScene(svg: SVGSVGElement, camera: Camera, vm: ScenarioViewModel): void {
  svg.innerHTML = "";
  svg.setAttribute("width", String(camera.width));
  svg.setAttribute("height", String(camera.height));
  const detail = vm.detail;
  if (!detail?.layout) {
    const note = el("text", { x: "20", y: "40", class: "empty-note" });
    note.textContent = "No layout yet - use Resolve to construct one.";
    svg.appendChild(note);
    return;
  }
  const layout = detail.layout;
  const goalUids = vm.goalUids();

  // Table top with the usable margin outlined.
  const [tx0, ty0] = worldToScreen(camera, -layout.table.extent_x / 2, layout.table.extent_y / 2);
  const [tx1, ty1] = worldToScreen(camera, layout.table.extent_x / 2, -layout.table.extent_y / 2);
  svg.appendChild(
    el("rect", {
      x: String(Math.min(tx0, tx1)),
      y: String(Math.min(ty0, ty1)),
      width: String(Math.abs(tx1 - tx0)),
      height: String(Math.abs(ty1 - ty0)),
      class: "table",
    }),
  );
  const margin = layout.table.margin;
  const [mx0, my0] = worldToScreen(
    camera, -layout.table.extent_x / 2 + margin, layout.table.extent_y / 2 - margin,
  );
  const [mx1, my1] = worldToScreen(
    camera, layout.table.extent_x / 2 - margin, -layout.table.extent_y / 2 + margin,
  );
  svg.appendChild(
    el("rect", {
      x: String(Math.min(mx0, mx1)),
      y: String(Math.min(my0, my1)),
      width: String(Math.abs(mx1 - mx0)),
      height: String(Math.abs(my1 - my0)),
      class: "table-margin",
    }),
  );

  // Frame annotation: the camera looks along -x, so "front" is the bottom edge.
  const [ax, ay] = worldToScreen(camera, layout.table.extent_x / 2 + 0.06, 0);
  const frontLabel = el("text", { x: String(ax), y: String(ay), class: "axis-label" });
  frontLabel.textContent = "front (toward camera)";
  svg.appendChild(frontLabel);
  const [lx, ly] = worldToScreen(camera, 0, layout.table.extent_y / 2 + 0.1);
  const leftLabel = el("text", { x: String(lx), y: String(ly), class: "axis-label" });
  leftLabel.textContent = "left";
  svg.appendChild(leftLabel);

  const byUid = new Map(layout.objects.map((o) => [o.uid, o]));
  const ordered = [...layout.objects].sort(
    (a, b) => supportDepth(a, byUid) - supportDepth(b, byUid) || a.uid.localeCompare(b.uid),
  );

  for (const object of ordered) {
    const pose = vm.renderPose(object.uid) ?? { x: object.center[0], y: object.center[1] };
    const [hx, hy] = footprintHalf(object);
    const [sx0, sy0] = worldToScreen(camera, pose.x - hx, pose.y + hy);
    const [sx1, sy1] = worldToScreen(camera, pose.x + hx, pose.y - hy);
    const classes = ["object"];
    if (goalUids.has(object.uid)) classes.push("goal");
    if (object.uid === vm.selectedUid) classes.push("selected");
    if (vm.dirtyPoses.has(object.uid)) classes.push("dirty");
    if (object.support_uid !== "table") classes.push("supported");
    const rect = el("rect", {
      x: String(Math.min(sx0, sx1)),
      y: String(Math.min(sy0, sy1)),
      width: String(Math.abs(sx1 - sx0)),
      height: String(Math.abs(sy1 - sy0)),
      class: classes.join(" "),
      "data-uid": object.uid,
    });
    svg.appendChild(rect);
    const [cx, cy] = worldToScreen(camera, pose.x, pose.y);
    const label = el("text", {
      x: String(cx),
      y: String(cy),
      class: "object-label",
      "text-anchor": "middle",
      "data-label-for": object.uid,
    });
    const state = object.state && object.state !== "none" ? ` [${object.state}]` : "";
    const nested = object.support_uid !== "table" ? ` (on ${object.support_uid})` : "";
    label.textContent = object.uid + state + nested;
    svg.appendChild(label);
  }
}
