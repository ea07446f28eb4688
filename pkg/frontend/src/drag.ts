// Direct manipulation: optimistic while dragging, authoritative on commit.
// pointerup posts the buffered move; the server's reply (or rejection)
// becomes the next rendered truth.

import { ApiClient, ApiError, ConflictError } from "./api";
import type { ScenarioViewModel } from "./state";
import { Camera, screenToWorld } from "./view";

export interface DragCallbacks {
  onCommitted?: () => void;
  onRejected?: (message: string) => void;
  onConflict?: (message: string) => void;
}

export function attachDrag(
  svg: SVGSVGElement,
  camera: () => Camera,
  vm: ScenarioViewModel,
  api: ApiClient,
  callbacks: DragCallbacks = {},
): () => void {
  let draggingUid: string | null = null;
  let grabOffset: [number, number] = [0, 0];

  function eventWorld(event: MouseEvent): [number, number] {
    const rect = svg.getBoundingClientRect();
    return screenToWorld(camera(), event.clientX - rect.left, event.clientY - rect.top);
  }

  function onPointerDown(event: Event): void {
    const mouse = event as MouseEvent;
    const target = mouse.target as Element | null;
    const uid = target?.getAttribute?.("data-uid");
    if (!uid) {
      vm.select(null);
      return;
    }
    const pose = vm.renderPose(uid);
    if (!pose) return;
    const [wx, wy] = eventWorld(mouse);
    draggingUid = uid;
    grabOffset = [pose.x - wx, pose.y - wy];
    vm.select(uid);
  }

  function onPointerMove(event: Event): void {
    if (!draggingUid) return;
    const [wx, wy] = eventWorld(event as MouseEvent);
    vm.localMove(draggingUid, wx + grabOffset[0], wy + grabOffset[1]);
  }

  async function onPointerUp(): Promise<void> {
    if (!draggingUid || !vm.detail) {
      draggingUid = null;
      return;
    }
    draggingUid = null;
    const moves = vm.pendingMoves();
    if (moves.length === 0) return;
    try {
      const view = await api.moveObjects(vm.detail.scenario.id, vm.version, moves);
      vm.applyServerView(view);
      callbacks.onCommitted?.();
    } catch (error) {
      vm.discardLocal();
      if (error instanceof ConflictError) {
        vm.setBanner("conflict", `Edit conflict: ${error.message}. Reload the scenario.`);
        callbacks.onConflict?.(error.message);
      } else if (error instanceof ApiError) {
        vm.setBanner("error", `Move rejected: ${error.message}`);
        callbacks.onRejected?.(error.message);
      } else {
        throw error;
      }
    }
  }

  svg.addEventListener("pointerdown", onPointerDown);
  window.addEventListener("pointermove", onPointerMove);
  window.addEventListener("pointerup", onPointerUp);
  return () => {
    svg.removeEventListener("pointerdown", onPointerDown);
    window.removeEventListener("pointermove", onPointerMove);
    window.removeEventListener("pointerup", onPointerUp);
  };
}
