// View model for one open scenario.
//
// Invariant: relations and goal status always come from the last server
// response. Local drags only touch the dirty pose buffer used for rendering;
// nothing in the client ever infers a relation on its own.

import type { MoveRequest, RelationTriple, ScenarioDetail } from "./types";

export type Listener = () => void;

export class ScenarioViewModel {
  detail: ScenarioDetail | null = null;
  selectedUid: string | null = null;
  dirtyPoses = new Map<string, { x: number; y: number }>();
  banner: { kind: "error" | "conflict" | "info"; text: string } | null = null;

  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  get version(): number {
    return this.detail?.version ?? -1;
  }

  /** The single entry point for server truth: replaces the snapshot and
   *  clears every local edit. */
  applyServerView(detail: ScenarioDetail): void {
    this.detail = detail;
    this.dirtyPoses.clear();
    this.banner = null;
    this.emit();
  }

  setBanner(kind: "error" | "conflict" | "info", text: string): void {
    this.banner = { kind, text };
    this.emit();
  }

  select(uid: string | null): void {
    this.selectedUid = uid;
    this.emit();
  }

  /** Optimistic, render-only pose while dragging. */
  localMove(uid: string, x: number, y: number): void {
    this.dirtyPoses.set(uid, { x, y });
    this.emit();
  }

  discardLocal(): void {
    this.dirtyPoses.clear();
    this.emit();
  }

  pendingMoves(): MoveRequest[] {
    return [...this.dirtyPoses.entries()].map(([uid, pose]) => ({
      uid,
      x: pose.x,
      y: pose.y,
    }));
  }

  /** Effective render position: dirty pose if present, else server pose. */
  renderPose(uid: string): { x: number; y: number } | null {
    const dirty = this.dirtyPoses.get(uid);
    if (dirty) return dirty;
    const object = this.detail?.layout?.objects.find((o) => o.uid === uid);
    return object ? { x: object.center[0], y: object.center[1] } : null;
  }

  /** Relations incident to a uid, straight from the last server response. */
  relationsFor(uid: string): RelationTriple[] {
    if (!this.detail) return [];
    return this.detail.relations.filter(([a, , b]) => a === uid || b === uid);
  }

  relationBetween(a: string, b: string): string | null {
    if (!this.detail) return null;
    const hit = this.detail.relations.find(([x, , y]) => x === a && y === b);
    return hit ? hit[1] : null;
  }

  goalUids(): Set<string> {
    const uids = new Set<string>();
    if (!this.detail) return uids;
    for (const disjunct of this.detail.scenario.goal_conditions) {
      for (const atom of disjunct) {
        uids.add(atom.obj1_uid);
        const anchors = Array.isArray(atom.obj2_uid) ? atom.obj2_uid : [atom.obj2_uid];
        for (const anchor of anchors) {
          if (anchor && anchor !== "none") uids.add(anchor);
        }
      }
    }
    return uids;
  }
}
