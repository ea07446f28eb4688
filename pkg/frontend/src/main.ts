// Application shell: queue on the left, scene inspector on the right.

import { ApiClient, ApiError, ConflictError } from "./api";
import { renderChecklist, renderRelationBadges } from "./checklist";
import { attachDrag } from "./drag";
import { ScenarioViewModel } from "./state";
import type { AssetWire, ScenarioListRow } from "./types";
import { Camera, defaultCamera, pan, renderScene, zoom } from "./view";
import { QueueFilter, TASK_TYPES, defaultTargetMix, renderQueue } from "./queue";

export class InspectorApp {
  readonly api: ApiClient;
  readonly vm = new ScenarioViewModel();
  camera: Camera = defaultCamera();
  rows: ScenarioListRow[] = [];
  filter: QueueFilter = { task_type: "", status: "" };
  targetMix = defaultTargetMix();
  catalogCache: AssetWire[] = [];

  private root: HTMLElement;
  private svg!: SVGSVGElement;
  private queuePane!: HTMLElement;
  private bannerPane!: HTMLElement;
  private statusPane!: HTMLElement;
  private badgesPane!: HTMLElement;
  private checklistPane!: HTMLElement;
  private notesInput!: HTMLInputElement;

  constructor(root: HTMLElement, apiBase: string) {
    this.root = root;
    this.api = new ApiClient(apiBase);
    this.buildSkeleton();
    this.vm.subscribe(() => this.renderDetail());
  }

  private buildSkeleton(): void {
    this.root.innerHTML = "";
    const aside = document.createElement("aside");
    aside.id = "queue-pane";

    const filters = document.createElement("div");
    filters.className = "filters";
    const typeSelect = document.createElement("select");
    typeSelect.id = "filter-task-type";
    for (const value of ["", ...TASK_TYPES]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value || "all types";
      typeSelect.appendChild(option);
    }
    typeSelect.addEventListener("change", () => {
      this.filter = { ...this.filter, task_type: typeSelect.value };
      this.renderQueuePane();
    });
    const statusSelect = document.createElement("select");
    statusSelect.id = "filter-status";
    for (const value of ["", "draft", "accepted", "rejected"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value || "all statuses";
      statusSelect.appendChild(option);
    }
    statusSelect.addEventListener("change", () => {
      this.filter = { ...this.filter, status: statusSelect.value };
      this.renderQueuePane();
    });
    filters.append(typeSelect, statusSelect);
    aside.appendChild(filters);

    this.queuePane = document.createElement("div");
    this.queuePane.id = "queue-list";
    aside.appendChild(this.queuePane);

    const main = document.createElement("main");
    this.bannerPane = document.createElement("div");
    this.bannerPane.id = "banner";
    main.appendChild(this.bannerPane);

    this.statusPane = document.createElement("div");
    this.statusPane.id = "status-bar";
    main.appendChild(this.statusPane);

    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg") as SVGSVGElement;
    this.svg.id = "scene";
    main.appendChild(this.svg);

    this.badgesPane = document.createElement("div");
    this.badgesPane.id = "relation-badges";
    main.appendChild(this.badgesPane);

    this.checklistPane = document.createElement("div");
    this.checklistPane.id = "goal-checklist";
    main.appendChild(this.checklistPane);

    this.notesInput = document.createElement("input");
    this.notesInput.id = "note-input";
    this.notesInput.placeholder = "annotator note";

    this.root.append(aside, main);

    attachDrag(this.svg, () => this.camera, this.vm, this.api);
    this.svg.addEventListener("wheel", (event) => {
      event.preventDefault();
      const rect = this.svg.getBoundingClientRect();
      const factor = (event as WheelEvent).deltaY < 0 ? 1.15 : 1 / 1.15;
      this.camera = zoom(
        this.camera, factor,
        (event as WheelEvent).clientX - rect.left,
        (event as WheelEvent).clientY - rect.top,
      );
      this.renderDetail();
    });
    let panning: [number, number] | null = null;
    this.svg.addEventListener("pointerdown", (event) => {
      const target = event.target as Element | null;
      if (!target?.getAttribute?.("data-uid")) {
        panning = [(event as MouseEvent).clientX, (event as MouseEvent).clientY];
      }
    });
    window.addEventListener("pointermove", (event) => {
      if (!panning) return;
      const dx = (event as MouseEvent).clientX - panning[0];
      const dy = (event as MouseEvent).clientY - panning[1];
      panning = [(event as MouseEvent).clientX, (event as MouseEvent).clientY];
      this.camera = pan(this.camera, dx, dy);
      this.renderDetail();
    });
    window.addEventListener("pointerup", () => {
      panning = null;
    });
  }

  async refreshQueue(): Promise<void> {
    this.rows = await this.api.listScenarios();
    this.renderQueuePane();
  }

  private renderQueuePane(): void {
    renderQueue(this.queuePane, this.rows, this.filter, this.targetMix, (id) => {
      void this.open(id);
    });
  }

  async open(id: string): Promise<void> {
    const detail = await this.api.getScenario(id);
    this.vm.applyServerView(detail);
  }

  async reload(): Promise<void> {
    if (this.vm.detail) await this.open(this.vm.detail.scenario.id);
  }

  async setStatus(status: string): Promise<void> {
    if (!this.vm.detail) return;
    try {
      const view = await this.api.setStatus(
        this.vm.detail.scenario.id, this.vm.version, status,
        this.notesInput.value || undefined,
      );
      this.vm.applyServerView(view);
      await this.refreshQueue();
    } catch (error) {
      if (error instanceof ConflictError) {
        this.vm.setBanner("conflict", `Stale view: ${error.message}`);
      } else if (error instanceof ApiError) {
        const extra = error.diagnostics.length ? ` - ${error.diagnostics.join("; ")}` : "";
        this.vm.setBanner("error", `${status} refused: ${error.message}${extra}`);
      } else {
        throw error;
      }
    }
  }

  async resolveLayout(): Promise<void> {
    if (!this.vm.detail) return;
    try {
      const view = await this.api.resolveLayout(this.vm.detail.scenario.id, this.vm.version);
      this.vm.applyServerView(view);
    } catch (error) {
      if (error instanceof ApiError) {
        this.vm.setBanner("error", `Resolve failed: ${error.message}`);
      } else {
        throw error;
      }
    }
  }

  /** Swap an asset: rewrite every reference of oldUid to newUid through the
   *  graph-edit endpoint; the server re-validates the whole scenario. */
  async swapAsset(oldUid: string, newUid: string): Promise<void> {
    const detail = this.vm.detail;
    if (!detail) return;
    const replace = (uid: string | string[]): string | string[] =>
      Array.isArray(uid) ? uid.map((u) => (u === oldUid ? newUid : u)) : uid === oldUid ? newUid : uid;
    const graph = detail.scenario.scene_graph;
    try {
      const view = await this.api.editGraph(detail.scenario.id, this.vm.version, {
        nodes: graph.nodes.map((n) => ({ ...n, obj_uid: replace(n.obj_uid) as string })),
        edges: graph.edges.map((e) => ({
          ...e,
          obj1_uid: replace(e.obj1_uid) as string,
          obj2_uid: replace(e.obj2_uid) as string,
        })),
        goal_conditions: detail.scenario.goal_conditions.map((disjunct) =>
          disjunct.map((atom) => ({
            ...atom,
            obj1_uid: replace(atom.obj1_uid) as string,
            obj2_uid: replace(atom.obj2_uid),
          })),
        ),
      });
      this.vm.applyServerView(view);
    } catch (error) {
      if (error instanceof ApiError) {
        this.vm.setBanner("error", `Swap refused: ${error.message}`);
      } else {
        throw error;
      }
    }
  }

  private renderDetail(): void {
    renderScene(this.svg, this.camera, this.vm);
    renderRelationBadges(this.badgesPane, this.vm);
    renderChecklist(this.checklistPane, this.vm);

    this.bannerPane.innerHTML = "";
    if (this.vm.banner) {
      const banner = document.createElement("div");
      banner.className = `banner ${this.vm.banner.kind}`;
      banner.textContent = this.vm.banner.text;
      if (this.vm.banner.kind === "conflict") {
        const reload = document.createElement("button");
        reload.id = "reload-button";
        reload.textContent = "Reload";
        reload.addEventListener("click", () => void this.reload());
        banner.appendChild(reload);
      }
      this.bannerPane.appendChild(banner);
    }

    this.statusPane.innerHTML = "";
    const detail = this.vm.detail;
    if (!detail) return;
    const chip = document.createElement("span");
    chip.id = "status-chip";
    chip.className = `chip status-${detail.status}`;
    chip.textContent = detail.status;
    this.statusPane.appendChild(chip);

    const title = document.createElement("span");
    title.className = "scenario-title";
    title.textContent = ` ${detail.scenario.id} - ${detail.scenario.instruction}`;
    this.statusPane.appendChild(title);

    const actions = document.createElement("span");
    actions.className = "actions";
    for (const [id, label, status] of [
      ["accept-button", "Accept", "accepted"],
      ["reject-button", "Reject", "rejected"],
      ["reopen-button", "Reopen", "draft"],
    ] as const) {
      const button = document.createElement("button");
      button.id = id;
      button.textContent = label;
      button.addEventListener("click", () => void this.setStatus(status));
      actions.appendChild(button);
    }
    const resolve = document.createElement("button");
    resolve.id = "resolve-button";
    resolve.textContent = "Resolve layout";
    resolve.addEventListener("click", () => void this.resolveLayout());
    actions.appendChild(resolve);
    actions.appendChild(this.notesInput);
    this.statusPane.appendChild(actions);
  }
}

export function boot(root: HTMLElement, apiBase?: string): InspectorApp {
  const base =
    apiBase
    ?? (window as { __TABLETASK_API__?: string }).__TABLETASK_API__
    ?? "http://127.0.0.1:8347";
  const app = new InspectorApp(root, base);
  void app.refreshQueue();
  return app;
}
