// Wire types mirrored from the curation service's JSON payloads.

export type RelationTriple = [string, string, string];

export interface ScenarioListRow {
  id: string;
  task_type: string;
  status: string;
  instruction: string;
  note: string;
  version: number;
  has_layout: boolean;
  horizon: number;
}

export interface GoalAtomWire {
  obj1: string | string[];
  obj1_uid: string;
  obj1_state: string;
  obj2: string | string[];
  obj2_uid: string | string[];
  position: string;
}

export interface EdgeWire {
  obj1: string;
  obj1_uid: string;
  position: string;
  obj2: string;
  obj2_uid: string;
}

export interface NodeWire {
  obj_uid: string;
  state: string;
}

export interface AssetWire {
  uid: string;
  name: string;
  description: string;
  category: string;
  color: string;
  shape: string;
  material: string;
  footprint: [number, number, number];
  mass: number;
  states: string[];
  tags: string[];
}

export interface ScenarioWire {
  id: string;
  task_type: string;
  seed: number;
  instruction: string;
  goal_conditions: GoalAtomWire[][];
  scene_graph: {
    description: string;
    edges: EdgeWire[];
    nodes: NodeWire[];
  };
  asset_pool: AssetWire[];
}

export interface TableWire {
  extent_x: number;
  extent_y: number;
  surface_z: number;
  margin: number;
}

export interface SceneObjectWire {
  uid: string;
  center: [number, number, number];
  half_extents: [number, number, number];
  yaw: number;
  support_uid: string;
  state: string;
}

export interface LayoutWire {
  table: TableWire;
  seed: number;
  objects: SceneObjectWire[];
}

export interface ScenarioDetail {
  scenario: ScenarioWire;
  layout: LayoutWire | null;
  relations: RelationTriple[];
  goal_status: boolean[][];
  status: string;
  note: string;
  version: number;
  history: { ts: string; kind: string; detail: string }[];
}

export interface MoveRequest {
  uid: string;
  x: number;
  y: number;
  yaw?: number;
}

export interface CurationReport {
  curation: Record<string, Record<string, number>>;
  metrics?: unknown;
}
