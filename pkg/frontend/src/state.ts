/** View state and its transitions.
 *
 * Every field shown in the UI is copied from a confirmed API response;
 * optimistic updates are forbidden, so the only mutations here are
 * "replace with server payload" and "apply server-sent delta". */

import type {
  AttemptDelta,
  CurriculumDoc,
  EnrollmentMap,
  MilestoneEntry,
  RecommendationsDoc,
  RevokeDelta,
  StatusChange,
} from './types.js';

export interface ViewState {
  enrollmentId: string | null;
  curriculum: CurriculumDoc | null;
  milestones: Record<string, MilestoneEntry>;
  recommendations: RecommendationsDoc | null;
  /** milestones whose color just changed, for the transition highlight */
  recentlyChanged: string[];
  error: string | null;
  pending: boolean;
}

export function initialState(): ViewState {
  return {
    enrollmentId: null,
    curriculum: null,
    milestones: {},
    recommendations: null,
    recentlyChanged: [],
    error: null,
    pending: false,
  };
}

export function applyCurriculum(state: ViewState, doc: CurriculumDoc): ViewState {
  return { ...state, curriculum: doc, error: null };
}

export function applyMap(state: ViewState, map: EnrollmentMap): ViewState {
  return {
    ...state,
    enrollmentId: map.enrollment_id,
    milestones: { ...map.milestones },
    recentlyChanged: [],
    error: null,
  };
}

function applyStatusChanges(
  milestones: Record<string, MilestoneEntry>,
  changes: StatusChange[],
): Record<string, MilestoneEntry> {
  const next = { ...milestones };
  for (const change of changes) {
    const entry = next[change.milestone_id];
    if (entry) {
      next[change.milestone_id] = { ...entry, status: change.new, color: change.color };
    }
  }
  return next;
}

export function applyAttemptDelta(state: ViewState, delta: AttemptDelta): ViewState {
  const milestones = applyStatusChanges(state.milestones, delta.status_changes);
  const entry = milestones[delta.milestone_id];
  if (entry) {
    milestones[delta.milestone_id] = {
      ...entry,
      mastering_level: delta.mastering_level,
      consecutive_failures: delta.consecutive_failures,
    };
  }
  return {
    ...state,
    milestones,
    recentlyChanged: delta.status_changes.map((c) => c.milestone_id),
    error: null,
  };
}

export function applyRevokeDelta(state: ViewState, delta: RevokeDelta): ViewState {
  const milestones = applyStatusChanges(state.milestones, delta.status_changes);
  const entry = milestones[delta.milestone_id];
  if (entry) {
    milestones[delta.milestone_id] = { ...entry, mastering_level: null };
  }
  return {
    ...state,
    milestones,
    recentlyChanged: delta.status_changes.map((c) => c.milestone_id),
    error: null,
  };
}

export function applyRecommendations(state: ViewState, doc: RecommendationsDoc): ViewState {
  return { ...state, recommendations: doc, error: null };
}

export function applyError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

/** Layer milestones by prerequisite depth for the map layout. */
export function topologicalLayers(curriculum: CurriculumDoc): string[][] {
  const depth = new Map<string, number>();
  const prereqs = new Map(curriculum.milestones.map((m) => [m.id, m.prerequisites]));
  const resolve = (id: string, seen: Set<string>): number => {
    const cached = depth.get(id);
    if (cached !== undefined) return cached;
    if (seen.has(id)) return 0; // defensive: server validates acyclicity
    seen.add(id);
    const parents = prereqs.get(id) ?? [];
    const value = parents.length === 0 ? 0 : 1 + Math.max(...parents.map((p) => resolve(p, seen)));
    depth.set(id, value);
    return value;
  };
  const ids = [...prereqs.keys()].sort();
  for (const id of ids) resolve(id, new Set());
  const layers: string[][] = [];
  for (const id of ids) {
    const level = depth.get(id) ?? 0;
    while (layers.length <= level) layers.push([]);
    layers[level].push(id);
  }
  return layers;
}
