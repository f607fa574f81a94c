/** Wire formats of the studypath HTTP API. The UI renders these verbatim:
 * statuses, colors, levels and recommendations are never recomputed here. */

export type Status = 'Locked' | 'Exploring' | 'Passed';
export type Color = 'red' | 'yellow' | 'green';

export interface MilestoneEntry {
  status: Status;
  color: Color;
  mastering_level: number | null;
  consecutive_failures: number;
  struggling: boolean;
}

export interface EnrollmentMap {
  schema: 'enrollment_map/1';
  enrollment_id: string;
  student_id: string;
  curriculum_id: string;
  mode: 'open' | 'locked';
  milestones: Record<string, MilestoneEntry>;
}

export interface CurriculumAsset {
  id: string;
  kind: 'core' | 'support' | 'challenge';
  difficulty: number;
  uri: string;
  title: string;
}

export interface CurriculumAssessment {
  id: string;
  title: string;
  max_score: number;
  pass_threshold_pct?: number;
}

export interface CurriculumMilestone {
  id: string;
  title: string;
  prerequisites: string[];
  assets: CurriculumAsset[];
  assessments: CurriculumAssessment[];
}

export interface CurriculumDoc {
  schema: 'curriculum/1';
  id: string;
  title: string;
  mode_default: 'open' | 'locked';
  milestones: CurriculumMilestone[];
}

export interface StatusChange {
  milestone_id: string;
  old: Status;
  new: Status;
  color: Color;
}

export interface AttemptDelta {
  milestone_id: string;
  attempt: {
    assessment_id: string;
    score: number;
    score_pct: number;
    passed: boolean;
    timestamp: string;
  };
  status_changes: StatusChange[];
  mastering_level: number | null;
  consecutive_failures: number;
}

export interface RevokeDelta {
  milestone_id: string;
  reason: string;
  status_changes: StatusChange[];
}

export interface RecommendationItem {
  kind: 'study_next' | 'revise_prerequisite' | 'extra_support' | 'challenge';
  milestone: string;
  assets: string[];
  rationale: string;
  rank: number;
}

export interface RecommendationsDoc {
  schema: 'recommendation/1';
  enrollment_id: string;
  recommendations: RecommendationItem[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
  validation_report?: { code: string; message: string }[];
}
