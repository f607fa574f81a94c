/** Thin typed client for the studypath API. The fetch function is injected
 * so tests can replay recorded responses. */

import type {
  AttemptDelta,
  CurriculumDoc,
  EnrollmentMap,
  RecommendationsDoc,
  RevokeDelta,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public validationReport: { code: string; message: string }[] = [],
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const code = parsed?.error?.code ?? 'http_error';
      const message = parsed?.error?.message ?? `HTTP ${response.status}`;
      throw new ApiError(response.status, code, message, parsed?.validation_report ?? []);
    }
    return parsed as T;
  }

  healthz(): Promise<{ status: string }> {
    return this.request('GET', '/healthz');
  }

  curriculum(id: string): Promise<CurriculumDoc> {
    return this.request('GET', `/curricula/${id}`);
  }

  uploadCurriculum(doc: unknown): Promise<{ id: string; title: string; registered: boolean }> {
    return this.request('POST', '/curricula', doc);
  }

  enroll(curriculumId: string, mode?: string): Promise<{ id: string; map: EnrollmentMap }> {
    return this.request('POST', '/enrollments', { curriculum_id: curriculumId, mode: mode ?? null });
  }

  map(enrollmentId: string): Promise<EnrollmentMap> {
    return this.request('GET', `/enrollments/${enrollmentId}/map`);
  }

  submitAttempt(
    enrollmentId: string,
    milestoneId: string,
    assessmentId: string,
    score: number,
  ): Promise<AttemptDelta> {
    return this.request('POST', `/enrollments/${enrollmentId}/attempts`, {
      milestone_id: milestoneId,
      assessment_id: assessmentId,
      score,
    });
  }

  recommendations(enrollmentId: string): Promise<RecommendationsDoc> {
    return this.request('GET', `/enrollments/${enrollmentId}/recommendations`);
  }

  revoke(enrollmentId: string, milestoneId: string, reason: string): Promise<RevokeDelta> {
    return this.request('POST', `/enrollments/${enrollmentId}/revoke`, {
      milestone_id: milestoneId,
      reason,
    });
  }
}
