/** Browser bootstrap: wires the API client, view state and renderers to the
 * page. All state changes happen on confirmed responses; one mutation may
 * be in flight per enrollment (submit buttons are disabled meanwhile). */

import { ApiClient, ApiError } from './api.js';
import {
  applyAttemptDelta,
  applyCurriculum,
  applyError,
  applyMap,
  applyRecommendations,
  applyRevokeDelta,
  initialState,
  type ViewState,
} from './state.js';
import {
  renderAttemptForm,
  renderErrorBanner,
  renderInstructorPanel,
  renderMap,
  renderRecommendations,
} from './render.js';

let state: ViewState = initialState();
let client: ApiClient | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function redraw(): void {
  el('banner').innerHTML = renderErrorBanner(state);
  el('map').innerHTML = renderMap(state);
  el('recommendations').innerHTML = renderRecommendations(state);
  el('attempt').innerHTML = renderAttemptForm(state);
  el('instructor').innerHTML = renderInstructorPanel(state);
  wireForms();
}

function setState(next: ViewState): void {
  state = next;
  redraw();
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    const report = error.validationReport.map((v) => `${v.code}: ${v.message}`).join('; ');
    return report ? `${error.message} (${report})` : `${error.code}: ${error.message}`;
  }
  return String(error);
}

async function refreshRecommendations(): Promise<void> {
  if (!client || !state.enrollmentId) return;
  setState(applyRecommendations(state, await client.recommendations(state.enrollmentId)));
}

async function openEnrollment(enrollmentId: string): Promise<void> {
  if (!client) return;
  const map = await client.map(enrollmentId);
  const curriculum = await client.curriculum(map.curriculum_id);
  setState(applyMap(applyCurriculum(state, curriculum), map));
  await refreshRecommendations();
}

async function submitAttempt(milestoneId: string, assessmentId: string, score: number): Promise<void> {
  if (!client || !state.enrollmentId || state.pending) return;
  setState({ ...state, pending: true });
  try {
    const delta = await client.submitAttempt(state.enrollmentId, milestoneId, assessmentId, score);
    setState({ ...applyAttemptDelta(state, delta), pending: false });
    await refreshRecommendations();
  } catch (error) {
    setState({ ...applyError(state, describe(error)), pending: false });
  }
}

function wireForms(): void {
  const attempt = document.getElementById('attempt-form') as HTMLFormElement | null;
  if (attempt) {
    attempt.onsubmit = (event) => {
      event.preventDefault();
      const data = new FormData(attempt);
      const [milestoneId, assessmentId] = String(data.get('target')).split(':');
      void submitAttempt(milestoneId, assessmentId, Number(data.get('score')));
    };
  }
  const upload = document.getElementById('upload-form') as HTMLFormElement | null;
  if (upload) {
    upload.onsubmit = (event) => {
      event.preventDefault();
      if (!client || state.pending) return;
      const data = new FormData(upload);
      void (async () => {
        setState({ ...state, pending: true });
        try {
          const doc = JSON.parse(String(data.get('curriculum')));
          await client!.uploadCurriculum(doc);
          setState({ ...state, pending: false, error: null });
        } catch (error) {
          setState({ ...applyError(state, describe(error)), pending: false });
        }
      })();
    };
  }
  const revoke = document.getElementById('revoke-form') as HTMLFormElement | null;
  if (revoke) {
    revoke.onsubmit = (event) => {
      event.preventDefault();
      if (!client || !state.enrollmentId || state.pending) return;
      const data = new FormData(revoke);
      void (async () => {
        setState({ ...state, pending: true });
        try {
          const delta = await client!.revoke(
            state.enrollmentId!,
            String(data.get('milestone')),
            String(data.get('reason')),
          );
          setState({ ...applyRevokeDelta(state, delta), pending: false });
          await refreshRecommendations();
        } catch (error) {
          setState({ ...applyError(state, describe(error)), pending: false });
        }
      })();
    };
  }
}

function wireLogin(): void {
  const login = el('login-form') as HTMLFormElement;
  login.onsubmit = (event) => {
    event.preventDefault();
    const data = new FormData(login);
    const base = String(data.get('base') || 'http://127.0.0.1:8000');
    client = new ApiClient(base, String(data.get('token') || ''));
    const enrollment = String(data.get('enrollment') || '');
    const curriculum = String(data.get('curriculum') || '');
    void (async () => {
      try {
        if (enrollment) {
          await openEnrollment(enrollment);
        } else if (curriculum) {
          const created = await client!.enroll(curriculum);
          const doc = await client!.curriculum(created.map.curriculum_id);
          setState(applyMap(applyCurriculum(state, doc), created.map));
          await refreshRecommendations();
        }
      } catch (error) {
        setState(applyError(state, describe(error)));
      }
    })();
  };
}

document.addEventListener('DOMContentLoaded', () => {
  wireLogin();
  redraw();
  el('map').addEventListener('click', (event) => {
    const target = (event.target as Element).closest('[data-open]');
    if (!target || !state.curriculum) return;
    const milestone = state.curriculum.milestones.find(
      (m) => m.id === target.getAttribute('data-open'),
    );
    if (!milestone) return;
    const assets = milestone.assets.map((a) => `${a.title} <${a.uri}>`).join('\n');
    window.alert(`${milestone.title}\n\n${assets}`);
  });
});
