/** Pure HTML/SVG renderers. Inputs are view state, output is markup;
 * colors and texts come from API payloads untouched, which is what the
 * traceability tests pin down. */

import { topologicalLayers, type ViewState } from './state.js';
import type { RecommendationItem } from './types.js';

const NODE_WIDTH = 150;
const NODE_HEIGHT = 54;
const GAP_X = 70;
const GAP_Y = 26;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderErrorBanner(state: ViewState): string {
  if (!state.error) return '';
  return `<div class="error-banner" role="alert">${escapeHtml(state.error)}</div>`;
}

/** The milestone map: one SVG node per milestone filled with the API color,
 * one edge per prerequisite pair. Locked nodes are not clickable. */
export function renderMap(state: ViewState): string {
  if (!state.curriculum || Object.keys(state.milestones).length === 0) {
    return '<p class="placeholder">no milestones</p>';
  }
  const layers = topologicalLayers(state.curriculum);
  const position = new Map<string, { x: number; y: number }>();
  layers.forEach((layer, column) => {
    layer.forEach((id, row) => {
      position.set(id, {
        x: 20 + column * (NODE_WIDTH + GAP_X),
        y: 20 + row * (NODE_HEIGHT + GAP_Y),
      });
    });
  });
  const width = 40 + layers.length * (NODE_WIDTH + GAP_X);
  const rows = Math.max(...layers.map((layer) => layer.length));
  const height = 40 + rows * (NODE_HEIGHT + GAP_Y);

  const edges: string[] = [];
  for (const milestone of state.curriculum.milestones) {
    const target = position.get(milestone.id);
    if (!target) continue;
    for (const prereq of [...milestone.prerequisites].sort()) {
      const source = position.get(prereq);
      if (!source) continue;
      edges.push(
        `<line x1="${source.x + NODE_WIDTH}" y1="${source.y + NODE_HEIGHT / 2}" ` +
          `x2="${target.x}" y2="${target.y + NODE_HEIGHT / 2}" class="edge" />`,
      );
    }
  }

  const nodes: string[] = [];
  const byId = new Map(state.curriculum.milestones.map((m) => [m.id, m]));
  for (const [id, point] of [...position.entries()].sort(([a], [b]) => (a < b ? -1 : 1))) {
    const entry = state.milestones[id];
    if (!entry) continue;
    const title = byId.get(id)?.title ?? id;
    const clickable = entry.status !== 'Locked';
    const badge =
      entry.mastering_level !== null
        ? `<text x="${point.x + NODE_WIDTH - 14}" y="${point.y + 18}" class="badge">L${entry.mastering_level}</text>`
        : '';
    const struggle = entry.struggling
      ? `<text x="${point.x + 14}" y="${point.y + 18}" class="struggle" data-struggling="${id}">!</text>`
      : '';
    const changed = state.recentlyChanged.includes(id) ? ' changed' : '';
    nodes.push(
      `<g class="milestone${clickable ? ' clickable' : ''}${changed}" data-milestone="${id}" ` +
        `data-status="${entry.status}"${clickable ? ` data-open="${id}"` : ''}>` +
        `<rect x="${point.x}" y="${point.y}" width="${NODE_WIDTH}" height="${NODE_HEIGHT}" ` +
        `rx="8" fill="${entry.color}" />` +
        `<text x="${point.x + NODE_WIDTH / 2}" y="${point.y + NODE_HEIGHT / 2 + 5}" ` +
        `class="title">${escapeHtml(title)}</text>` +
        badge +
        struggle +
        `</g>`,
    );
  }

  return (
    `<svg viewBox="0 0 ${width} ${height}" class="map" role="img">` +
    edges.join('') +
    nodes.join('') +
    `</svg>`
  );
}

export function renderRecommendationCard(item: RecommendationItem): string {
  const assets = item.assets
    .map((assetId) => `<li class="asset" data-asset="${assetId}">${escapeHtml(assetId)}</li>`)
    .join('');
  return (
    `<article class="card" data-kind="${item.kind}" data-milestone="${item.milestone}" ` +
    `data-rank="${item.rank}">` +
    `<header>#${item.rank} ${escapeHtml(item.kind.replace(/_/g, ' '))}: ` +
    `${escapeHtml(item.milestone)}</header>` +
    `<p class="rationale">${escapeHtml(item.rationale)}</p>` +
    `<ul class="assets">${assets}</ul>` +
    `</article>`
  );
}

export function renderRecommendations(state: ViewState): string {
  const doc = state.recommendations;
  if (!doc) return '<p class="placeholder">no recommendations yet</p>';
  if (doc.recommendations.length === 0) {
    return '<p class="placeholder">nothing to recommend</p>';
  }
  return doc.recommendations.map(renderRecommendationCard).join('');
}

/** Attempt form options: only milestones the student may attempt
 * (Exploring or Passed; Locked is rejected server-side anyway). */
export function renderAttemptForm(state: ViewState): string {
  if (!state.curriculum) return '';
  const options = state.curriculum.milestones
    .filter((m) => state.milestones[m.id] && state.milestones[m.id].status !== 'Locked')
    .map((m) =>
      m.assessments
        .map(
          (assessment) =>
            `<option value="${m.id}:${assessment.id}">` +
            `${escapeHtml(m.title)} — ${escapeHtml(assessment.title)}</option>`,
        )
        .join(''),
    )
    .join('');
  const disabled = state.pending ? ' disabled' : '';
  return (
    `<form id="attempt-form">` +
    `<select name="target" required>${options}</select>` +
    `<input name="score" type="number" step="any" min="0" placeholder="score" required />` +
    `<button type="submit"${disabled}>submit attempt</button>` +
    `</form>`
  );
}

export function renderInstructorPanel(state: ViewState): string {
  const disabled = state.pending ? ' disabled' : '';
  const revokable = Object.entries(state.milestones)
    .filter(([, entry]) => entry.status === 'Passed')
    .map(([id]) => `<option value="${id}">${id}</option>`)
    .join('');
  return (
    `<section class="instructor">` +
    `<form id="upload-form">` +
    `<textarea name="curriculum" placeholder="paste curriculum/1 JSON"></textarea>` +
    `<select name="mode"><option value="">course default</option>` +
    `<option value="locked">locked</option><option value="open">open</option></select>` +
    `<button type="submit"${disabled}>upload curriculum</button>` +
    `</form>` +
    `<form id="revoke-form">` +
    `<select name="milestone">${revokable}</select>` +
    `<input name="reason" placeholder="reason" required />` +
    `<button type="submit"${disabled}>revoke pass</button>` +
    `</form>` +
    `</section>`
  );
}
