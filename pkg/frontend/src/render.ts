/**
 * HTML rendering as pure functions of the derived SessionView, so the view
 * layer is testable without a browser. `main.ts` mounts the output.
 *
 * Gap-first layout: when a run is inconclusive, the gap cards render before
 * any reasoning text — the deferral signal is the product.
 */

import type { ChecklistRow, RunSummary, SessionView } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const BADGE_CLASSES: Record<string, string> = {
  Satisfied: "badge badge-satisfied",
  CriticalGap: "badge badge-gap",
  NotRelevant: "badge badge-neutral",
};

export function renderChecklistRow(row: ChecklistRow): string {
  const badge = `<span class="${BADGE_CLASSES[row.badge]}">${row.badge}</span>`;
  const override = row.overridden
    ? `<span class="badge badge-override" title="${escapeHtml(row.overrideReason)}">Overridden</span>`
    : "";
  const quote = row.supportingQuote
    ? `<blockquote>${escapeHtml(row.supportingQuote)}</blockquote>`
    : "";
  return [
    `<li class="checklist-row" data-item-id="${escapeHtml(row.itemId)}">`,
    badge,
    override,
    `<span class="item-text">${escapeHtml(row.text)}</span>`,
    quote,
    `</li>`,
  ].join("");
}

export function renderGapCards(view: SessionView): string {
  const cards = view.gaps
    .map(
      (gap) =>
        `<div class="gap-card" data-item-id="${escapeHtml(gap.item_id)}">` +
        `<p>${escapeHtml(gap.needed_information)}</p>` +
        `<button class="add-fact" data-item-id="${escapeHtml(gap.item_id)}">Add fact</button>` +
        `</div>`,
    )
    .join("");
  return `<section class="gaps"><h2>Missing information (${view.gaps.length})</h2>${cards}</section>`;
}

export function renderDetermination(view: SessionView): string {
  const citations = view.citedPassageIds
    .map(
      (pid) =>
        `<a class="citation" href="/corpus/passages/${encodeURIComponent(pid)}">${escapeHtml(pid)}</a>`,
    )
    .join(" ");
  return (
    `<section class="determination">` +
    `<h2>Determination: ${escapeHtml(view.label)}</h2>` +
    `<p>${escapeHtml(view.reasoning)}</p>` +
    (citations ? `<p class="citations">${citations}</p>` : "") +
    `</section>`
  );
}

export function renderHistory(history: RunSummary[]): string {
  const items = history
    .map(
      (run) =>
        `<li class="run" data-trace-id="${escapeHtml(run.traceId)}">` +
        `Run ${run.index + 1}: ${escapeHtml(run.label)}` +
        (run.isInconclusive ? ` (${run.gapCount} gap${run.gapCount === 1 ? "" : "s"})` : "") +
        `</li>`,
    )
    .join("");
  return `<section class="history"><h2>Run history</h2><ol>${items}</ol></section>`;
}

export function renderSession(view: SessionView, runInProgress: boolean): string {
  const checklist = view.checklist.length
    ? `<section class="checklist"><h2>Checklist</h2><ul>${view.checklist
        .map(renderChecklistRow)
        .join("")}</ul></section>`
    : "";
  // Inconclusive renders the gaps before anything else.
  const result = view.isInconclusive
    ? renderGapCards(view) + checklist
    : renderDetermination(view) + checklist;
  const runButton = `<button class="run" ${runInProgress ? "disabled" : ""}>Run pipeline</button>`;
  return (
    `<article class="session" data-session-id="${escapeHtml(view.sessionId)}">` +
    `<pre class="narrative">${escapeHtml(view.narrative)}</pre>` +
    runButton +
    (view.history.length ? result + renderHistory(view.history) : "") +
    `</article>`
  );
}
