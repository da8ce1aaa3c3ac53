/**
 * Display-state derivation: everything shown in the workbench is computed
 * purely from service responses (session + trace JSON). No adjudication
 * logic lives here — badges are a one-to-one reading of the trace.
 */

import type {
  AssessmentEntry,
  ChecklistItem,
  Gap,
  Override,
  RunEntry,
  Session,
  Trace,
} from "./api.js";

export type Badge = "Satisfied" | "CriticalGap" | "NotRelevant";

export interface ChecklistRow {
  itemId: string;
  category: string;
  text: string;
  badge: Badge;
  supportingQuote: string;
  rationale: string;
  overridden: boolean;
  overrideReason: string;
}

export interface RunSummary {
  index: number;
  traceId: string;
  label: string;
  gapCount: number;
  isInconclusive: boolean;
}

export interface SessionView {
  sessionId: string;
  narrative: string;
  facts: string[];
  checklist: ChecklistRow[];
  gaps: Gap[];
  /** Gap-first layout: when deferred, gaps render before any reasoning. */
  isInconclusive: boolean;
  label: string;
  reasoning: string;
  missingInformation: string[];
  citedPassageIds: string[];
  history: RunSummary[];
}

export function badgeFor(assessment: AssessmentEntry): Badge {
  if (assessment.status === "satisfied") return "Satisfied";
  return assessment.criticality === "critical_gap" ? "CriticalGap" : "NotRelevant";
}

interface ParsedStages {
  checklist: ChecklistItem[];
  finals: AssessmentEntry[];
}

/**
 * Pull the checklist and the final assessments out of a trace's stage
 * records, whichever pipeline mode produced them (separate or merged
 * stages). Later stages win: the supervisor's final view is authoritative.
 */
export function extractStages(trace: Trace): ParsedStages {
  let checklist: ChecklistItem[] = [];
  let finals: AssessmentEntry[] = [];
  for (const record of trace.stage_records) {
    const parsed = record.parsed as Record<string, unknown> | null;
    if (!parsed) continue;
    const direct = parsed["items"];
    if (Array.isArray(direct)) checklist = direct as ChecklistItem[];
    const nested = parsed["checklist"] as { items?: unknown } | undefined;
    if (nested && Array.isArray(nested.items)) {
      checklist = nested.items as ChecklistItem[];
    }
    const assessments = parsed["assessments"];
    if (Array.isArray(assessments)) finals = assessments as AssessmentEntry[];
    const supervisorish = [parsed, parsed["supervisor"] as Record<string, unknown> | undefined];
    for (const obj of supervisorish) {
      const fa = obj?.["final_assessments"];
      if (Array.isArray(fa)) finals = fa as AssessmentEntry[];
    }
  }
  return { checklist, finals };
}

export function checklistRows(trace: Trace): ChecklistRow[] {
  const { checklist, finals } = extractStages(trace);
  const byId = new Map<string, AssessmentEntry>();
  for (const a of finals) byId.set(a.item_id, a);
  const overrides = new Map<string, Override>();
  for (const o of trace.overrides ?? []) overrides.set(o.item_id, o);
  return checklist.map((item) => {
    const assessment = byId.get(item.item_id);
    const override = overrides.get(item.item_id);
    return {
      itemId: item.item_id,
      category: item.category,
      text: item.text,
      badge: assessment ? badgeFor(assessment) : "CriticalGap",
      supportingQuote: assessment?.supporting_quote ?? "",
      rationale: assessment?.rationale ?? "",
      overridden: override !== undefined,
      overrideReason: override?.reason ?? "",
    };
  });
}

/** Passage ids cited in a determination's reasoning text. */
export function citedPassages(reasoning: string, passageIds: string[]): string[] {
  return passageIds.filter((pid) => reasoning.includes(pid));
}

export function runSummaries(runs: RunEntry[]): RunSummary[] {
  return runs.map((run, index) => ({
    index,
    traceId: run.trace_id,
    label: run.determination.label,
    gapCount: run.gap_set?.gaps.length ?? 0,
    isInconclusive: run.determination.label === "inconclusive",
  }));
}

export function deriveSessionView(session: Session, lastTrace: Trace | null): SessionView {
  const last = session.runs.length > 0 ? session.runs[session.runs.length - 1] : undefined;
  const determination = last?.determination;
  const passageIds = (lastTrace?.passages ?? []).map((p) => p.id);
  return {
    sessionId: session.session_id,
    narrative: session.narrative,
    facts: session.facts,
    checklist: lastTrace ? checklistRows(lastTrace) : [],
    gaps: last?.gap_set?.gaps ?? [],
    isInconclusive: determination?.label === "inconclusive",
    label: determination?.label ?? "",
    reasoning: determination?.reasoning ?? "",
    missingInformation: determination?.missing_information ?? [],
    citedPassageIds: determination ? citedPassages(determination.reasoning, passageIds) : [],
    history: runSummaries(session.runs),
  };
}

/** Client-side gate for the entry form: never send an empty narrative. */
export function validateNarrative(narrative: string): string | null {
  return narrative.trim().length === 0 ? "Enter a case narrative first." : null;
}

/** Client-side gate for the add-fact affordance. */
export function validateFact(text: string): string | null {
  return text.trim().length === 0 ? "Enter the newly gathered fact first." : null;
}
