/**
 * Display-state derivation tests against a snapshot of a real pipeline
 * trace shape: every badge corresponds one-to-one to an assessment in the
 * trace, gaps render first when deferred, and history mirrors the runs.
 */

import { describe, expect, it } from "vitest";
import type { RunEntry, Session, Trace } from "../src/api.js";
import { renderGapCards, renderHistory, renderSession } from "../src/render.js";
import {
  badgeFor,
  checklistRows,
  citedPassages,
  deriveSessionView,
  runSummaries,
  validateFact,
  validateNarrative,
} from "../src/state.js";

const CHECKLIST = {
  items: [
    {
      item_id: "s-r1",
      category: "required_element",
      text: "The claimant used a controlled substance during working hours.",
      statute_citation: "C.R.S. 1-2-3",
    },
    {
      item_id: "s-r2",
      category: "required_element",
      text: "The employer maintained a written policy.",
      statute_citation: "C.R.S. 1-2-3",
    },
    { item_id: "c-1", category: "consideration", text: "Consider prior warnings." },
  ],
  source_passage_ids: ["s"],
};

const FINALS = [
  {
    item_id: "s-r1",
    status: "satisfied" as const,
    supporting_quote: "He used a controlled substance during working hours.",
    rationale: "stated directly",
  },
  {
    item_id: "s-r2",
    status: "unaddressed" as const,
    criticality: "critical_gap" as const,
    rationale: "no stated fact",
  },
  {
    item_id: "c-1",
    status: "unaddressed" as const,
    criticality: "not_relevant" as const,
    rationale: "not implicated",
  },
];

function makeTrace(): Trace {
  return {
    trace_id: "case-full-abc123",
    case_id: "case",
    mode: "full",
    stage_records: [
      { stage: "extract", raw_text: "", parsed: CHECKLIST as never },
      {
        stage: "verify",
        raw_text: "",
        parsed: { assessments: FINALS } as never,
      },
      {
        stage: "supervise",
        raw_text: "",
        parsed: {
          final_assessments: FINALS,
          overrides: [
            { item_id: "s-r2", old: "satisfied", new: "unaddressed", reason: "quote too weak" },
          ],
          recommendation: "abstain",
        } as never,
      },
    ],
    overrides: [
      { item_id: "s-r2", old: "satisfied", new: "unaddressed", reason: "quote too weak" },
    ],
    gap_set: {
      gaps: [
        {
          item_id: "s-r2",
          requirement_text: "The employer maintained a written policy.",
          needed_information:
            "Provide facts establishing: The employer maintained a written policy.",
        },
      ],
    },
    determination: null,
    passages: [
      { id: "s", kind: "statute", citation: "C.R.S. 1-2-3", title: "t", text: "x", source_doc: "g" },
    ],
  };
}

function makeRun(label: string, gapCount: number, traceId: string): RunEntry {
  return {
    trace_id: traceId,
    narrative: "n",
    determination: {
      label,
      reasoning: label === "inconclusive" ? "deferred" : "per passage s",
      missing_information: [],
      trace_id: traceId,
    },
    gap_set: {
      gaps: Array.from({ length: gapCount }, (_, i) => ({
        item_id: `g${i}`,
        requirement_text: "r",
        needed_information: "Provide facts establishing: r",
      })),
    },
    overrides: [],
  };
}

function makeSession(runs: RunEntry[]): Session {
  return {
    schema_version: 1,
    session_id: "sess1",
    narrative: "He was discharged. Is he eligible?",
    question_type: "eligibility",
    facts: [],
    runs,
  };
}

describe("badge derivation", () => {
  it("maps each assessment state to its badge", () => {
    expect(badgeFor(FINALS[0]!)).toBe("Satisfied");
    expect(badgeFor(FINALS[1]!)).toBe("CriticalGap");
    expect(badgeFor(FINALS[2]!)).toBe("NotRelevant");
  });

  it("produces one row per checklist item, one-to-one with assessments", () => {
    const rows = checklistRows(makeTrace());
    expect(rows.map((r) => r.itemId)).toEqual(["s-r1", "s-r2", "c-1"]);
    expect(rows.map((r) => r.badge)).toEqual(["Satisfied", "CriticalGap", "NotRelevant"]);
  });

  it("marks overridden rows with the supervisor's reason", () => {
    const rows = checklistRows(makeTrace());
    expect(rows[1]!.overridden).toBe(true);
    expect(rows[1]!.overrideReason).toBe("quote too weak");
    expect(rows[0]!.overridden).toBe(false);
  });

  it("reads merged-stage traces too", () => {
    const trace = makeTrace();
    trace.stage_records = [
      {
        stage: "single",
        raw_text: "",
        parsed: {
          checklist: CHECKLIST,
          supervisor: { final_assessments: FINALS, overrides: [], recommendation: "abstain" },
        } as never,
      },
    ];
    const rows = checklistRows(trace);
    expect(rows.map((r) => r.badge)).toEqual(["Satisfied", "CriticalGap", "NotRelevant"]);
  });
});

describe("session view", () => {
  it("is gap-first when the last run deferred", () => {
    const session = makeSession([makeRun("inconclusive", 1, "t1")]);
    const view = deriveSessionView(session, makeTrace());
    expect(view.isInconclusive).toBe(true);
    expect(view.gaps).toHaveLength(1);
    const html = renderSession(view, false);
    expect(html.indexOf("Missing information")).toBeGreaterThan(-1);
    expect(html.indexOf("Missing information")).toBeLessThan(html.indexOf("Checklist"));
  });

  it("renders a determination with citation links when decided", () => {
    const session = makeSession([makeRun("ineligible", 0, "t2")]);
    const view = deriveSessionView(session, makeTrace());
    expect(view.isInconclusive).toBe(false);
    expect(view.citedPassageIds).toEqual(["s"]);
    const html = renderSession(view, false);
    expect(html).toContain("Determination: ineligible");
    expect(html).toContain('href="/corpus/passages/s"');
  });

  it("offers one add-fact affordance per gap", () => {
    const session = makeSession([makeRun("inconclusive", 3, "t3")]);
    const view = deriveSessionView(session, null);
    const html = renderGapCards(view);
    expect(html.match(/class="add-fact"/g)).toHaveLength(3);
  });

  it("keeps the run history in order", () => {
    const runs = [
      makeRun("inconclusive", 2, "t1"),
      makeRun("inconclusive", 1, "t2"),
      makeRun("ineligible", 0, "t3"),
    ];
    const summaries = runSummaries(runs);
    expect(summaries.map((s) => s.label)).toEqual(["inconclusive", "inconclusive", "ineligible"]);
    expect(summaries.map((s) => s.gapCount)).toEqual([2, 1, 0]);
    const html = renderHistory(summaries);
    expect(html.indexOf("Run 1")).toBeLessThan(html.indexOf("Run 3"));
  });

  it("disables the run control while a run is pending", () => {
    const session = makeSession([]);
    const html = renderSession(deriveSessionView(session, null), true);
    expect(html).toContain("disabled");
  });

  it("escapes narrative text", () => {
    const session = makeSession([]);
    session.narrative = "<script>alert(1)</script>";
    const html = renderSession(deriveSessionView(session, null), false);
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("client-side validation", () => {
  it("blocks empty narratives before any request", () => {
    expect(validateNarrative("  ")).not.toBeNull();
    expect(validateNarrative("She quit. Is she eligible?")).toBeNull();
  });

  it("blocks empty facts", () => {
    expect(validateFact("\n")).not.toBeNull();
    expect(validateFact("The policy was written.")).toBeNull();
  });
});

describe("citations", () => {
  it("only cites passages that appear in the reasoning", () => {
    expect(citedPassages("Every element of X (passage p1) holds.", ["p1", "p2"])).toEqual(["p1"]);
  });
});
