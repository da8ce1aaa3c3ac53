/**
 * Typed client for the adjudicator HTTP service.
 *
 * The workbench is a pure client: every piece of adjudication state comes
 * from these endpoints and nothing is computed locally. The fetch function
 * is injectable so tests can run without a network.
 */

export type QuestionType = "eligibility" | "direct";

export interface RunEntry {
  trace_id: string;
  narrative: string;
  determination: Determination;
  gap_set: GapSet | null;
  overrides: Override[];
}

export interface Session {
  schema_version: number;
  session_id: string;
  narrative: string;
  question_type: QuestionType;
  facts: string[];
  runs: RunEntry[];
}

export interface Determination {
  label: string;
  reasoning: string;
  missing_information: string[];
  trace_id: string;
}

export interface Gap {
  item_id: string;
  requirement_text: string;
  needed_information: string;
}

export interface GapSet {
  gaps: Gap[];
}

export interface Override {
  item_id: string;
  old: string;
  new: string;
  reason: string;
}

export interface AssessmentEntry {
  item_id: string;
  status: "satisfied" | "unaddressed";
  supporting_quote?: string;
  criticality?: "critical_gap" | "not_relevant";
  rationale?: string;
  accounts_conflict?: boolean;
}

export interface ChecklistItem {
  item_id: string;
  category: string;
  text: string;
  statute_citation?: string;
  case_name?: string;
  principle?: string;
}

export interface StageRecord {
  stage: string;
  raw_text: string;
  parsed: Record<string, unknown> | null;
}

export interface Trace {
  trace_id: string;
  case_id: string;
  mode: string;
  stage_records: StageRecord[];
  overrides: Override[];
  gap_set: GapSet | null;
  determination: Determination | null;
  passages: Passage[];
}

export interface Passage {
  id: string;
  kind: string;
  citation: string;
  title: string;
  text: string;
  source_doc: string;
}

export interface ApiProblem {
  code: string;
  message: string;
}

/** Error carrying the service's problem-detail body. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, method = "GET", body?: unknown): Promise<T> {
    const init: { method: string; headers?: Record<string, string>; body?: string } = {
      method,
    };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const payload = (await resp.json()) as Record<string, unknown>;
    if (resp.status >= 400) {
      const problem = payload as unknown as Partial<ApiProblem>;
      throw new ApiError(
        resp.status,
        problem.code ?? "unknown_error",
        problem.message ?? `request failed with status ${resp.status}`,
      );
    }
    return payload as T;
  }

  createSession(narrative: string, questionType: QuestionType = "eligibility"): Promise<Session> {
    return this.request<Session>("/sessions", "POST", {
      narrative,
      question_type: questionType,
    });
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request<Session>(`/sessions/${sessionId}`);
  }

  addFact(sessionId: string, text: string): Promise<Session> {
    return this.request<Session>(`/sessions/${sessionId}/facts`, "POST", { text });
  }

  run(sessionId: string): Promise<RunEntry> {
    return this.request<RunEntry>(`/sessions/${sessionId}/run`, "POST");
  }

  getTrace(traceId: string): Promise<Trace> {
    return this.request<Trace>(`/traces/${traceId}`);
  }

  getPassage(passageId: string): Promise<Passage> {
    return this.request<Passage>(`/corpus/passages/${passageId}`);
  }
}
