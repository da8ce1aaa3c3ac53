/**
 * Browser entry point: wires the form, run button, and add-fact affordances
 * to the API client and re-renders from service responses. All state lives
 * on the server; this file only shuttles it to the DOM.
 */

import { ApiClient, ApiError, type QuestionType, type Session, type Trace } from "./api.js";
import { renderSession } from "./render.js";
import { deriveSessionView, validateFact, validateNarrative } from "./state.js";

const BASE_URL = (window as { ADJUDICATOR_BASE_URL?: string }).ADJUDICATOR_BASE_URL ?? "";

const client = new ApiClient(BASE_URL);

let session: Session | null = null;
let lastTrace: Trace | null = null;
let runInProgress = false;

function el<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

function showError(message: string): void {
  el<HTMLElement>("#error").textContent = message;
}

function rerender(): void {
  if (!session) return;
  el<HTMLElement>("#session").innerHTML = renderSession(
    deriveSessionView(session, lastTrace),
    runInProgress,
  );
  const runButton = document.querySelector<HTMLButtonElement>("#session button.run");
  runButton?.addEventListener("click", () => void runPipeline());
  for (const button of document.querySelectorAll<HTMLButtonElement>("#session button.add-fact")) {
    button.addEventListener("click", () => void addFactPrompt());
  }
}

async function createSession(): Promise<void> {
  const narrative = el<HTMLTextAreaElement>("#narrative").value;
  const problem = validateNarrative(narrative);
  if (problem) {
    showError(problem);
    return;
  }
  const questionType = el<HTMLSelectElement>("#question-type").value as QuestionType;
  try {
    session = await client.createSession(narrative, questionType);
    lastTrace = null;
    showError("");
    rerender();
  } catch (error) {
    showError(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
  }
}

async function runPipeline(): Promise<void> {
  if (!session || runInProgress) return;
  runInProgress = true;
  rerender();
  try {
    const entry = await client.run(session.session_id);
    session = await client.getSession(session.session_id);
    lastTrace = await client.getTrace(entry.trace_id);
    showError("");
  } catch (error) {
    if (error instanceof ApiError && error.code === "run_in_progress") {
      showError("A run is already in progress for this session.");
    } else {
      showError(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
    }
  } finally {
    runInProgress = false;
    rerender();
  }
}

async function addFactPrompt(): Promise<void> {
  if (!session) return;
  const text = window.prompt("Newly gathered fact:") ?? "";
  const problem = validateFact(text);
  if (problem) {
    showError(problem);
    return;
  }
  try {
    session = await client.addFact(session.session_id, text);
    showError("");
    await runPipeline();
  } catch (error) {
    showError(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
  }
}

export function mount(): void {
  el<HTMLButtonElement>("#create-session").addEventListener("click", () => void createSession());
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  mount();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", mount);
}
