// Shared plumbing for the UI tests: a server-backed app bootstrapper and
// small DOM-driving utilities.

import { inject } from "vitest";
import { ApiClient } from "../src/api.js";
import { createApp } from "../src/main.js";
import type { SessionConfigBody } from "../src/types.js";
import { nodeFetch } from "./node-fetch.js";

export function serverApi(): ApiClient {
  // node-http transport: happy-dom's fetch would same-origin-block the
  // cross-port calls to the test server
  return new ApiClient(inject("baseUrl"), nodeFetch);
}

export async function makeSession(overrides: Partial<SessionConfigBody> = {}) {
  const api = serverApi();
  return api.createSession({
    case_selection: "fixed_order",
    case_ids: [inject("medicalCaseId")],
    feedback: { answers: "immediate", scores: "immediate" },
    score_publishing: "by_student",
    allow_free_answers: false,
    seed: null,
    ...overrides,
  });
}

let uniqueCounter = 0;

export function uniqueName(prefix: string): string {
  uniqueCounter += 1;
  return `${prefix} ${Date.now() % 100_000} ${uniqueCounter}`;
}

export async function bootLearner(sessionId: string, joinCode: string, name: string, group: string | null = null) {
  const api = serverApi();
  const joined = await api.join(sessionId, joinCode, name, group);
  api.token = joined.token;
  window.sessionStorage.clear();
  window.__casegenTest = true;
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  window.location.hash = "#/play";
  const app = createApp(root, api);
  await app.refreshPlay();
  return { api, app, root };
}

export function bootTeacher() {
  const api = serverApi();
  window.sessionStorage.clear();
  window.__casegenTest = true;
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  window.location.hash = "#/teacher";
  const app = createApp(root, api);
  return { api, app, root };
}

export async function until(
  predicate: () => boolean,
  what = "condition",
  timeoutMs = 10_000
): Promise<void> {
  const start = Date.now();
  while (Date.now() - start < timeoutMs) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

export function click(selector: string): void {
  const node = document.querySelector<HTMLElement>(selector);
  if (!node) throw new Error(`nothing matches ${selector}`);
  node.click();
}

export function setInput(selector: string, value: string): void {
  const node = document.querySelector<HTMLInputElement>(selector);
  if (!node) throw new Error(`nothing matches ${selector}`);
  node.value = value;
  node.dispatchEvent(new Event("input", { bubbles: true }));
}

export function setSelect(selector: string, value: string): void {
  const node = document.querySelector<HTMLSelectElement>(selector);
  if (!node) throw new Error(`nothing matches ${selector}`);
  node.value = value;
  node.dispatchEvent(new Event("change", { bubbles: true }));
}

export function checkOption(container: string, value: string): void {
  const node = document.querySelector<HTMLInputElement>(
    `${container} input[value="${value}"]`
  );
  if (!node) throw new Error(`no option ${value} under ${container}`);
  node.click();
}

export function bodyHtml(): string {
  return document.body.innerHTML;
}
