// DOM-level non-leakage: with answers shown only at the end, nothing in the
// rendered document may reveal which choices are right — no explanation
// text, no correctness wording, and every choice of a question appears
// exactly as often as its siblings (a leaked answer key would skew that).

import { describe, expect, it } from "vitest";
import {
  bootLearner,
  checkOption,
  click,
  makeSession,
  uniqueName,
  until,
} from "./helpers.js";

const ECG_CHOICES = {
  c1: "ST-segment elevation in the anterior leads",
  c2: "A normal sinus rhythm",
  c3: "Atrial fibrillation without ST changes",
};
const EXPLANATION_FRAGMENT = "Anterior ST-segment elevation";

function occurrences(haystack: string, needle: string): number {
  let count = 0;
  let index = haystack.indexOf(needle);
  while (index !== -1) {
    count += 1;
    index = haystack.indexOf(needle, index + needle.length);
  }
  return count;
}

function assertNoCorrectnessInDom(): void {
  const html = document.body.innerHTML;
  const text = document.body.textContent ?? "";
  expect(html).not.toContain(EXPLANATION_FRAGMENT);
  expect(text).not.toContain("Right choice");
  expect(text).not.toContain("Not the right choice");
  // choice balance: the answer key would make some choice text or id appear
  // more often than its siblings
  const textCounts = Object.values(ECG_CHOICES).map((choiceText) =>
    occurrences(html, choiceText)
  );
  expect(new Set(textCounts).size).toBe(1);
  const idCounts = Object.keys(ECG_CHOICES).map((choiceId) =>
    occurrences(html, `value="${choiceId}"`)
  );
  expect(new Set(idCounts).size).toBe(1);
  // no DOM node carries a correctness marker
  expect(document.querySelector("[data-correct]")).toBeNull();
  expect(document.querySelector(".explain")).toBeNull();
}

describe("end-of-case feedback keeps the DOM clean", () => {
  it("never shows correctness data before the diagnosis", async () => {
    const session = await makeSession({
      feedback: { answers: "end", scores: "end" },
    });
    await bootLearner(session.session_id, session.join_code, uniqueName("Sealed"));
    await until(() => !!document.querySelector(".learner"), "learner screen");
    assertNoCorrectnessInDom();

    click('[data-tab="actions"]');
    await until(() => !!document.querySelector(".card-grid"), "card grid");
    click('[data-card="check_vitals"]');
    await until(
      () => document.querySelectorAll(".directory-entry").length === 1,
      "entry"
    );
    assertNoCorrectnessInDom();

    // open the question: the learner sees the choices, nothing more
    click('[data-card="record_ecg"]');
    await until(
      () => !!document.querySelector('[data-question="record_ecg"]'),
      "modal"
    );
    assertNoCorrectnessInDom();

    // answer (deliberately wrong): only a neutral acknowledgement may render
    checkOption('[data-question="record_ecg"]', "c2");
    click(".modal .primary");
    await until(
      () => !!document.querySelector('[data-feedback="record_ecg"]'),
      "acknowledgement"
    );
    expect(
      document.querySelector('[data-feedback="record_ecg"]')!.textContent
    ).toContain("Answer recorded");
    assertNoCorrectnessInDom();

    // scores are end-of-case too: no item values anywhere pre-diagnosis
    expect(document.querySelector(".items-strip")).toBeNull();

    // after the diagnosis the same document may finally show the review
    click('[data-tab="diagnosis"]');
    await until(() => !!document.querySelector(".diagnosis-panel"), "final form");
    checkOption('[data-slot="pathology"]', "mi");
    click(".validate");
    await until(() => !!document.querySelector(".report"), "report");
    expect(document.querySelector(".report")!.textContent).toContain(
      "Analysis questions missed"
    );
  });
});
