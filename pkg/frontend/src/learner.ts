// Learner screen: tabs for the problem / action cards / final answer form,
// the evidence repository on the right, the notebook along the bottom, a
// modal for analysis questions, and the end-of-case report. Every label for
// a domain concept comes from the case's label set — nothing here hardcodes
// what "Diagnosis" or the repository are called.

import type { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import type {
  ActiveView,
  DiagnoseSlots,
  MediaRef,
  Report,
} from "./types.js";
import type { LearnerTab, ViewModel } from "./viewmodel.js";

export type LearnerController = {
  vm: ViewModel;
  api: ApiClient;
  rerender: () => void;
};

function mediaNodes(
  api: ApiClient,
  storageId: string,
  media: MediaRef[]
): HTMLElement[] {
  return media.map((ref) => {
    if (ref.kind === "image") {
      return el("figure", { class: "media" },
        el("img", { src: api.mediaUrl(storageId, ref.path), alt: ref.caption ?? ref.path }),
        ref.caption ? el("figcaption", {}, ref.caption) : null
      );
    }
    if (ref.kind === "web_link") {
      return el("p", { class: "media" },
        el("a", { href: ref.path, target: "_blank", rel: "noreferrer" }, ref.caption ?? ref.path)
      );
    }
    const tag = ref.kind === "video" ? "video" : "audio";
    return el("p", { class: "media" },
      el(tag as "video", { src: api.mediaUrl(storageId, ref.path), controls: true })
    );
  });
}

async function guard(ctl: LearnerController, fn: () => Promise<void>) {
  try {
    await fn();
    ctl.vm.toast = null;
  } catch (error) {
    // rule violations (409s) and the like surface as non-destructive toasts
    ctl.vm.toast = error instanceof Error ? error.message : String(error);
  }
  ctl.rerender();
}

function doPerform(ctl: LearnerController, cardId: string) {
  void guard(ctl, async () => {
    const result = await ctl.api.perform(cardId);
    ctl.vm.applyActiveView(result.view);
    ctl.vm.reveal = result.outcome;
    ctl.vm.lastFeedback = null;
    if (result.outcome.question) {
      ctl.vm.modal = result.outcome.question;
      ctl.vm.modalChoices.clear();
    }
  });
}

function doAnswer(ctl: LearnerController) {
  const modal = ctl.vm.modal;
  if (!modal) return;
  const choices = [...ctl.vm.modalChoices];
  void guard(ctl, async () => {
    const result = await ctl.api.answer(modal.card_id, choices);
    ctl.vm.applyActiveView(result.view);
    ctl.vm.lastFeedback = result.feedback;
    ctl.vm.modal = null;
    ctl.vm.modalChoices.clear();
  });
}

function doHint(ctl: LearnerController) {
  void guard(ctl, async () => {
    const result = await ctl.api.hint();
    ctl.vm.applyActiveView(result.view);
    ctl.vm.lastHint = result.hint;
  });
}

function doDiagnose(ctl: LearnerController, view: ActiveView) {
  const slots: DiagnoseSlots = {};
  for (const slot of view.diagnosis_form) {
    const chosen = [...(ctl.vm.slotChosen.get(slot.slot_id) ?? [])];
    const free = (ctl.vm.slotFree.get(slot.slot_id) ?? "").trim();
    slots[slot.slot_id] = {
      chosen,
      free_texts: free ? [free] : [],
    };
  }
  void guard(ctl, async () => {
    const result = await ctl.api.diagnose(slots);
    ctl.vm.report = result.report;
    ctl.vm.applyState(result.view);
    ctl.vm.modal = null;
  });
}

function doNotebookAdd(ctl: LearnerController) {
  const target = ctl.vm.noteTarget.trim();
  if (!target) return;
  void guard(ctl, async () => {
    const result = await ctl.api.notebook([{ op: "add_line", target }]);
    ctl.vm.applyActiveView(result.view);
    ctl.vm.noteTarget = "";
  });
}

function doNotebookMark(ctl: LearnerController, line: number) {
  const draft = ctl.vm.markLine.get(line);
  if (!draft || !draft.note.trim()) return;
  const ref = draft.ref.trim();
  void guard(ctl, async () => {
    const result = await ctl.api.notebook([
      {
        op: "add_mark",
        line,
        sign: draft.sign,
        note: draft.note.trim(),
        directory_ref: ref === "" ? null : Number(ref),
      },
    ]);
    ctl.vm.applyActiveView(result.view);
    ctl.vm.markLine.delete(line);
  });
}

function doNotebookRemove(ctl: LearnerController, index: number) {
  void guard(ctl, async () => {
    const result = await ctl.api.notebook([{ op: "remove_line", index }]);
    ctl.vm.applyActiveView(result.view);
  });
}

function doPick(ctl: LearnerController, caseId: string) {
  void guard(ctl, async () => {
    const state = await ctl.api.pick(caseId);
    ctl.vm.resetCaseLocal();
    ctl.vm.applyState(state);
  });
}

function doHideScore(ctl: LearnerController, hide: boolean) {
  void guard(ctl, async () => {
    await ctl.api.setScoreVisibility(hide);
    const state = await ctl.api.state();
    ctl.vm.applyState(state);
  });
}

// ---------------------------------------------------------------- sections

function tabBar(ctl: LearnerController, view: ActiveView): HTMLElement {
  const tabs: [LearnerTab, string][] = [
    ["problem", view.labels.problem],
    ["actions", "Actions"],
    ["diagnosis", view.labels.diagnosis],
  ];
  return el("nav", { class: "tabs", role: "tablist" },
    ...tabs.map(([key, label]) =>
      el("button", {
        class: ctl.vm.tab === key ? "tab active" : "tab",
        role: "tab",
        "data-tab": key,
        onclick: () => {
          ctl.vm.tab = key;
          ctl.rerender();
        },
      }, label)
    )
  );
}

function problemPanel(ctl: LearnerController, view: ActiveView): HTMLElement {
  return el("section", { class: "panel problem-panel" },
    el("h2", {}, view.labels.problem),
    el("p", { class: "problem-text" }, view.problem.text),
    ...mediaNodes(ctl.api, view.storage_id, view.problem.media)
  );
}

function actionsPanel(ctl: LearnerController, view: ActiveView): HTMLElement {
  const groups = new Map<string, typeof view.cards>();
  for (const card of view.cards) {
    const key = card.category ?? "";
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(card);
  }
  const sections: HTMLElement[] = [];
  for (const [category, cards] of groups) {
    sections.push(
      el("div", { class: "card-group" },
        category ? el("h3", {}, category) : null,
        el("div", { class: "card-grid" },
          ...cards.map((card) => {
            const pending = view.pending_questions.find(
              (q) => q.card_id === card.id
            );
            const clickable = card.state === "visible" && !card.performed;
            return el("button", {
              class: [
                "card-tile",
                card.state === "disabled" ? "disabled" : "",
                card.performed ? "performed" : "",
              ].join(" ").trim(),
              "data-card": card.id,
              disabled: !clickable && !pending,
              onclick: () => {
                if (pending) {
                  ctl.vm.modal = pending;
                  ctl.vm.modalChoices.clear();
                  ctl.rerender();
                } else if (clickable) {
                  doPerform(ctl, card.id);
                }
              },
            },
              el("span", { class: "card-name" }, card.name),
              card.performed ? el("span", { class: "badge" }, pending ? "?" : "✓") : null
            );
          })
        )
      )
    );
  }
  const children: (HTMLElement | null)[] = sections;
  if (ctl.vm.reveal) {
    children.push(
      el("section", { class: "reveal", "data-reveal": ctl.vm.reveal.card_id },
        el("h3", {}, ctl.vm.cardName(ctl.vm.reveal.card_id)),
        el("p", {}, ctl.vm.reveal.text),
        ...mediaNodes(ctl.api, view.storage_id, ctl.vm.reveal.media)
      )
    );
  }
  if (ctl.vm.lastFeedback) {
    const fb = ctl.vm.lastFeedback;
    children.push(
      el("section", { class: "feedback", "data-feedback": fb.card_id },
        fb.correct === undefined
          ? el("p", {}, "Answer recorded.")
          : el("div", {},
              el("p", {}, fb.correct ? "Right choice." : "Not the right choice."),
              fb.explanation ? el("p", { class: "explain" }, fb.explanation) : null
            )
      )
    );
  }
  return el("section", { class: "panel actions-panel" }, ...children);
}

function diagnosisPanel(ctl: LearnerController, view: ActiveView): HTMLElement {
  const fields = view.diagnosis_form.map((slot) => {
    const chosen = ctl.vm.chosenFor(slot.slot_id);
    const inputs = slot.options.map((option) => {
      const type = slot.mode === "single" ? "radio" : "checkbox";
      const input = el("input", {
        type,
        name: `slot-${slot.slot_id}`,
        value: option.id,
        onchange: () => {
          if (slot.mode === "single") chosen.clear();
          if (chosen.has(option.id)) chosen.delete(option.id);
          else chosen.add(option.id);
        },
      });
      if (chosen.has(option.id)) input.setAttribute("checked", "");
      return el("label", { class: "option" }, input, option.text);
    });
    const freeField = slot.allow_free_text
      ? el("input", {
          type: "text",
          class: "free-text",
          placeholder: "Your own answer",
          value: ctl.vm.slotFree.get(slot.slot_id) ?? "",
          oninput: (event: Event) => {
            ctl.vm.slotFree.set(
              slot.slot_id,
              (event.target as HTMLInputElement).value
            );
          },
        })
      : null;
    return el("fieldset", { class: "slot", "data-slot": slot.slot_id },
      el("legend", {}, slot.label),
      ...inputs,
      freeField
    );
  });
  return el("section", { class: "panel diagnosis-panel" },
    el("h2", {}, view.labels.diagnosis),
    ...fields,
    el("button", {
      class: "validate primary",
      onclick: () => doDiagnose(ctl, view),
    }, view.labels.validate)
  );
}

function directoryPanel(ctl: LearnerController, view: ActiveView): HTMLElement {
  return el("aside", { class: "directory" },
    el("h2", {}, view.labels.repository),
    view.directory.length === 0
      ? el("p", { class: "empty" }, "Nothing collected yet.")
      : el("ol", { class: "directory-list" },
          ...view.directory.map((entry, index) =>
            el("li", { class: "directory-entry", "data-entry": String(index) },
              el("strong", {}, ctl.vm.cardName(entry.card_id)),
              el("p", {}, entry.text),
              ...mediaNodes(ctl.api, view.storage_id, entry.media)
            )
          )
        )
  );
}

function notebookPanel(ctl: LearnerController, view: ActiveView): HTMLElement {
  const lines = view.notebook.map((line, index) => {
    const draft = ctl.vm.markLine.get(index) ?? { sign: "+" as const, note: "", ref: "" };
    return el("li", { class: "note-line", "data-line": String(index) },
      el("span", { class: "note-target" }, line.target),
      el("ul", { class: "marks" },
        ...line.marks.map((mark) =>
          el("li", { class: mark.sign === "+" ? "mark plus" : "mark minus" },
            `${mark.sign} ${mark.note}` +
              (mark.directory_ref != null ? ` [#${mark.directory_ref}]` : "")
          )
        )
      ),
      el("span", { class: "note-controls" },
        el("select", {
          onchange: (event: Event) => {
            draft.sign = (event.target as HTMLSelectElement).value as "+" | "-";
            ctl.vm.markLine.set(index, draft);
          },
        },
          el("option", { value: "+", selected: draft.sign === "+" }, "+"),
          el("option", { value: "-", selected: draft.sign === "-" }, "-")
        ),
        el("input", {
          type: "text",
          placeholder: "why",
          value: draft.note,
          oninput: (event: Event) => {
            draft.note = (event.target as HTMLInputElement).value;
            ctl.vm.markLine.set(index, draft);
          },
        }),
        el("input", {
          type: "text",
          class: "ref",
          placeholder: "#",
          value: draft.ref,
          oninput: (event: Event) => {
            draft.ref = (event.target as HTMLInputElement).value;
            ctl.vm.markLine.set(index, draft);
          },
        }),
        el("button", { onclick: () => doNotebookMark(ctl, index) }, "mark"),
        el("button", { onclick: () => doNotebookRemove(ctl, index) }, "remove")
      )
    );
  });
  return el("section", { class: "notebook" },
    el("h2", {}, view.labels.notebook),
    el("ul", { class: "note-lines" }, ...lines),
    el("div", { class: "note-add" },
      el("input", {
        type: "text",
        placeholder: `Add to ${view.labels.notebook}`,
        value: ctl.vm.noteTarget,
        oninput: (event: Event) => {
          ctl.vm.noteTarget = (event.target as HTMLInputElement).value;
        },
      }),
      el("button", { onclick: () => doNotebookAdd(ctl) }, "add")
    )
  );
}

function questionModal(ctl: LearnerController): HTMLElement | null {
  const modal = ctl.vm.modal;
  if (!modal) return null;
  return el("div", { class: "modal-backdrop" },
    el("div", { class: "modal", role: "dialog", "data-question": modal.card_id },
      el("h3", {}, modal.prompt),
      ...modal.choices.map((choice) => {
        const input = el("input", {
          type: "checkbox",
          value: choice.id,
          onchange: () => {
            if (ctl.vm.modalChoices.has(choice.id)) {
              ctl.vm.modalChoices.delete(choice.id);
            } else {
              ctl.vm.modalChoices.add(choice.id);
            }
          },
        });
        if (ctl.vm.modalChoices.has(choice.id)) input.setAttribute("checked", "");
        return el("label", { class: "option" }, input, choice.text);
      }),
      el("div", { class: "modal-buttons" },
        el("button", {
          class: "primary",
          disabled: false,
          onclick: () => doAnswer(ctl),
        }, "Submit"),
        el("button", {
          onclick: () => {
            ctl.vm.modal = null;
            ctl.rerender();
          },
        }, "Later")
      )
    )
  );
}

function itemsStrip(view: ActiveView): HTMLElement | null {
  if (!view.items) return null;
  const entries = Object.entries(view.items);
  if (entries.length === 0) return null;
  return el("div", { class: "items-strip" },
    ...entries.map(([id, item]) =>
      el("span", { class: "item", "data-item": id },
        `${item.display_name}: ${item.value}`
      )
    )
  );
}

export function reportSection(
  report: Report,
  nameOf: (cardId: string) => string
): HTMLElement {
  const lists: HTMLElement[] = [];
  const faultList = (
    title: string,
    rows: string[],
    kind: string
  ): HTMLElement =>
    el("div", { class: "fault-class", "data-fault": kind },
      el("h4", {}, title),
      rows.length === 0
        ? el("p", { class: "empty" }, "none")
        : el("ul", {}, ...rows.map((row) => el("li", {}, row)))
    );
  lists.push(
    faultList(
      "Required actions not done",
      report.missed_required.map(nameOf),
      "missed"
    ),
    faultList(
      "Actions that were not useful",
      report.useless_performed.map(nameOf),
      "useless"
    ),
    faultList(
      "Actions out of order",
      report.order_violations.map(
        ([card, prereq]) => `${nameOf(card)} before ${nameOf(prereq)}`
      ),
      "out-of-order"
    ),
    faultList(
      "Analysis questions missed",
      report.wrong_answers.map(nameOf),
      "wrong-answers"
    )
  );
  const slotRows = report.slots.map((slot) =>
    el("li", { class: "slot-result", "data-slot": slot.slot_id },
      el("strong", {}, slot.slot_id),
      ` — answered: ${slot.chosen.join(", ") || "(nothing)"}; ` +
        `expected: ${slot.correct.join(", ") || "(open)"};` +
        ` right ${slot.hit.length}, missing ${slot.miss.length},` +
        ` extra ${slot.false_positive.length}`
    )
  );
  return el("section", { class: "report", "data-grade": String(report.grade) },
    el("h2", {}, "Case review"),
    el("p", { class: "grade" }, `Grade: ${report.grade}`),
    el("p", {}, `Elapsed: ${Math.round(report.elapsed_seconds)} s`),
    ...lists,
    el("h4", {}, "Final answers"),
    el("ul", {}, ...slotRows),
    report.free_answers_pending.length > 0
      ? el("p", { class: "pending" },
          `Answers awaiting the teacher's review: ` +
            report.free_answers_pending.map(([, text]) => `"${text}"`).join(", ")
        )
      : null
  );
}

export function renderLearner(root: HTMLElement, ctl: LearnerController): void {
  clear(root);
  const vm = ctl.vm;
  const state = vm.state;
  if (!state) {
    root.append(el("p", { class: "loading" }, "Loading…"));
    return;
  }

  if (!state.active) {
    const done = state.completed.map((completed) =>
      el("details", { class: "completed-case", open: true },
        el("summary", {}, `${completed.case_name} — grade ${completed.grade}`),
        reportSection(completed.report, (id) => vm.cardName(id))
      )
    );
    const picker = state.awaiting_pick
      ? el("section", { class: "pick" },
          el("h2", {}, "Choose your next case"),
          ...(state.available_cases ?? []).map((candidate) =>
            el("button", {
              class: "pick-case",
              "data-case": candidate.case_id,
              onclick: () => doPick(ctl, candidate.case_id),
            }, `${candidate.name} — ${candidate.description}`)
          )
        )
      : null;
    root.append(
      el("main", { class: "between-cases" },
        el("header", { class: "topbar" },
          el("span", { class: "who" }, state.display_name),
          hideScoreToggle(ctl, state.hide_score)
        ),
        state.finished ? el("h2", {}, "Session complete") : null,
        picker,
        ...done
      )
    );
    return;
  }

  const view = state.active;
  const body =
    vm.tab === "problem"
      ? problemPanel(ctl, view)
      : vm.tab === "actions"
        ? actionsPanel(ctl, view)
        : diagnosisPanel(ctl, view);

  root.append(
    el("main", { class: "learner" },
      el("header", { class: "topbar" },
        el("span", { class: "case-name" }, view.case_name),
        itemsStrip(view),
        el("span", { class: "spacer" }),
        el("button", {
          class: "help-button",
          disabled: view.hints_remaining <= 0,
          onclick: () => doHint(ctl),
        }, `${view.labels.help} (${view.hints_remaining})`),
        hideScoreToggle(ctl, state.hide_score)
      ),
      vm.lastHint ? el("p", { class: "hint", "data-hint": "" }, vm.lastHint) : null,
      vm.toast ? el("p", { class: "toast", role: "alert" }, vm.toast) : null,
      tabBar(ctl, view),
      el("div", { class: "columns" },
        el("div", { class: "main-column" }, body),
        directoryPanel(ctl, view)
      ),
      notebookPanel(ctl, view),
      questionModal(ctl)
    )
  );
}

function hideScoreToggle(ctl: LearnerController, hide: boolean): HTMLElement {
  const input = el("input", {
    type: "checkbox",
    class: "hide-score",
    onchange: (event: Event) =>
      doHideScore(ctl, (event.target as HTMLInputElement).checked),
  });
  if (hide) input.setAttribute("checked", "");
  return el("label", { class: "hide-score-label" }, input, "hide my score");
}
