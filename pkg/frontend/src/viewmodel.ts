// UI-local state layered over the latest server responses. The invariant:
// nothing correctness-shaped is ever derived or cached here — this object
// holds exactly what the API sent plus widget state (active tab, drafts,
// open modal). If the policy withheld a field, it simply is not here.

import type {
  ActionOutcome,
  ActiveView,
  AnswerFeedback,
  PendingQuestion,
  PlayState,
  Report,
} from "./types.js";

export type LearnerTab = "problem" | "actions" | "diagnosis";

export class ViewModel {
  state: PlayState | null = null;
  tab: LearnerTab = "problem";
  modal: PendingQuestion | null = null;
  modalChoices = new Set<string>();
  reveal: ActionOutcome | null = null;
  lastFeedback: AnswerFeedback | null = null;
  lastHint: string | null = null;
  toast: string | null = null;
  report: Report | null = null;

  // diagnosis drafts, keyed by slot id
  slotChosen = new Map<string, Set<string>>();
  slotFree = new Map<string, string>();

  // notebook drafts
  noteTarget = "";
  markLine = new Map<number, { sign: "+" | "-"; note: string; ref: string }>();

  // card id -> display name, remembered from views already shown to the
  // learner (used to label report rows)
  cardNames = new Map<string, string>();

  applyState(state: PlayState): void {
    this.state = state;
    if (state.active) this.rememberNames(state.active);
  }

  applyActiveView(view: ActiveView): void {
    if (this.state) this.state.active = view;
    this.rememberNames(view);
  }

  private rememberNames(view: ActiveView): void {
    for (const card of view.cards) this.cardNames.set(card.id, card.name);
  }

  cardName(cardId: string): string {
    return this.cardNames.get(cardId) ?? cardId;
  }

  chosenFor(slotId: string): Set<string> {
    let set = this.slotChosen.get(slotId);
    if (!set) {
      set = new Set();
      this.slotChosen.set(slotId, set);
    }
    return set;
  }

  resetCaseLocal(): void {
    this.tab = "problem";
    this.modal = null;
    this.modalChoices.clear();
    this.reveal = null;
    this.lastFeedback = null;
    this.lastHint = null;
    this.slotChosen.clear();
    this.slotFree.clear();
    this.noteTarget = "";
    this.markLine.clear();
  }
}
