// Wire types mirroring the /api/v1 JSON contract. The client renders only
// what the server sends; correctness data simply never arrives unless the
// session policy allows it.

export type MediaRef = {
  kind: "image" | "video" | "sound" | "web_link";
  path: string;
  caption: string | null;
};

export type CardTile = {
  id: string;
  name: string;
  category: string | null;
  state: "visible" | "disabled";
  performed: boolean;
};

export type ChoiceOption = { id: string; text: string };

export type PendingQuestion = {
  card_id: string;
  prompt: string;
  choices: ChoiceOption[];
};

export type DirectoryEntry = {
  card_id: string;
  at: number;
  text: string;
  media: MediaRef[];
};

export type NotebookMark = {
  sign: "+" | "-";
  note: string;
  directory_ref: number | null;
};

export type NotebookLine = { target: string; marks: NotebookMark[] };

export type SlotForm = {
  slot_id: string;
  label: string;
  mode: "single" | "multi";
  options: ChoiceOption[];
  allow_free_text: boolean;
};

export type ItemView = {
  display_name: string;
  value: number;
  unit: string;
  direction: string;
};

export type SlotResult = {
  slot_id: string;
  chosen: string[];
  correct: string[];
  hit: string[];
  miss: string[];
  false_positive: string[];
};

export type Report = {
  case_id: string;
  slots: SlotResult[];
  missed_required: string[];
  useless_performed: string[];
  order_violations: [string, string][];
  wrong_answers: string[];
  free_answers_pending: [string, string][];
  item_finals: Record<string, number>;
  elapsed_seconds: number;
  grade: number;
};

export type ActiveView = {
  storage_id: string;
  case_id: string;
  case_name: string;
  phase: "investigating" | "diagnosed";
  labels: Record<string, string>;
  problem: { text: string; media: MediaRef[] };
  cards: CardTile[];
  pending_questions: PendingQuestion[];
  directory: DirectoryEntry[];
  notebook: NotebookLine[];
  diagnosis_form: SlotForm[];
  hints_remaining: number;
  answered_cards: string[];
  items?: Record<string, ItemView>;
  answer_results?: Record<string, { correct: boolean }>;
  report?: Report;
};

export type CompletedCase = {
  case_id: string;
  case_name: string;
  grade: number;
  report: Report;
};

export type AvailableCase = {
  case_id: string;
  name: string;
  description: string;
};

export type PlayState = {
  session_id: string;
  player_id: string;
  display_name: string;
  group: string | null;
  hide_score: boolean;
  case_selection: "learner_choice" | "random" | "fixed_order";
  completed: CompletedCase[];
  active: ActiveView | null;
  awaiting_pick: boolean;
  available_cases?: AvailableCase[];
  finished: boolean;
};

export type ActionOutcome = {
  card_id: string;
  text: string;
  media: MediaRef[];
  question?: PendingQuestion;
};

export type AnswerFeedback = {
  card_id: string;
  acknowledged: boolean;
  correct?: boolean;
  correct_choice_ids?: string[];
  explanation?: string;
};

export type CaseSummary = {
  case_id: string;
  slug: string;
  name: string;
  created: string;
  author: string;
  difficulty: number;
  field: string;
  description: string;
  suggestions: string;
};

export type SessionConfigBody = {
  case_selection: "learner_choice" | "random" | "fixed_order";
  case_ids: string[];
  feedback: { answers: "immediate" | "end"; scores: "immediate" | "end" };
  score_publishing: "off" | "by_group" | "by_student";
  allow_free_answers: boolean;
  seed?: number | null;
};

export type SessionCreated = {
  session_id: string;
  join_code: string;
  teacher_token: string;
};

export type PlayerScoreRow = {
  player_id: string;
  display_name: string;
  group: string | null;
  completed: number;
  grade: number | null;
  hide_score?: boolean;
  you?: boolean;
};

export type GroupScoreRow = {
  group: string | null;
  players: number;
  grade: number | null;
};

export type Scoreboard = {
  role: "teacher" | "learner";
  mode: "off" | "by_group" | "by_student";
  rows: (PlayerScoreRow | GroupScoreRow)[];
};

export type NotebookOpBody =
  | { op: "add_line"; target: string }
  | { op: "remove_line"; index: number }
  | {
      op: "add_mark";
      line: number;
      sign: "+" | "-";
      note: string;
      directory_ref?: number | null;
    };

export type DiagnoseSlots = Record<
  string,
  { chosen?: string[]; free_texts?: string[] }
>;
