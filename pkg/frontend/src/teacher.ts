// Teacher screen: build a session from a metadata search of the case
// library (selection mode, feedback timing, score publishing), then watch
// the scoreboard. The published-scores table mirrors exactly what learners
// are allowed to see for the chosen mode; the full per-player table sits
// beneath it as teacher detail.

import type { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import type {
  CaseSummary,
  PlayerScoreRow,
  Scoreboard,
  SessionConfigBody,
  SessionCreated,
} from "./types.js";

export class TeacherModel {
  filters = { field: "", difficulty: "", author: "", text: "" };
  results: CaseSummary[] = [];
  selected: CaseSummary[] = [];
  config: SessionConfigBody = {
    case_selection: "fixed_order",
    case_ids: [],
    feedback: { answers: "end", scores: "end" },
    score_publishing: "off",
    allow_free_answers: false,
    seed: null,
  };
  created: SessionCreated | null = null;
  boardSessionId = "";
  boardToken = "";
  board: Scoreboard | null = null;
  toast: string | null = null;
}

export type TeacherController = {
  tm: TeacherModel;
  api: ApiClient;
  rerender: () => void;
};

async function guard(ctl: TeacherController, fn: () => Promise<void>) {
  try {
    await fn();
    ctl.tm.toast = null;
  } catch (error) {
    ctl.tm.toast = error instanceof Error ? error.message : String(error);
  }
  ctl.rerender();
}

function doSearch(ctl: TeacherController) {
  const f = ctl.tm.filters;
  void guard(ctl, async () => {
    const result = await ctl.api.searchCases({
      field: f.field || undefined,
      difficulty: f.difficulty ? Number(f.difficulty) : undefined,
      author: f.author || undefined,
      text: f.text || undefined,
    });
    ctl.tm.results = result.cases;
  });
}

function doCreate(ctl: TeacherController) {
  const tm = ctl.tm;
  tm.config.case_ids = tm.selected.map((c) => c.case_id);
  void guard(ctl, async () => {
    tm.created = await ctl.api.createSession(tm.config);
    tm.boardSessionId = tm.created.session_id;
    tm.boardToken = tm.created.teacher_token;
  });
}

function doLoadScores(ctl: TeacherController) {
  const tm = ctl.tm;
  void guard(ctl, async () => {
    tm.board = await ctl.api.withToken(tm.boardToken).scores(tm.boardSessionId);
  });
}

// ------------------------------------------------------------- rendering

function searchSection(ctl: TeacherController): HTMLElement {
  const tm = ctl.tm;
  const input = (key: keyof typeof tm.filters, placeholder: string) =>
    el("input", {
      type: "text",
      placeholder,
      "data-filter": key,
      value: tm.filters[key],
      oninput: (event: Event) => {
        tm.filters[key] = (event.target as HTMLInputElement).value;
      },
    });
  return el("section", { class: "panel search" },
    el("h2", {}, "Case library"),
    el("div", { class: "search-row" },
      input("field", "educational field"),
      input("difficulty", "difficulty 1-5"),
      input("author", "author"),
      input("text", "free text"),
      el("button", { class: "primary", onclick: () => doSearch(ctl) }, "Search")
    ),
    el("table", { class: "results" },
      el("thead", {},
        el("tr", {},
          el("th", {}, "name"), el("th", {}, "field"), el("th", {}, "difficulty"),
          el("th", {}, "author"), el("th", {}, "")
        )
      ),
      el("tbody", {},
        ...tm.results.map((summary) =>
          el("tr", { "data-case": summary.case_id },
            el("td", {}, summary.name),
            el("td", {}, summary.field),
            el("td", {}, String(summary.difficulty)),
            el("td", {}, summary.author),
            el("td", {},
              el("button", {
                disabled: tm.selected.some((s) => s.case_id === summary.case_id),
                onclick: () => {
                  tm.selected.push(summary);
                  ctl.rerender();
                },
              }, "add")
            )
          )
        )
      )
    )
  );
}

function builderSection(ctl: TeacherController): HTMLElement {
  const tm = ctl.tm;
  const select = (
    label: string,
    value: string,
    options: string[],
    apply: (next: string) => void,
    name: string
  ) =>
    el("label", { class: "config-field" }, `${label} `,
      el("select", {
        "data-config": name,
        onchange: (event: Event) =>
          apply((event.target as HTMLSelectElement).value),
      },
        ...options.map((option) =>
          el("option", { value: option, selected: option === value }, option)
        )
      )
    );
  return el("section", { class: "panel builder" },
    el("h2", {}, "Session"),
    el("ol", { class: "selected-cases" },
      ...tm.selected.map((summary, index) =>
        el("li", { "data-selected": summary.case_id },
          summary.name,
          el("button", {
            onclick: () => {
              tm.selected.splice(index, 1);
              ctl.rerender();
            },
          }, "remove")
        )
      )
    ),
    select("case selection", tm.config.case_selection,
      ["fixed_order", "random", "learner_choice"],
      (v) => (tm.config.case_selection = v as SessionConfigBody["case_selection"]),
      "case_selection"),
    select("show answers", tm.config.feedback.answers, ["immediate", "end"],
      (v) => (tm.config.feedback.answers = v as "immediate" | "end"),
      "answers"),
    select("show scores", tm.config.feedback.scores, ["immediate", "end"],
      (v) => (tm.config.feedback.scores = v as "immediate" | "end"),
      "scores"),
    select("publish scores", tm.config.score_publishing,
      ["off", "by_group", "by_student"],
      (v) => (tm.config.score_publishing = v as SessionConfigBody["score_publishing"]),
      "score_publishing"),
    el("label", { class: "config-field" },
      el("input", {
        type: "checkbox",
        "data-config": "allow_free_answers",
        onchange: (event: Event) => {
          tm.config.allow_free_answers = (event.target as HTMLInputElement).checked;
        },
      }),
      " accept learners' own answers everywhere"
    ),
    el("button", {
      class: "primary create-session",
      disabled: tm.selected.length === 0,
      onclick: () => doCreate(ctl),
    }, "Create session"),
    tm.created
      ? el("div", { class: "created", "data-created": tm.created.session_id },
          el("p", {}, `session id: ${tm.created.session_id}`),
          el("p", {}, `join code: ${tm.created.join_code}`),
          el("p", { class: "secret" }, `teacher token: ${tm.created.teacher_token}`)
        )
      : null
  );
}

export function publishedRows(
  board: Scoreboard
): { kind: "group" | "player"; cells: string[] }[] {
  // project the teacher's full data down to what learners may see
  const rows = board.rows as PlayerScoreRow[];
  if (board.mode === "by_group") {
    const groups = new Map<string, PlayerScoreRow[]>();
    for (const row of rows) {
      const key = row.group ?? "";
      if (!groups.has(key)) groups.set(key, []);
      groups.get(key)!.push(row);
    }
    return [...groups.entries()]
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([group, members]) => {
        const grades = members
          .map((m) => m.grade)
          .filter((g): g is number => g != null);
        const mean =
          grades.length > 0
            ? grades.reduce((a, b) => a + b, 0) / grades.length
            : null;
        return {
          kind: "group" as const,
          cells: [
            group || "(no group)",
            String(members.length),
            mean == null ? "—" : mean.toFixed(1),
          ],
        };
      });
  }
  if (board.mode === "by_student") {
    return rows
      .filter((row) => !row.hide_score)
      .map((row) => ({
        kind: "player" as const,
        cells: [
          row.display_name,
          row.group ?? "",
          String(row.completed),
          row.grade == null ? "—" : String(row.grade),
        ],
      }));
  }
  return []; // off: learners see only their own score
}

function scoreboardSection(ctl: TeacherController): HTMLElement {
  const tm = ctl.tm;
  const board = tm.board;
  const published = board ? publishedRows(board) : [];
  return el("section", { class: "panel scoreboard" },
    el("h2", {}, "Scoreboard"),
    el("div", { class: "search-row" },
      el("input", {
        type: "text", placeholder: "session id", value: tm.boardSessionId,
        "data-board": "session",
        oninput: (event: Event) => {
          tm.boardSessionId = (event.target as HTMLInputElement).value;
        },
      }),
      el("input", {
        type: "password", placeholder: "teacher token", value: tm.boardToken,
        "data-board": "token",
        oninput: (event: Event) => {
          tm.boardToken = (event.target as HTMLInputElement).value;
        },
      }),
      el("button", { class: "primary load-scores", onclick: () => doLoadScores(ctl) },
        "Load")
    ),
    board
      ? el("div", { class: "boards" },
          el("h3", {}, `Published to learners (${board.mode})`),
          board.mode === "off"
            ? el("p", { class: "empty" }, "learners see only their own score")
            : el("table", { class: "published" },
                el("tbody", {},
                  ...published.map((row) =>
                    el("tr", { class: `published-row ${row.kind}`, "data-kind": row.kind },
                      ...row.cells.map((cell) => el("td", {}, cell))
                    )
                  )
                )
              ),
          el("h3", {}, "All players (teacher detail)"),
          el("table", { class: "teacher-detail" },
            el("thead", {},
              el("tr", {},
                el("th", {}, "player"), el("th", {}, "group"),
                el("th", {}, "completed"), el("th", {}, "grade"),
                el("th", {}, "hidden")
              )
            ),
            el("tbody", {},
              ...(board.rows as PlayerScoreRow[]).map((row) =>
                el("tr", { "data-player": row.player_id },
                  el("td", {}, row.display_name),
                  el("td", {}, row.group ?? ""),
                  el("td", {}, String(row.completed)),
                  el("td", {}, row.grade == null ? "—" : String(row.grade)),
                  el("td", {}, row.hide_score ? "yes" : "no")
                )
              )
            )
          )
        )
      : null
  );
}

export function renderTeacher(root: HTMLElement, ctl: TeacherController): void {
  clear(root);
  root.append(
    el("main", { class: "teacher" },
      el("h1", {}, "Teacher platform"),
      ctl.tm.toast ? el("p", { class: "toast", role: "alert" }, ctl.tm.toast) : null,
      searchSection(ctl),
      builderSection(ctl),
      scoreboardSection(ctl)
    )
  );
}
