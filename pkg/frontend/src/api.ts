// Thin typed client over the /api/v1 JSON contract. No game logic lives
// here: legality and scoring are the server's problem.

import type {
  ActionOutcome,
  ActiveView,
  AnswerFeedback,
  CaseSummary,
  DiagnoseSlots,
  NotebookOpBody,
  PlayState,
  Report,
  Scoreboard,
  SessionConfigBody,
  SessionCreated,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: unknown[] = []
  ) {
    super(message);
  }
}

// structural subset of Response the client needs; lets tests substitute a
// plain node-http transport for the browser fetch
export type MinimalResponse = {
  ok: boolean;
  status: number;
  statusText: string;
  text(): Promise<string>;
};

type FetchLike = (input: string, init?: RequestInit) => Promise<MinimalResponse>;

export class ApiClient {
  token: string | null = null;

  constructor(
    public base: string = "/api/v1",
    private fetchFn: FetchLike = (input, init) => fetch(input, init)
  ) {}

  withToken(token: string): ApiClient {
    const clone = new ApiClient(this.base, this.fetchFn);
    clone.token = token;
    return clone;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: payload,
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(
        response.status,
        parsed.code ?? "error",
        parsed.message ?? response.statusText,
        parsed.details ?? []
      );
    }
    return parsed as T;
  }

  mediaUrl(storageId: string, path: string): string {
    return `${this.base}/cases/${storageId}/media/${path}`;
  }

  // ------------------------------------------------------------- teacher

  searchCases(filters: {
    field?: string;
    difficulty?: number;
    author?: string;
    text?: string;
  }): Promise<{ cases: CaseSummary[] }> {
    const params = new URLSearchParams();
    if (filters.field) params.set("field", filters.field);
    if (filters.difficulty != null)
      params.set("difficulty", String(filters.difficulty));
    if (filters.author) params.set("author", filters.author);
    if (filters.text) params.set("text", filters.text);
    const query = params.toString();
    return this.request("GET", `/cases${query ? "?" + query : ""}`);
  }

  createSession(config: SessionConfigBody): Promise<SessionCreated> {
    return this.request("POST", "/sessions", config);
  }

  scores(sessionId: string): Promise<Scoreboard> {
    return this.request("GET", `/sessions/${sessionId}/scores`);
  }

  // ------------------------------------------------------------- learner

  async join(
    sessionId: string,
    joinCode: string,
    displayName: string,
    group: string | null
  ): Promise<{ token: string; player_id: string }> {
    return this.request("POST", `/sessions/${sessionId}/join`, {
      join_code: joinCode,
      display_name: displayName,
      group,
    });
  }

  state(): Promise<PlayState> {
    return this.request("GET", "/play/state");
  }

  pick(caseId: string): Promise<PlayState> {
    return this.request("POST", "/play/pick", { case_id: caseId });
  }

  perform(
    cardId: string
  ): Promise<{ outcome: ActionOutcome; view: ActiveView }> {
    return this.request("POST", "/play/perform", { card_id: cardId });
  }

  answer(
    cardId: string,
    choiceIds: string[]
  ): Promise<{ feedback: AnswerFeedback; view: ActiveView }> {
    return this.request("POST", "/play/answer", {
      card_id: cardId,
      choice_ids: choiceIds,
    });
  }

  hint(): Promise<{ hint: string; view: ActiveView }> {
    return this.request("POST", "/play/hint", {});
  }

  notebook(ops: NotebookOpBody[]): Promise<{ view: ActiveView }> {
    return this.request("POST", "/play/notebook", { ops });
  }

  diagnose(slots: DiagnoseSlots): Promise<{ report: Report; view: PlayState }> {
    return this.request("POST", "/play/diagnose", { slots });
  }

  setScoreVisibility(hide: boolean): Promise<{ hide_score: boolean }> {
    return this.request("POST", "/play/score-visibility", { hide });
  }
}
