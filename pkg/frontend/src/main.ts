// App shell: hash routing between the join form, the learner screen and
// the teacher platform. State refreshes from the server after every
// mutating call; nothing is rendered optimistically.

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { renderLearner, type LearnerController } from "./learner.js";
import { renderTeacher, TeacherModel, type TeacherController } from "./teacher.js";
import { ViewModel } from "./viewmodel.js";

const TOKEN_KEY = "casegen.token";

export function createApp(root: HTMLElement, api: ApiClient) {
  const vm = new ViewModel();
  const tm = new TeacherModel();

  const learnerCtl: LearnerController = {
    vm,
    api,
    rerender: () => render(),
  };
  const teacherCtl: TeacherController = {
    tm,
    api,
    rerender: () => render(),
  };

  function route(): string {
    const hash = window.location.hash || "#/join";
    return hash.replace(/^#\//, "");
  }

  function renderJoin(): void {
    clear(root);
    const fields = { session: "", code: "", name: "", group: "" };
    const input = (key: keyof typeof fields, placeholder: string, type = "text") =>
      el("input", {
        type,
        placeholder,
        "data-join": key,
        oninput: (event: Event) => {
          fields[key] = (event.target as HTMLInputElement).value;
        },
      });
    root.append(
      el("main", { class: "join" },
        el("h1", {}, "Join a session"),
        el("form", {
          class: "join-form",
          onsubmit: (event: Event) => {
            event.preventDefault();
            void (async () => {
              try {
                const result = await api.join(
                  fields.session.trim(),
                  fields.code.trim(),
                  fields.name.trim(),
                  fields.group.trim() || null
                );
                api.token = result.token;
                window.sessionStorage.setItem(TOKEN_KEY, result.token);
                window.location.hash = "#/play";
                await refreshPlay();
              } catch (error) {
                const toast = root.querySelector(".toast");
                if (toast) {
                  toast.textContent =
                    error instanceof Error ? error.message : String(error);
                }
              }
            })();
          },
        },
          input("session", "session id"),
          input("code", "join code"),
          input("name", "your name"),
          input("group", "group (optional)"),
          el("button", { class: "primary", type: "submit" }, "Join")
        ),
        el("p", { class: "toast", role: "alert" }, ""),
        el("p", {}, el("a", { href: "#/teacher" }, "Teacher platform"))
      )
    );
  }

  async function refreshPlay(): Promise<void> {
    try {
      vm.applyState(await api.state());
    } catch {
      window.location.hash = "#/join";
    }
    render();
  }

  function render(): void {
    const where = route();
    if (where === "teacher") {
      renderTeacher(root, teacherCtl);
    } else if (where === "play") {
      renderLearner(root, learnerCtl);
    } else {
      renderJoin();
    }
  }

  window.addEventListener("hashchange", () => {
    if (route() === "play" && api.token) void refreshPlay();
    else render();
  });

  const saved = window.sessionStorage.getItem(TOKEN_KEY);
  if (saved) {
    api.token = saved;
    if (route() === "play" || route() === "join") {
      window.location.hash = "#/play";
      void refreshPlay();
      return { vm, tm, render, refreshPlay };
    }
  }
  render();
  return { vm, tm, render, refreshPlay };
}

declare global {
  interface Window {
    __casegenTest?: boolean;
  }
}

if (typeof window !== "undefined" && !window.__casegenTest) {
  const root = document.getElementById("app");
  if (root) createApp(root, new ApiClient("/api/v1"));
}
