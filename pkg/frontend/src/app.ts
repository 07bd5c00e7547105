// Page wiring: task navigation, optimistic verdict submission with rollback,
// add-substitute box, and annotator keyboard shortcuts (y/n/u, arrows).

import { ApiClient, ApiError } from "./api.js";
import { buildTaskView, renderTask, TaskHandlers } from "./taskview.js";
import { SchemaError, TaskPayload, TaskSummary, Verdict } from "./types.js";

interface AppState {
  client: ApiClient;
  summaries: TaskSummary[];
  index: number;
  payload: TaskPayload | null;
  selectedRow: number;
}

const VERDICT_KEYS: Record<string, Verdict> = { y: "YES", n: "NO", u: "UNSURE" };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function createApp(client: ApiClient, root: Document = document) {
  const state: AppState = { client, summaries: [], index: 0, payload: null, selectedRow: 0 };
  const container = root.getElementById("task-container")!;
  const banner = root.getElementById("banner")!;
  const position = root.getElementById("task-position")!;

  function showBanner(message: string, retry?: () => void) {
    banner.textContent = "";
    banner.classList.remove("hidden");
    banner.appendChild(root.createTextNode(message));
    if (retry) {
      const button = root.createElement("button");
      button.textContent = "Retry";
      button.addEventListener("click", () => {
        hideBanner();
        retry();
      });
      banner.appendChild(button);
    }
  }

  function hideBanner() {
    banner.classList.add("hidden");
    banner.textContent = "";
  }

  function allRows(): string[] {
    if (!state.payload) return [];
    return [
      ...state.payload.pseudo_substitutes,
      ...state.payload.added_substitutes.map((a) => a.text),
    ];
  }

  function rerender() {
    container.textContent = "";
    if (!state.payload) return;
    const handlers: TaskHandlers = {
      onVerdict: (substitute, verdict) => submitVerdict(substitute, verdict),
      onAdd: (text) => addSubstitute(text),
    };
    container.appendChild(renderTask(buildTaskView(state.payload), handlers));
    highlightSelection();
    position.textContent = state.summaries.length
      ? `task ${state.index + 1} of ${state.summaries.length}`
      : "no tasks";
  }

  function highlightSelection() {
    const rows = container.querySelectorAll<HTMLElement>(".substitute-row");
    rows.forEach((row, i) => row.classList.toggle("selected", i === state.selectedRow));
    const selected = rows[state.selectedRow];
    if (selected) selected.focus({ preventScroll: false });
  }

  async function showTask(index: number) {
    if (!state.summaries.length) {
      state.payload = null;
      rerender();
      return;
    }
    state.index = Math.max(0, Math.min(index, state.summaries.length - 1));
    state.selectedRow = 0;
    try {
      state.payload = await client.getTask(state.summaries[state.index]!.task_id);
      hideBanner();
    } catch (error) {
      state.payload = null;
      const reason = error instanceof SchemaError ? `bad task payload: ${error.message}` : String(error);
      showBanner(reason); // no partial render on schema mismatch
    }
    rerender();
  }

  async function submitVerdict(substitute: string, verdict: Verdict) {
    if (!state.payload) return;
    const previous = state.payload;
    const hadVerdict = substitute in previous.verdicts;
    // optimistic: show the choice (and bump progress) before the server answers
    state.payload = {
      ...previous,
      verdicts: { ...previous.verdicts, [substitute]: verdict },
      progress: {
        ...previous.progress,
        done: previous.progress.done + (hadVerdict ? 0 : 1),
      },
    };
    rerender();
    try {
      state.payload = await client.submitVerdict(previous.task_id, substitute, verdict);
      hideBanner();
    } catch (error) {
      state.payload = previous; // roll back to the last server-confirmed state
      if (error instanceof ApiError && (error.status === 404 || error.status === 409)) {
        showBanner(`conflict: ${error.message}`);
      } else {
        showBanner(`could not save verdict: ${String(error)}`, () =>
          submitVerdict(substitute, verdict),
        );
      }
    }
    rerender();
  }

  async function addSubstitute(text: string) {
    if (!state.payload) return;
    try {
      state.payload = await client.addSubstitute(state.payload.task_id, text);
      hideBanner();
    } catch (error) {
      showBanner(`could not add substitute: ${String(error)}`);
    }
    rerender();
  }

  function onKey(event: KeyboardEvent) {
    if ((event.target as HTMLElement | null)?.tagName === "INPUT" &&
        (event.target as HTMLInputElement).type === "text") {
      return; // typing in the add box
    }
    const rows = allRows();
    const verdict = VERDICT_KEYS[event.key.toLowerCase()];
    if (verdict && rows[state.selectedRow] !== undefined) {
      void submitVerdict(rows[state.selectedRow]!, verdict);
      event.preventDefault();
    } else if (event.key === "ArrowDown") {
      state.selectedRow = Math.min(state.selectedRow + 1, rows.length - 1);
      highlightSelection();
      event.preventDefault();
    } else if (event.key === "ArrowUp") {
      state.selectedRow = Math.max(state.selectedRow - 1, 0);
      highlightSelection();
      event.preventDefault();
    } else if (event.key === "ArrowRight") {
      void showTask(state.index + 1);
      event.preventDefault();
    } else if (event.key === "ArrowLeft") {
      void showTask(state.index - 1);
      event.preventDefault();
    }
  }

  async function start() {
    try {
      state.summaries = await client.listTasks();
    } catch (error) {
      showBanner(`could not load tasks: ${String(error)}`);
      return;
    }
    await showTask(0);
  }

  return { start, showTask, submitVerdict, addSubstitute, onKey, state };
}

export function main() {
  const annotatorInput = el<HTMLInputElement>("annotator");
  annotatorInput.value = localStorage.getItem("annotator") ?? "";

  let app: ReturnType<typeof createApp> | null = null;

  function boot() {
    const annotator = annotatorInput.value.trim();
    if (!annotator) return;
    localStorage.setItem("annotator", annotator);
    app = createApp(new ApiClient("", annotator));
    void app.start();
  }

  annotatorInput.addEventListener("change", boot);
  el<HTMLButtonElement>("prev-task").addEventListener("click", () => app?.showTask(app.state.index - 1));
  el<HTMLButtonElement>("next-task").addEventListener("click", () => app?.showTask(app.state.index + 1));
  document.addEventListener("keydown", (event) => app?.onKey(event));
  if (annotatorInput.value) boot();
}

if (typeof window !== "undefined" && document.getElementById("task-container")) {
  main();
}
