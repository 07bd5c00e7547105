// Task page model and rendering: one sentence with the target highlighted,
// one row per substitute with the four machine signals and a YES/NO/UNSURE
// choice. Badges only ever show values present in the payload.

import {
  MODEL_KEYS,
  ModelKey,
  Recommendations,
  SchemaError,
  Signal,
  STYLE_KEYS,
  StyleKey,
  TaskPayload,
  Verdict,
  VERDICTS,
} from "./types.js";

export interface SignalBadge {
  model: ModelKey;
  style: StyleKey;
  value: Signal | null; // null: no signal in the payload (never invented)
}

export interface SubstituteRow {
  text: string;
  added: boolean;
  badges: SignalBadge[];
  verdict: Verdict | null;
}

export interface TaskViewModel {
  taskId: string;
  instanceId: string;
  before: string;
  target: string;
  after: string;
  weight: number;
  rows: SubstituteRow[];
  addedRows: SubstituteRow[];
  progress: { done: number; total: number };
}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((item) => typeof item === "string");
}

function expect(condition: boolean, message: string): asserts condition {
  if (!condition) throw new SchemaError(message);
}

export function validateTaskPayload(raw: unknown): TaskPayload {
  expect(typeof raw === "object" && raw !== null, "payload is not an object");
  const data = raw as Record<string, unknown>;
  expect(typeof data.task_id === "string", "task_id missing");
  expect(typeof data.instance_id === "string", "instance_id missing");
  expect(typeof data.sentence === "string", "sentence missing");
  expect(typeof data.marked_sentence === "string", "marked_sentence missing");
  expect(isStringArray(data.pseudo_substitutes), "pseudo_substitutes missing");

  const target = data.target as Record<string, unknown> | undefined;
  expect(
    typeof target === "object" && target !== null && typeof target.surface === "string",
    "target missing",
  );
  const span = (target as { span?: unknown }).span;
  expect(
    Array.isArray(span) && span.length === 2 && span.every((x) => typeof x === "number"),
    "target span missing",
  );
  const [start, end] = span as [number, number];
  const sentence = data.sentence as string;
  expect(0 <= start && start < end && end <= sentence.length, "target span out of range");
  expect(
    sentence.slice(start, end) === (target as { surface: string }).surface,
    "target surface does not match span",
  );

  const progress = data.progress as Record<string, unknown> | undefined;
  expect(
    typeof progress === "object" && progress !== null &&
      typeof progress.done === "number" && typeof progress.total === "number",
    "progress missing",
  );
  expect(typeof data.verdicts === "object" && data.verdicts !== null, "verdicts missing");
  expect(Array.isArray(data.added_substitutes), "added_substitutes missing");
  expect(typeof data.recommendations === "object" && data.recommendations !== null, "recommendations missing");
  return data as unknown as TaskPayload;
}

function badgesFor(recommendations: Recommendations, substitute: string): SignalBadge[] {
  const grid = recommendations[substitute];
  const badges: SignalBadge[] = [];
  for (const model of MODEL_KEYS) {
    for (const style of STYLE_KEYS) {
      const value = grid?.[model]?.[style];
      badges.push({
        model,
        style,
        value: value === "yes" || value === "no" || value === "failed" ? value : null,
      });
    }
  }
  return badges;
}

export function buildTaskView(payload: TaskPayload): TaskViewModel {
  const [start, end] = payload.target.span;
  const rowFor = (text: string, added: boolean): SubstituteRow => ({
    text,
    added,
    badges: badgesFor(payload.recommendations, text),
    verdict: payload.verdicts[text] ?? null,
  });
  return {
    taskId: payload.task_id,
    instanceId: payload.instance_id,
    before: payload.sentence.slice(0, start),
    target: payload.sentence.slice(start, end),
    after: payload.sentence.slice(end),
    weight: payload.target.weight,
    rows: payload.pseudo_substitutes.map((text) => rowFor(text, false)),
    addedRows: payload.added_substitutes.map((item) => rowFor(item.text, true)),
    progress: { done: payload.progress.done, total: payload.progress.total },
  };
}

export interface TaskHandlers {
  onVerdict(substitute: string, verdict: Verdict): void;
  onAdd(text: string): void;
}

const STYLE_LABELS: Record<StyleKey, string> = { direct: "Direct", cot: "COT" };

function renderBadge(badge: SignalBadge): HTMLElement {
  const el = document.createElement("span");
  el.className = `badge badge-${badge.value ?? "none"}`;
  el.dataset.model = badge.model;
  el.dataset.style = badge.style;
  el.dataset.value = badge.value ?? "";
  el.title = `model ${badge.model}, ${STYLE_LABELS[badge.style]}`;
  el.textContent = `${badge.model}·${STYLE_LABELS[badge.style]}: ${badge.value ?? "–"}`;
  return el;
}

function renderRow(row: SubstituteRow, taskId: string, handlers: TaskHandlers): HTMLElement {
  const el = document.createElement("div");
  el.className = "substitute-row" + (row.added ? " substitute-added" : "");
  el.dataset.substitute = row.text;
  el.tabIndex = 0;

  const word = document.createElement("span");
  word.className = "substitute-text";
  word.textContent = row.text;
  el.appendChild(word);

  const badges = document.createElement("span");
  badges.className = "badges";
  for (const badge of row.badges) {
    badges.appendChild(renderBadge(badge));
  }
  el.appendChild(badges);

  const options = document.createElement("span");
  options.className = "options";
  for (const verdict of VERDICTS) {
    const label = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = `verdict:${taskId}:${row.text}`;
    radio.value = verdict;
    radio.checked = row.verdict === verdict; // unanswered rows start unchecked
    radio.addEventListener("change", () => handlers.onVerdict(row.text, verdict));
    label.appendChild(radio);
    label.appendChild(document.createTextNode(verdict));
    options.appendChild(label);
  }
  el.appendChild(options);
  return el;
}

export function renderTask(model: TaskViewModel, handlers: TaskHandlers): HTMLElement {
  const root = document.createElement("section");
  root.className = "task";
  root.dataset.taskId = model.taskId;

  const heading = document.createElement("header");
  heading.className = "task-heading";
  const progress = document.createElement("span");
  progress.className = "progress";
  progress.textContent = `${model.progress.done}/${model.progress.total} judged`;
  const title = document.createElement("span");
  title.className = "task-title";
  title.textContent = `${model.instanceId} — “${model.target}” (${model.weight}/20 annotators)`;
  heading.appendChild(title);
  heading.appendChild(progress);
  root.appendChild(heading);

  const sentence = document.createElement("p");
  sentence.className = "sentence";
  sentence.appendChild(document.createTextNode(model.before));
  const mark = document.createElement("mark");
  mark.className = "target";
  mark.textContent = model.target;
  sentence.appendChild(mark);
  sentence.appendChild(document.createTextNode(model.after));
  root.appendChild(sentence);

  const list = document.createElement("div");
  list.className = "substitutes";
  for (const row of model.rows) {
    list.appendChild(renderRow(row, model.taskId, handlers));
  }
  root.appendChild(list);

  if (model.addedRows.length > 0) {
    const addedHeading = document.createElement("h3");
    addedHeading.textContent = "Added by annotators";
    root.appendChild(addedHeading);
    const addedList = document.createElement("div");
    addedList.className = "substitutes substitutes-added";
    for (const row of model.addedRows) {
      addedList.appendChild(renderRow(row, model.taskId, handlers));
    }
    root.appendChild(addedList);
  }

  const addBox = document.createElement("form");
  addBox.className = "add-box";
  const input = document.createElement("input");
  input.type = "text";
  input.placeholder = "Add a missing substitute…";
  input.className = "add-input";
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Add";
  addBox.appendChild(input);
  addBox.appendChild(button);
  addBox.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (text) {
      handlers.onAdd(text);
      input.value = "";
    }
  });
  root.appendChild(addBox);
  return root;
}
