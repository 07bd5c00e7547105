import { Recommendations, Signal, TaskPayload } from "../src/types.js";

export const SENTENCE =
  "The text is an indication that it was premeditated, Goodyear said.";
const START = SENTENCE.indexOf("indication");

export const TWELVE = [
  "sign", "hint", "clue", "signal", "mark", "proof",
  "token", "note", "trace", "pointer", "symbol", "omen",
];

export function signalGrid(
  aDirect: Signal, aCot: Signal, bDirect: Signal, bCot: Signal,
): Recommendations[string] {
  return { A: { direct: aDirect, cot: aCot }, B: { direct: bDirect, cot: bCot } };
}

export function taskFixture(overrides: Partial<TaskPayload> = {}): TaskPayload {
  const recommendations: Recommendations = {
    sign: signalGrid("yes", "yes", "yes", "no"),
    hint: signalGrid("yes", "failed", "no", "no"),
    clue: signalGrid("failed", "failed", "failed", "failed"),
  };
  return {
    task_id: "s1:15-25",
    instance_id: "s1",
    target: { surface: "indication", span: [START, START + 10], weight: 9 },
    pseudo_substitutes: [...TWELVE],
    recommendations,
    sentence: SENTENCE,
    genre: "wikinews",
    marked_sentence: SENTENCE.slice(0, START) + "<<indication>>" + SENTENCE.slice(START + 10),
    added_substitutes: [],
    verdicts: {},
    progress: { done: 0, total: 12 },
    ...overrides,
  };
}
