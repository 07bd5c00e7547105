// Thin fetch wrapper around the annotation server endpoints.

import { TaskPayload, TaskSummary, Verdict } from "./types.js";
import { validateTaskPayload } from "./taskview.js";

export class ApiError extends Error {
  constructor(message: string, public status: number) {
    super(message);
  }
}

async function readError(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.error === "string" ? body.error : response.statusText;
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    public annotator: string,
  ) {}

  private headers(): Record<string, string> {
    return { "Content-Type": "application/json", "X-Annotator": this.annotator };
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(await readError(response), response.status);
    }
    return response.json();
  }

  async listTasks(): Promise<TaskSummary[]> {
    const query = this.annotator ? `?annotator=${encodeURIComponent(this.annotator)}` : "";
    return (await this.request(`/tasks${query}`)) as TaskSummary[];
  }

  async getTask(taskId: string): Promise<TaskPayload> {
    const raw = await this.request(`/tasks/${encodeURIComponent(taskId)}`, {
      headers: this.headers(),
    });
    return validateTaskPayload(raw);
  }

  async submitVerdict(taskId: string, substitute: string, verdict: Verdict): Promise<TaskPayload> {
    const raw = await this.request(`/tasks/${encodeURIComponent(taskId)}/judgments`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ substitute, verdict }),
    });
    return validateTaskPayload(raw);
  }

  async addSubstitute(taskId: string, text: string): Promise<TaskPayload> {
    const raw = await this.request(`/tasks/${encodeURIComponent(taskId)}/substitutes`, {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify({ text }),
    });
    return validateTaskPayload(raw);
  }
}
