import type {
  DecisionRequest,
  ExportResult,
  QueueItem,
  QueuePage,
  ReviewStats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the review service JSON API. */
export class ReviewApi {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`, 0);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  fetchQueue(status?: string, page = 1, pageSize = 50): Promise<QueuePage> {
    const params = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    if (status) params.set("status", status);
    return this.request(`/api/queue?${params.toString()}`);
  }

  fetchItem(qaId: string): Promise<QueueItem> {
    return this.request(`/api/items/${encodeURIComponent(qaId)}`);
  }

  submitDecision(qaId: string, decision: DecisionRequest): Promise<QueueItem> {
    return this.request(`/api/items/${encodeURIComponent(qaId)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
  }

  fetchStats(): Promise<ReviewStats> {
    return this.request("/api/stats");
  }

  exportReviewed(path: string, include?: string[]): Promise<ExportResult> {
    return this.request("/api/export", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(include ? { path, include } : { path }),
    });
  }
}
