import { ApiError, ReviewApi } from "./api.js";
import type { DecisionAction, QueueItem, ReviewStats } from "./types.js";

export const PAGE_SIZE = 50;

export interface StoreState {
  items: QueueItem[];
  total: number;
  pagesLoaded: number;
  selected: number;
  stats: ReviewStats | null;
  statusFilter: string | null;
  editing: boolean;
  busy: boolean;
  /** Connectivity banner text; null when the service is reachable. */
  connectionError: string | null;
  /** Inline validation/server error for the current item. */
  itemError: string | null;
}

function initialState(): StoreState {
  return {
    items: [],
    total: 0,
    pagesLoaded: 0,
    selected: -1,
    stats: null,
    statusFilter: null,
    editing: false,
    busy: false,
    connectionError: null,
    itemError: null,
  };
}

/** Client-side mirror of an edit's server validation. */
export function validateEdit(question: string, answer: string): string | null {
  const q = question.trim();
  if (!q) return "question must not be empty";
  if (!q.endsWith("?")) return "question must end with '?'";
  if (!answer.trim()) return "answer must not be empty";
  return null;
}

/**
 * UI state container. The server is the single source of truth: rows only
 * change after the service acknowledges a decision, and `load` always
 * rebuilds from a fresh queue fetch.
 */
export class ReviewStore {
  private state: StoreState = initialState();
  private listeners: Array<() => void> = [];

  constructor(private readonly api: ReviewApi) {}

  getState(): Readonly<StoreState> {
    return this.state;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((fn) => fn !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private patch(partial: Partial<StoreState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  get selectedItem(): QueueItem | null {
    const { items, selected } = this.state;
    return selected >= 0 && selected < items.length ? items[selected] : null;
  }

  async load(statusFilter: string | null = this.state.statusFilter): Promise<void> {
    this.patch({ busy: true, statusFilter });
    try {
      const page = await this.api.fetchQueue(statusFilter ?? undefined, 1, PAGE_SIZE);
      const stats = await this.api.fetchStats();
      this.patch({
        items: page.items,
        total: page.total,
        pagesLoaded: 1,
        selected: page.items.length ? 0 : -1,
        stats,
        editing: false,
        busy: false,
        connectionError: null,
        itemError: null,
      });
    } catch (err) {
      this.patch({ busy: false, connectionError: describe(err) });
    }
  }

  /** Fetch the next page lazily when selection nears the end. */
  async loadMore(): Promise<void> {
    const { items, total, pagesLoaded, statusFilter } = this.state;
    if (items.length >= total || this.state.busy) return;
    this.patch({ busy: true });
    try {
      const page = await this.api.fetchQueue(
        statusFilter ?? undefined,
        pagesLoaded + 1,
        PAGE_SIZE,
      );
      this.patch({
        items: [...items, ...page.items],
        total: page.total,
        pagesLoaded: pagesLoaded + 1,
        busy: false,
        connectionError: null,
      });
    } catch (err) {
      this.patch({ busy: false, connectionError: describe(err) });
    }
  }

  select(index: number): void {
    if (index >= 0 && index < this.state.items.length) {
      this.patch({ selected: index, editing: false, itemError: null });
      if (index >= this.state.items.length - 5) void this.loadMore();
    }
  }

  selectNext(): void {
    this.select(this.state.selected + 1);
  }

  selectPrevious(): void {
    this.select(this.state.selected - 1);
  }

  startEdit(): void {
    if (this.selectedItem) this.patch({ editing: true, itemError: null });
  }

  cancelEdit(): void {
    this.patch({ editing: false, itemError: null });
  }

  /**
   * Submit a decision for the selected item. The row is updated only from
   * the acknowledged server payload; on failure nothing changes except the
   * inline error (no optimistic state).
   */
  async decide(
    action: DecisionAction,
    edits?: { question: string; answer: string },
  ): Promise<boolean> {
    const item = this.selectedItem;
    if (item === null || this.state.busy) return false;
    if (action === "edit") {
      const problem = edits ? validateEdit(edits.question, edits.answer) : "missing edit";
      if (problem) {
        this.patch({ itemError: problem });
        return false;
      }
    }
    this.patch({ busy: true });
    try {
      const updated = await this.api.submitDecision(item.qa_id, {
        action,
        ...(action === "edit" && edits
          ? { edited_question: edits.question, edited_answer: edits.answer }
          : {}),
      });
      const items = this.state.items.map((row) =>
        row.qa_id === updated.qa_id ? updated : row,
      );
      const stats = await this.api.fetchStats();
      this.patch({ items, stats, busy: false, editing: false, itemError: null });
      this.advanceToPending();
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status > 0) {
        this.patch({ busy: false, itemError: err.message });
      } else {
        this.patch({ busy: false, connectionError: describe(err) });
      }
      return false;
    }
  }

  /** Move focus to the next still-pending item after an acknowledgment. */
  private advanceToPending(): void {
    const { items, selected } = this.state;
    for (let i = selected + 1; i < items.length; i += 1) {
      if (items[i].status === "generated") {
        this.select(i);
        return;
      }
    }
    if (selected + 1 < items.length) this.select(selected + 1);
  }

  async retry(): Promise<void> {
    await this.load();
  }
}

function describe(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
