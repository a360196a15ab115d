import type { ReviewStore } from "./state.js";
import type { QueueItem } from "./types.js";

/**
 * DOM layer: renders the queue list, the detail pane, the progress bar,
 * and the connectivity banner from store state, and binds keyboard
 * shortcuts (a = accept, e = edit, r = reject, arrows = move).
 */
export function mountApp(root: HTMLElement, store: ReviewStore): void {
  root.innerHTML = `
    <div id="banner" class="banner hidden">
      <span id="banner-text"></span>
      <button id="banner-retry">Retry</button>
    </div>
    <header>
      <h1>QA review</h1>
      <div class="progress"><div id="progress-fill"></div></div>
      <span id="progress-text"></span>
    </header>
    <main>
      <ul id="queue" class="queue"></ul>
      <section id="detail" class="detail"></section>
    </main>
  `;
  const banner = must(root, "#banner");
  const bannerText = must(root, "#banner-text");
  const queue = must(root, "#queue");
  const detail = must(root, "#detail");
  const progressFill = must(root, "#progress-fill");
  const progressText = must(root, "#progress-text");

  must(root, "#banner-retry").addEventListener("click", () => void store.retry());

  function render(): void {
    const state = store.getState();
    banner.classList.toggle("hidden", state.connectionError === null);
    if (state.connectionError !== null) {
      bannerText.textContent = `Cannot reach the review service: ${state.connectionError}`;
    }

    if (state.stats) {
      const done = state.stats.total - state.stats.generated;
      const pct = state.stats.total ? Math.round((100 * done) / state.stats.total) : 0;
      progressFill.style.width = `${pct}%`;
      progressText.textContent =
        `${done}/${state.stats.total} reviewed ` +
        `(${state.stats.accepted} accepted, ${state.stats.edited} edited, ` +
        `${state.stats.rejected} rejected)`;
    }

    queue.innerHTML = "";
    if (state.items.length === 0 && state.connectionError === null) {
      const empty = document.createElement("li");
      empty.className = "empty";
      empty.textContent = state.total === 0 ? "All reviewed — queue is empty." : "Loading…";
      queue.appendChild(empty);
    }
    state.items.forEach((item, index) => {
      const row = document.createElement("li");
      row.className = `row status-${item.status}${index === state.selected ? " selected" : ""}`;
      row.dataset.qaId = item.qa_id;
      row.innerHTML = `
        <span class="badge badge-${item.qtype}">${escapeHtml(item.qtype)}</span>
        <span class="question">${escapeHtml(item.question)}</span>
        <span class="status">${escapeHtml(item.status)}</span>
      `;
      row.addEventListener("click", () => store.select(index));
      queue.appendChild(row);
    });

    renderDetail(detail, store);
  }

  root.ownerDocument.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    const state = store.getState();
    switch (event.key) {
      case "ArrowDown":
      case "j":
        event.preventDefault();
        store.selectNext();
        break;
      case "ArrowUp":
      case "k":
        event.preventDefault();
        store.selectPrevious();
        break;
      case "a":
        if (!state.editing) void store.decide("accept");
        break;
      case "r":
        if (!state.editing) void store.decide("reject");
        break;
      case "e":
        if (!state.editing) store.startEdit();
        break;
      case "Escape":
        store.cancelEdit();
        break;
    }
  });

  store.subscribe(render);
  render();
}

function renderDetail(container: HTMLElement, store: ReviewStore): void {
  const state = store.getState();
  const item = store.selectedItem;
  container.innerHTML = "";
  if (!item) {
    container.innerHTML = `<p class="empty">Nothing selected.</p>`;
    return;
  }
  const figure = document.createElement("figure");
  const img = document.createElement("img");
  img.src = item.image_url;
  img.alt = item.image_id;
  img.addEventListener("error", () => {
    const placeholder = document.createElement("div");
    placeholder.className = "image-placeholder";
    placeholder.textContent = `image unavailable (${item.image_id})`;
    img.replaceWith(placeholder);
  });
  figure.appendChild(img);
  const caption = document.createElement("figcaption");
  caption.textContent = item.caption_text;
  figure.appendChild(caption);
  container.appendChild(figure);

  const body = document.createElement("div");
  body.className = "item-body";
  body.innerHTML = `
    <p class="qa"><strong>Q:</strong> <span id="detail-question">${escapeHtml(item.question)}</span></p>
    <p class="qa"><strong>A:</strong> <span id="detail-answer">${escapeHtml(item.answer)}</span></p>
    <p class="provenance">${escapeHtml(item.provenance.caption_id)} · sentence ${item.provenance.sentence_index} · ${escapeHtml(item.provenance.rule_id)} · ${escapeHtml(item.status)}</p>
  `;
  container.appendChild(body);

  if (state.itemError) {
    const error = document.createElement("p");
    error.className = "item-error";
    error.textContent = state.itemError;
    container.appendChild(error);
  }

  if (state.editing) {
    container.appendChild(editForm(store, item));
    return;
  }

  const actions = document.createElement("div");
  actions.className = "actions";
  for (const [label, action] of [
    ["Accept (a)", "accept"],
    ["Edit (e)", "edit"],
    ["Reject (r)", "reject"],
  ] as const) {
    const button = document.createElement("button");
    button.textContent = label;
    button.dataset.action = action;
    button.addEventListener("click", () => {
      if (action === "edit") store.startEdit();
      else void store.decide(action);
    });
    actions.appendChild(button);
  }
  container.appendChild(actions);
}

function editForm(store: ReviewStore, item: QueueItem): HTMLFormElement {
  const form = document.createElement("form");
  form.className = "edit-form";
  form.innerHTML = `
    <label>Question <input name="question" value="${escapeAttr(item.question)}"></label>
    <label>Answer <input name="answer" value="${escapeAttr(item.answer)}"></label>
    <div class="actions">
      <button type="submit">Save</button>
      <button type="button" data-action="cancel">Cancel</button>
    </div>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const question = (form.elements.namedItem("question") as HTMLInputElement).value;
    const answer = (form.elements.namedItem("answer") as HTMLInputElement).value;
    void store.decide("edit", { question, answer });
  });
  const cancel = form.querySelector("[data-action=cancel]");
  cancel?.addEventListener("click", () => store.cancelEdit());
  return form;
}

function must(root: HTMLElement, selector: string): HTMLElement {
  const node = root.querySelector(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node as HTMLElement;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function escapeAttr(text: string): string {
  return escapeHtml(text).replace(/"/g, "&quot;");
}
