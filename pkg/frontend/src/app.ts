/**
 * Single-page annotation app. Plain DOM, no framework: a dashboard view
 * (create/list/open sessions) and a session view (keyboard-driven batch
 * labeling, per-round metrics chart, dual-annotation conflict surface).
 *
 * Every displayed number comes from a service response; submissions are
 * never optimistic (the UI always re-reads state after the service
 * confirms). Connection failures show a retry control instead of looping.
 */

import { ApiError, Client, ConnectionError, RoundMetrics, SessionHandle } from "./api.js";
import { renderMetricsChart } from "./chart.js";
import {
  LabelingState,
  LabelValue,
  STRATEGIES,
  assignLabel,
  canSubmit,
  labelsPayload,
  moveCursor,
  newLabelingState,
  progress,
  validateConfig,
} from "./state.js";

const GUIDELINES = [
  "Label a post RELATED (1) when it explicitly reacts to, reports on, or",
  "comments about the disaster event itself: impressions, warnings, damage",
  "reports, relief coordination.",
  "Label it UNRELATED (0) otherwise, including metaphorical uses of",
  "disaster words and unrelated chatter.",
  "Keys: 0 / 1 assign a label, arrows move, Enter submits a complete batch.",
].join(" ");

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface AppOptions {
  /** fixed annotator name for dual-annotation sessions */
  annotator?: string;
}

export class App {
  private readonly root: HTMLElement;
  private readonly client: Client;
  private readonly options: AppOptions;

  private view: "dashboard" | "session" = "dashboard";
  private sessions: SessionHandle[] = [];
  private handle: SessionHandle | null = null;
  private metrics: RoundMetrics[] = [];
  private labeling: LabelingState = newLabelingState([]);
  private banner: { kind: "error" | "conflict" | "info"; text: string } | null = null;
  private connectionLost = false;
  private submitting = false;
  private readonly keyHandler = (event: KeyboardEvent) => this.onKey(event);

  constructor(root: HTMLElement, client: Client, options: AppOptions = {}) {
    this.root = root;
    this.client = client;
    this.options = options;
    root.ownerDocument.addEventListener("keydown", this.keyHandler);
  }

  dispose(): void {
    this.root.ownerDocument.removeEventListener("keydown", this.keyHandler);
  }

  // -- data loading --------------------------------------------------------

  async showDashboard(): Promise<void> {
    this.view = "dashboard";
    this.banner = null;
    try {
      this.sessions = await this.client.listSessions();
      this.connectionLost = false;
    } catch (error) {
      this.handleLoadError(error);
    }
    this.render();
  }

  async openSession(id: string): Promise<void> {
    this.view = "session";
    this.banner = null;
    await this.refreshSession(id);
  }

  async refreshSession(id?: string): Promise<void> {
    const sessionId = id ?? this.handle?.session_id;
    if (!sessionId) return;
    try {
      this.handle = await this.client.getSession(sessionId);
      this.metrics = await this.client.getMetrics(sessionId);
      if (this.handle.status === "awaiting_labels") {
        const batch = await this.client.getBatch(sessionId);
        this.labeling = newLabelingState(batch.items);
      } else {
        this.labeling = newLabelingState([]);
      }
      this.connectionLost = false;
      if (this.handle.conflicts.length) {
        this.banner = {
          kind: "conflict",
          text: `annotators disagree on: ${this.handle.conflicts.join(", ")}; resolve by resubmitting in agreement`,
        };
      }
    } catch (error) {
      this.handleLoadError(error);
    }
    this.render();
  }

  private handleLoadError(error: unknown): void {
    if (error instanceof ConnectionError) {
      this.connectionLost = true;
    } else if (error instanceof ApiError) {
      this.banner = { kind: "error", text: error.message };
    } else {
      throw error;
    }
  }

  // -- actions --------------------------------------------------------------

  async createSession(form: {
    corpus: string;
    rounds: number;
    batch_size: number;
    seed_batch_size: number;
    strategy: string;
    seed: number;
    annotators: string;
  }): Promise<void> {
    const problems = validateConfig(form);
    if (!form.corpus.trim()) problems.unshift("corpus path is required");
    if (problems.length) {
      this.banner = { kind: "error", text: problems.join("; ") };
      this.render();
      return;
    }
    const annotators = form.annotators
      .split(",")
      .map((a) => a.trim())
      .filter(Boolean);
    try {
      const handle = await this.client.createSession(
        form.corpus,
        {
          rounds: form.rounds,
          batch_size: form.batch_size,
          seed_batch_size: form.seed_batch_size,
          strategy: form.strategy,
          seed: form.seed,
        },
        annotators.length ? annotators : undefined,
      );
      await this.openSession(handle.session_id);
    } catch (error) {
      this.handleLoadError(error);
      this.render();
    }
  }

  label(value: LabelValue): void {
    this.labeling = assignLabel(this.labeling, value);
    this.render();
  }

  move(delta: number): void {
    this.labeling = moveCursor(this.labeling, delta);
    this.render();
  }

  focusItem(index: number): void {
    this.labeling = { ...this.labeling, cursor: index };
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.handle || !canSubmit(this.labeling) || this.submitting) return;
    this.submitting = true;
    this.render();
    try {
      const outcome = await this.client.postLabels(
        this.handle.session_id,
        labelsPayload(this.labeling),
        this.options.annotator,
      );
      this.banner =
        "status" in outcome && outcome.status === "waiting_for"
          ? { kind: "info", text: `waiting for: ${outcome.remaining.join(", ")}` }
          : null;
      await this.refreshSession();
    } catch (error) {
      if (error instanceof ApiError) {
        // surface the status verbatim, then re-read the authoritative batch
        this.banner = { kind: error.status === 409 ? "conflict" : "error", text: error.message };
        await this.refreshSession();
      } else {
        this.handleLoadError(error);
        this.render();
      }
    } finally {
      this.submitting = false;
      this.render();
    }
  }

  private onKey(event: KeyboardEvent): void {
    if (this.view !== "session" || this.handle?.status !== "awaiting_labels") return;
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "SELECT")) return;
    if (event.key === "0" || event.key === "1") {
      this.label(Number(event.key) as LabelValue);
    } else if (event.key === "ArrowDown" || event.key === "ArrowRight") {
      this.move(1);
    } else if (event.key === "ArrowUp" || event.key === "ArrowLeft") {
      this.move(-1);
    } else if (event.key === "Enter" && canSubmit(this.labeling)) {
      void this.submit();
    } else {
      return;
    }
    event.preventDefault();
  }

  // -- rendering -------------------------------------------------------------

  render(): void {
    this.root.innerHTML =
      this.view === "dashboard" ? this.renderDashboard() : this.renderSession();
    this.wire();
  }

  private renderBanner(): string {
    const parts: string[] = [];
    if (this.connectionLost) {
      parts.push(
        `<div id="connection-error" class="banner banner-connection">` +
          `service unreachable <button id="retry-btn">retry</button></div>`,
      );
    }
    if (this.banner) {
      const id = this.banner.kind === "conflict" ? "conflict-banner" : "error-banner";
      parts.push(`<div id="${id}" class="banner banner-${this.banner.kind}">${esc(this.banner.text)}</div>`);
    }
    return parts.join("");
  }

  private renderDashboard(): string {
    const rows = this.sessions
      .map(
        (s) =>
          `<tr data-session-id="${esc(s.session_id)}">` +
          `<td>${esc(s.session_id)}</td><td>${esc(s.status)}</td>` +
          `<td>${s.round}</td><td>${s.labeled_count}</td>` +
          `<td><button class="open-btn" data-session-id="${esc(s.session_id)}">open</button></td></tr>`,
      )
      .join("");
    const strategyOptions = STRATEGIES.map(
      (s) => `<option value="${s}"${s === "gcs" ? " selected" : ""}>${s}</option>`,
    ).join("");
    return `
      <header><h1>crisisal annotation</h1></header>
      ${this.renderBanner()}
      <section id="view-dashboard">
        <h2>new session</h2>
        <form id="create-form">
          <label>corpus path <input name="corpus" id="f-corpus" placeholder="/data/pool.jsonl"></label>
          <label>rounds <input name="rounds" id="f-rounds" type="number" value="10"></label>
          <label>batch size <input name="batch_size" id="f-batch" type="number" value="20"></label>
          <label>seed batch <input name="seed_batch_size" id="f-seed-batch" type="number" value="20"></label>
          <label>strategy <select name="strategy" id="f-strategy">${strategyOptions}</select></label>
          <label>seed <input name="seed" id="f-seed" type="number" value="0"></label>
          <label>annotators <input name="annotators" id="f-annotators" placeholder="optional: ada, grace"></label>
          <button type="submit" id="create-btn">create</button>
        </form>
        <h2>sessions</h2>
        <table id="session-list">
          <thead><tr><th>id</th><th>status</th><th>round</th><th>labeled</th><th></th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
        <button id="refresh-btn">refresh</button>
      </section>`;
  }

  private renderItems(): string {
    return this.labeling.items
      .map((item, index) => {
        const label = this.labeling.labels.get(item.doc_id);
        const state = label === undefined ? "unlabeled" : label === 1 ? "related" : "unrelated";
        const conflict = this.handle?.conflicts.includes(item.doc_id) ? " conflict" : "";
        const focus = index === this.labeling.cursor ? " focused" : "";
        return (
          `<li class="item ${state}${focus}${conflict}" data-doc-id="${esc(item.doc_id)}" data-state="${state}" data-index="${index}">` +
          `<span class="lang">${esc(item.lang)}</span>` +
          `<span class="text">${esc(item.text)}</span>` +
          `<span class="controls">` +
          `<button class="label-0" data-doc-id="${esc(item.doc_id)}" data-index="${index}">0 unrelated</button>` +
          `<button class="label-1" data-doc-id="${esc(item.doc_id)}" data-index="${index}">1 related</button>` +
          `</span></li>`
        );
      })
      .join("");
  }

  private renderSession(): string {
    if (!this.handle) {
      return `${this.renderBanner()}<p id="session-missing">no session loaded</p>
        <button id="back-btn">back</button>`;
    }
    const { labeled, total } = progress(this.labeling);
    const finished = this.handle.status === "finished";
    const awaiting = this.handle.status === "awaiting_labels";
    const submitDisabled = !canSubmit(this.labeling) || this.submitting ? " disabled" : "";
    const dual = this.handle.annotators?.length
      ? `<p id="dual-state">annotators: ${esc(this.handle.annotators.join(", "))};
         submitted: <span id="dual-submitted">${esc(this.handle.dual_submitted.join(", ") || "none")}</span></p>`
      : "";
    const batchSection = awaiting
      ? `<section id="batch-view">
           <p id="progress" data-labeled="${labeled}" data-total="${total}">${labeled} / ${total} labeled</p>
           <ol id="batch-list">${this.renderItems()}</ol>
           <button id="submit-btn"${submitDisabled}>submit batch</button>
         </section>`
      : finished
        ? `<p id="finished-note">session finished: all rounds labeled</p>`
        : "";
    const metricsRows = this.metrics
      .map(
        (m) =>
          `<tr data-round="${m.round}"><td>${m.round}</td><td>${m.labeled_count}</td>` +
          `<td class="m-accuracy">${m.accuracy}</td><td class="m-f1-unrelated">${m.f1_unrelated}</td>` +
          `<td class="m-f1-related">${m.f1_related}</td></tr>`,
      )
      .join("");
    return `
      <header><h1>crisisal annotation</h1><button id="back-btn">sessions</button></header>
      ${this.renderBanner()}
      <section id="view-session" data-session-id="${esc(this.handle.session_id)}">
        <p id="session-summary">
          session <code id="session-id">${esc(this.handle.session_id)}</code>
          &middot; status <span id="session-status">${esc(this.handle.status)}</span>,
          round <span id="session-round">${this.handle.round}</span>,
          labeled <span id="session-labeled">${this.handle.labeled_count}</span>
        </p>
        ${dual}
        ${batchSection}
        <section id="metrics-view">
          <h2>metrics by round</h2>
          <div id="metrics-chart">${this.metrics.length ? renderMetricsChart(this.metrics) : "<p>no rounds completed yet</p>"}</div>
          <table id="metrics-table">
            <thead><tr><th>round</th><th>labeled</th><th>accuracy</th><th>F1 unrelated</th><th>F1 related</th></tr></thead>
            <tbody>${metricsRows}</tbody>
          </table>
        </section>
        <details id="help-panel"><summary>labeling guidelines</summary><p>${GUIDELINES}</p></details>
      </section>`;
  }

  private wire(): void {
    const doc = this.root;
    doc.querySelector<HTMLButtonElement>("#retry-btn")?.addEventListener("click", () => {
      void (this.view === "dashboard" ? this.showDashboard() : this.refreshSession());
    });
    doc.querySelector<HTMLButtonElement>("#refresh-btn")?.addEventListener("click", () => {
      void this.showDashboard();
    });
    doc.querySelector<HTMLButtonElement>("#back-btn")?.addEventListener("click", () => {
      void this.showDashboard();
    });
    doc.querySelectorAll<HTMLButtonElement>(".open-btn").forEach((button) => {
      button.addEventListener("click", () => void this.openSession(button.dataset.sessionId!));
    });
    doc.querySelector<HTMLFormElement>("#create-form")?.addEventListener("submit", (event) => {
      event.preventDefault();
      const value = (id: string) =>
        doc.querySelector<HTMLInputElement | HTMLSelectElement>(id)!.value;
      void this.createSession({
        corpus: value("#f-corpus"),
        rounds: Number(value("#f-rounds")),
        batch_size: Number(value("#f-batch")),
        seed_batch_size: Number(value("#f-seed-batch")),
        strategy: value("#f-strategy"),
        seed: Number(value("#f-seed")),
        annotators: value("#f-annotators"),
      });
    });
    doc.querySelectorAll<HTMLButtonElement>(".label-0").forEach((button) => {
      button.addEventListener("click", () => {
        this.focusItem(Number(button.dataset.index));
        this.label(0);
      });
    });
    doc.querySelectorAll<HTMLButtonElement>(".label-1").forEach((button) => {
      button.addEventListener("click", () => {
        this.focusItem(Number(button.dataset.index));
        this.label(1);
      });
    });
    doc.querySelector<HTMLButtonElement>("#submit-btn")?.addEventListener("click", () => {
      void this.submit();
    });
  }
}

export function createApp(root: HTMLElement, client: Client, options: AppOptions = {}): App {
  const app = new App(root, client, options);
  app.render();
  return app;
}
