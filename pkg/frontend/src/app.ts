import { AuditBrowser, type AuditRowView } from "./audit.js";
import { ChallengeQueue, type ChallengeView } from "./challenges.js";
import { GatewayClient } from "./client.js";
import { Poller } from "./poller.js";
import { PolicyDraft, type SubmitResult } from "./policy.js";
import type { Platform, Sensitivity } from "./types.js";

/**
 * Browser entry point. All state lives in the service objects above;
 * this file only maps their outputs onto the DOM and button handlers
 * back into them, so everything interesting stays testable without a
 * browser.
 */

const PLATFORMS: Platform[] = ["Alexa", "GoogleHome"];

interface ConsoleState {
  client: GatewayClient;
  queue: ChallengeQueue;
  audit: AuditBrowser;
  draft: PolicyDraft | null;
  connected: boolean;
  notices: string[];
}

export function startConsole(root: HTMLElement, baseUrl: string): void {
  const client = new GatewayClient(baseUrl);
  const state: ConsoleState = {
    client,
    queue: new ChallengeQueue(client),
    audit: new AuditBrowser(client),
    draft: null,
    connected: true,
    notices: [],
  };

  root.innerHTML = `
    <div id="banner" class="banner hidden"></div>
    <div id="notices"></div>
    <section>
      <h2>Pending challenges</h2>
      <table id="queue"><tbody></tbody></table>
    </section>
    <section>
      <h2>Policy</h2>
      <label>Platform
        <select id="policy-platform">
          ${PLATFORMS.map((p) => `<option>${p}</option>`).join("")}
        </select>
      </label>
      <div id="policy-rules"></div>
      <button id="policy-submit" disabled>Submit policy</button>
      <span id="policy-status"></span>
    </section>
    <section>
      <h2>Audit log</h2>
      <label>Action <input id="audit-action" placeholder="Challenge"></label>
      <label>Label <input id="audit-label" placeholder="OpenClose"></label>
      <button id="audit-reload">Reload</button>
      <table id="audit"><tbody></tbody></table>
    </section>
  `;

  const rerenderQueue = () =>
    renderQueue(root, state.queue.views(Date.now()), state);
  const poller = new Poller(async () => {
    const views = await state.queue.refresh(Date.now());
    state.notices.push(...state.queue.drainNotices());
    renderQueue(root, views, state);
  });
  poller.onConnectivityChange((connected) => {
    state.connected = connected;
    renderBanner(root, connected);
    // Re-render so action buttons pick up the disabled state.
    rerenderQueue();
  });

  wirePolicy(root, state);
  wireAudit(root, state);
  poller.start();
}

type Rerender = () => void;

function renderBanner(root: HTMLElement, connected: boolean): void {
  const banner = root.querySelector<HTMLElement>("#banner");
  if (!banner) return;
  banner.classList.toggle("hidden", connected);
  banner.textContent = connected
    ? ""
    : "gateway unreachable; actions disabled until it answers again";
}

function renderQueue(
  root: HTMLElement,
  views: ChallengeView[],
  state: ConsoleState,
): void {
  const body = root.querySelector<HTMLElement>("#queue tbody");
  if (!body) return;
  const rerender = () =>
    renderQueue(root, state.queue.views(Date.now()), state);
  body.replaceChildren(
    ...views.map((view) => challengeRow(view, state, rerender)),
  );
  const noticeBox = root.querySelector<HTMLElement>("#notices");
  if (noticeBox && state.notices.length > 0) {
    for (const text of state.notices.splice(0)) {
      const div = document.createElement("div");
      div.className = "notice";
      div.textContent = text;
      noticeBox.append(div);
    }
  }
}

function challengeRow(
  view: ChallengeView,
  state: ConsoleState,
  rerender: Rerender,
): HTMLElement {
  const row = document.createElement("tr");
  const enabled = view.actionable && state.connected;
  row.innerHTML = `
    <td>${escapeHtml(view.text)}</td>
    <td>${escapeHtml(view.platform)}</td>
    <td>${escapeHtml(view.matchedAxis)}/${escapeHtml(view.matchedLabel)}</td>
    <td class="countdown">${view.countdownText}</td>
  `;
  for (const verdict of ["approve", "deny"] as const) {
    const btn = document.createElement("button");
    btn.textContent = verdict;
    btn.disabled = !enabled;
    btn.addEventListener("click", () => {
      void state.queue[verdict](view.id).then((outcome) => {
        if (outcome.kind === "superseded") {
          state.notices.push(`already ${outcome.status}: ${view.text}`);
        }
        rerender();
      });
    });
    const cell = document.createElement("td");
    cell.append(btn);
    row.append(cell);
  }
  return row;
}

function wirePolicy(rootEl: HTMLElement, state: ConsoleState): void {
  const select = rootEl.querySelector<HTMLSelectElement>("#policy-platform");
  const submit = rootEl.querySelector<HTMLButtonElement>("#policy-submit");
  const statusEl = rootEl.querySelector<HTMLElement>("#policy-status");
  if (!select || !submit || !statusEl) return;

  const load = async () => {
    const doc = await state.client.getPolicy(select.value as Platform);
    state.draft = PolicyDraft.fromServer(doc);
    renderPolicy(rootEl, state, submit);
  };

  select.addEventListener("change", () => void load());
  submit.addEventListener("click", () => {
    const draft = state.draft;
    if (!draft) return;
    void draft.submit(state.client).then((result: SubmitResult) => {
      if (result.ok) {
        statusEl.textContent = `stored version ${result.stored.version}`;
      } else if (result.reason === "conflict") {
        statusEl.textContent = `version conflict: server is at ${result.currentVersion}, reload`;
      } else if (result.reason === "no-op") {
        statusEl.textContent = "no changes to submit";
      } else {
        statusEl.textContent = "rejected; see rule annotations";
      }
      renderPolicy(rootEl, state, submit);
    });
  });
  void load();
}

function renderPolicy(
  rootEl: HTMLElement,
  state: ConsoleState,
  submit: HTMLButtonElement,
): void {
  const box = rootEl.querySelector<HTMLElement>("#policy-rules");
  const draft = state.draft;
  if (!box || !draft) return;
  submit.disabled = !draft.canSubmit || !state.connected;
  const doc = draft.document;
  box.replaceChildren();
  for (const [axis, labels] of Object.entries(doc.rules)) {
    for (const [label, sensitivity] of Object.entries(labels)) {
      const line = document.createElement("div");
      line.className = "rule";
      const toggle = document.createElement("button");
      toggle.textContent = `${axis}/${label}: ${sensitivity}`;
      toggle.addEventListener("click", () => {
        const next: Sensitivity =
          draft.ruleFor(axis, label) === "Sensitive"
            ? "NonSensitive"
            : "Sensitive";
        draft.setRule(axis, label, next);
        renderPolicy(rootEl, state, submit);
      });
      line.append(toggle);
      for (const violation of draft.violationsFor(axis, label)) {
        const mark = document.createElement("span");
        mark.className = "violation";
        mark.textContent = violation.message;
        line.append(mark);
      }
      box.append(line);
    }
  }
  // Violations that do not anchor to a rule (bad min_confidence etc.).
  for (const violation of draft.violations.filter((v) => !v.label)) {
    const mark = document.createElement("div");
    mark.className = "violation";
    mark.textContent = violation.message;
    box.append(mark);
  }
}

function wireAudit(rootEl: HTMLElement, state: ConsoleState): void {
  const reload = rootEl.querySelector<HTMLButtonElement>("#audit-reload");
  const actionInput = rootEl.querySelector<HTMLInputElement>("#audit-action");
  const labelInput = rootEl.querySelector<HTMLInputElement>("#audit-label");
  if (!reload || !actionInput || !labelInput) return;
  reload.addEventListener("click", () => {
    state.audit.setActionFilter(actionInput.value.trim() || undefined);
    state.audit.setLabelFilter(labelInput.value.trim() || undefined);
    void state.audit.load().then((rows) => renderAudit(rootEl, rows));
  });
}

function renderAudit(rootEl: HTMLElement, rows: AuditRowView[]): void {
  const body = rootEl.querySelector<HTMLElement>("#audit tbody");
  if (!body) return;
  body.replaceChildren(
    ...rows.map((row) => {
      const tr = document.createElement("tr");
      tr.innerHTML = `
        <td>${new Date(row.tsMs).toISOString()}</td>
        <td>${escapeHtml(row.text)}</td>
        <td>${row.heardAs ? `heard: ${escapeHtml(row.heardAs)}` : ""}</td>
        <td>${escapeHtml(row.topPrediction)}</td>
        <td>${escapeHtml(row.action)}</td>
        <td>${escapeHtml(row.outcome)}</td>
        <td>${row.totalLatencyUs} us</td>
      `;
      return tr;
    }),
  );
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
