// Browser entry: renders the planner view and wires controls to the store.
// All logic lives in state.ts/grid.ts; this file only touches the DOM.

import { ApiClient } from "./api.js";
import { changedCellKeys, describeChange } from "./grid.js";
import { PlannerStore } from "./state.js";

const api = new ApiClient(localStorage.getItem("dynsched:base") ?? "http://127.0.0.1:8787");
const store = new PlannerStore(api);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

function renderBanner(): HTMLElement {
  const banner = store.state.banner;
  if (!banner) return el("div", { class: "banner empty" });
  if (banner.kind === "error") {
    const spanInfo = banner.span ? ` at line ${banner.span.line}, col ${banner.span.col}` : "";
    return el(
      "div",
      { class: "banner error" },
      `${banner.errorClass}${spanInfo}: ${banner.message ?? ""}`,
    );
  }
  const bounds = banner.bounds ? ` bounds [${banner.bounds[0]}, ${banner.bounds[1]}]` : "";
  return el("div", { class: "banner info" }, `${banner.status ?? ""}${bounds}`);
}

function renderGrid(): HTMLElement {
  const grid = store.state.grid;
  if (!grid) return el("div", { class: "grid empty" }, "no schedule yet - run solve");
  const changed = changedCellKeys(grid);
  const head = el("tr", {}, el("th"), ...grid.columns.map((c) => el("th", {}, c)));
  const body = grid.cells.map((row, r) =>
    el(
      "tr",
      {},
      el("th", {}, grid.rowLabels[r]),
      ...row.map((cell, c) => {
        const td = el("td", { class: changed.has(`${r}:${c}`) ? "cell changed" : "cell" });
        td.append(cell.label || "·");
        for (const entry of cell.changes) {
          td.append(el("span", { class: "delta", title: describeChange(entry) }, "*"));
        }
        return td;
      }),
    ),
  );
  const counter = el(
    "div",
    { class: "hamming" },
    `changed cells: ${store.hammingCounter()}`,
  );
  return el("div", { class: "grid" }, el("table", {}, head, ...body), counter);
}

function renderTrace(): HTMLElement {
  const pending = store.state.pending;
  if (!pending) return el("div", { class: "trace empty" });
  const plan = pending.plan;
  const planBlock = plan
    ? el(
        "pre",
        { class: "plan" },
        `New Parameters: ${plan.new_params.map(([n]) => n).join(", ") || "None"}\n` +
          `New Variables: ${plan.new_vars.map(([n]) => n).join(", ") || "None"}\n` +
          `New Constraints: ${plan.new_constraints_text}`,
      )
    : el("pre", { class: "plan" }, "(dsl mode: no plan)");
  return el(
    "div",
    { class: "trace" },
    el("div", {}, `attempts: ${pending.attempts}`),
    planBlock,
    el("pre", { class: "patch" }, pending.patchText),
  );
}

function renderHistory(): HTMLElement {
  const items = store.state.history.map((step, i) =>
    el(
      "li",
      {},
      el("b", {}, `${i + 1}. [${step.mode}] `),
      step.text,
      el("pre", { class: "patch small" }, step.patch_text),
    ),
  );
  return el("div", { class: "history" }, el("ol", {}, ...items));
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren(
    renderBanner(),
    renderGrid(),
    el(
      "div",
      { class: "controls" },
      (() => {
        const input = el("textarea", { id: "nl", rows: "2", placeholder: "describe the disturbance..." });
        const dslToggle = el("input", { type: "checkbox", id: "as-dsl" });
        const threshold = el("input", {
          type: "number",
          id: "t",
          min: "0",
          placeholder: "no perturbation bound",
        }) as HTMLInputElement;
        if (!store.state.thresholdEnabled) threshold.setAttribute("disabled", "1");
        threshold.addEventListener("change", () => {
          store.setThreshold(threshold.value === "" ? null : Number(threshold.value));
        });
        const submit = el("button", { id: "submit" }, "propose patch");
        submit.addEventListener("click", () => {
          const mode = (dslToggle as HTMLInputElement).checked ? "dsl" : "nl";
          void store.submitConstraint(mode, (input as HTMLTextAreaElement).value);
        });
        const solveBtn = el("button", { id: "solve" }, "solve");
        solveBtn.addEventListener("click", () => void store.solve());
        const acceptBtn = el("button", { id: "accept" }, "accept");
        acceptBtn.addEventListener("click", () => void store.accept());
        const discardBtn = el("button", { id: "discard" }, "discard");
        discardBtn.addEventListener("click", () => void store.discard());
        return el(
          "div",
          {},
          input,
          el("label", {}, dslToggle, "edit as DSL"),
          el("label", {}, "max changes ", threshold),
          solveBtn,
          submit,
          acceptBtn,
          discardBtn,
        );
      })(),
    ),
    renderTrace(),
    renderHistory(),
  );
}

store.onChange(render);
render();

// expose for the browser console and ad-hoc session loading
(window as unknown as { dynsched: unknown }).dynsched = { api, store };
