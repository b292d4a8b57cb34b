// Integration against a real fixture-backed service: the store drives the
// same HTTP surface the browser UI uses, so every asserted number is an
// API response.
import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { PlannerStore } from "../src/state.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const REPO = fileURLToPath(new URL("../..", import.meta.url));
const FIXTURE = join(REPO, "src", "dynsched", "data", "fixtures", "ui_demo.json");
const MOTIVATING = JSON.parse(
  readFileSync(join(REPO, "src", "dynsched", "data", "motivating_instance.json"), "utf8"),
);
const MOTIVATING_UI_NL = JSON.parse(readFileSync(FIXTURE, "utf8")).nl as string;

let server: ChildProcess;

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 60; i++) {
    try {
      const resp = await fetch(`${BASE}/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 500));
  }
  throw new Error("service did not become healthy");
}

beforeAll(async () => {
  const sessions = mkdtempSync(join(tmpdir(), "dynsched-ui-"));
  server = spawn(
    "python3",
    [
      "-m",
      "dynsched.cli",
      "serve",
      "--port",
      String(PORT),
      "--session-dir",
      sessions,
      "--backend",
      "fixture",
      "--fixture",
      FIXTURE,
    ],
    { stdio: "ignore" },
  );
  await waitForHealth();
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe("diff integrity over scripted interactions", () => {
  it("highlighted cells == /diff entries == hamming counter for 20 interactions", async () => {
    const store = new PlannerStore(new ApiClient(BASE));
    await store.createSession("static_nurse", MOTIVATING.instance);
    await store.solve();
    expect(store.state.schedule?.status).toBe("Optimal");

    for (let i = 0; i < 20; i++) {
      const d = i % 7;
      const s = i % 3;
      const n = (d + s + (d % 2)) % 4;
      const resp = await store.submitConstraint("dsl", `constraint X[${n},${d},${s}] == 1`);
      expect(resp, `interaction ${i} failed: ${JSON.stringify(store.state.banner)}`).not.toBeNull();

      const highlighted = store.highlightedCells();
      const counter = store.hammingCounter();
      const serverHamming = await store.refreshDiffFromServer();
      expect(highlighted, `interaction ${i}`).toBe(resp!.diff.length);
      expect(counter, `interaction ${i}`).toBe(resp!.diff.length);
      expect(serverHamming, `interaction ${i}`).toBe(resp!.diff.length);

      if (i % 2 === 0) {
        await store.accept();
        expect(store.state.pending).toBeNull();
      } else {
        await store.discard();
        expect(store.highlightedCells()).toBe(0);
      }
    }
    expect(store.state.history.length).toBe(10);
  }, 120_000);
});

describe("repair-loop surfacing", () => {
  it("a fixture forcing two fix attempts shows attempts = 2 and lands in history", async () => {
    const store = new PlannerStore(new ApiClient(BASE));
    await store.createSession("static_nurse", MOTIVATING.instance);
    await store.solve();

    const resp = await store.submitConstraint("nl", MOTIVATING_UI_NL);
    expect(resp, JSON.stringify(store.state.banner)).not.toBeNull();
    expect(resp!.attempts).toBe(2);
    expect(store.state.pending?.attempts).toBe(2);

    const trace = await store.tracePanel();
    expect(trace.attempts).toBe(2);
    expect(trace.patchText).toContain("X[3, 6, s] == 0");

    await store.accept();
    const last = store.state.history.at(-1);
    expect(last?.mode).toBe("nl");
    expect(last?.patch_text).toContain("X[3, 6, s] == 0");
    expect(last?.attempts).toBe(2);
  }, 60_000);
});

describe("error surfacing", () => {
  it("DSL errors arrive as banners with the server's error class and span", async () => {
    const store = new PlannerStore(new ApiClient(BASE));
    await store.createSession("static_nurse", MOTIVATING.instance);
    await store.solve();
    const resp = await store.submitConstraint("dsl", "constraint forall : x");
    expect(resp).toBeNull();
    expect(store.state.banner?.kind).toBe("error");
    expect(store.state.banner?.errorClass).toBe("ParseError");
    expect(store.state.banner?.span?.line).toBe(1);
  });

  it("an NL prompt unknown to the fixture surfaces BackendError", async () => {
    const store = new PlannerStore(new ApiClient(BASE));
    await store.createSession("static_nurse", MOTIVATING.instance);
    await store.solve();
    const resp = await store.submitConstraint("nl", "complete gibberish the fixture never saw");
    expect(resp).toBeNull();
    expect(store.state.banner?.errorClass).toBe("BackendError");
  });
});
