// Planner session store: every displayed number comes from an API
// response; this module owns the round trips and the derived view state.

import {
  ApiClient,
  ApiError,
  ConstraintResponse,
  DiffEntry,
  HistoryStep,
  PlanSections,
  ScheduleDoc,
  SolveReport,
} from "./api.js";
import { buildGrid, GridView, highlightedCellCount } from "./grid.js";

export interface Banner {
  kind: "info" | "error";
  status?: string;
  objective?: number | null;
  bounds?: [number | string, number | string];
  errorClass?: string;
  message?: string;
  span?: { line: number; col: number };
}

export interface PendingView {
  patchText: string;
  plan: PlanSections | null;
  attempts: number;
  report: SolveReport;
  diff: DiffEntry[];
  hamming: number;
}

export interface PlannerState {
  sessionId: string | null;
  schedule: ScheduleDoc | null;
  grid: GridView | null;
  pending: PendingView | null;
  banner: Banner | null;
  history: HistoryStep[];
  // perturbation control: disabled until an initial schedule was accepted
  thresholdEnabled: boolean;
  tPerturb: number | null;
}

export class PlannerStore {
  state: PlannerState = {
    sessionId: null,
    schedule: null,
    grid: null,
    pending: null,
    banner: null,
    history: [],
    thresholdEnabled: false,
    tPerturb: null,
  };

  private listeners: (() => void)[] = [];

  constructor(readonly api: ApiClient) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  /** Hamming counter shown next to the diff view. */
  hammingCounter(): number {
    return this.state.pending ? this.state.pending.hamming : 0;
  }

  /** Count of highlighted diff entries in the rendered grid. */
  highlightedCells(): number {
    return this.state.grid ? highlightedCellCount(this.state.grid) : 0;
  }

  async createSession(kind: string, instance: unknown): Promise<void> {
    const { id } = await this.api.createSession(kind, instance);
    this.state.sessionId = id;
    this.state.schedule = null;
    this.state.grid = null;
    this.state.pending = null;
    this.state.history = [];
    this.state.thresholdEnabled = false;
    this.emit();
  }

  private sid(): string {
    if (!this.state.sessionId) throw new Error("no session");
    return this.state.sessionId;
  }

  async solve(): Promise<void> {
    try {
      const { report } = await this.api.solve(this.sid());
      this.state.banner = {
        kind: "info",
        status: report.status,
        bounds: [report.lower_bound, report.upper_bound],
      };
      await this.refreshSchedule();
    } catch (err) {
      this.fail(err);
    }
  }

  async refreshSchedule(): Promise<void> {
    const doc = await this.api.schedule(this.sid());
    this.state.schedule = doc;
    const diff = this.state.pending ? this.state.pending.diff : [];
    this.state.grid = buildGrid(doc, diff);
    this.emit();
  }

  async submitConstraint(mode: "nl" | "dsl", text: string): Promise<ConstraintResponse | null> {
    try {
      const tPerturb =
        this.state.thresholdEnabled && this.state.tPerturb !== null
          ? this.state.tPerturb
          : undefined;
      const resp = await this.api.addConstraint(this.sid(), mode, text, tPerturb);
      this.state.pending = {
        patchText: resp.patch_text,
        plan: resp.plan,
        attempts: resp.attempts,
        report: resp.report,
        diff: resp.diff,
        hamming: resp.hamming,
      };
      this.state.banner = {
        kind: "info",
        status: resp.report.status,
        bounds: [resp.report.lower_bound, resp.report.upper_bound],
      };
      if (this.state.schedule) {
        // old grid + highlighted changes (side-by-side view keeps the old
        // labels; the new schedule is adopted on accept)
        this.state.grid = buildGrid(this.state.schedule, resp.diff);
      }
      this.emit();
      return resp;
    } catch (err) {
      this.fail(err);
      return null;
    }
  }

  async accept(): Promise<void> {
    try {
      await this.api.accept(this.sid());
      this.state.pending = null;
      this.state.thresholdEnabled = true; // an initial schedule is accepted
      await this.refreshSchedule();
      await this.refreshHistory();
    } catch (err) {
      this.fail(err);
    }
  }

  async discard(): Promise<void> {
    try {
      await this.api.discard(this.sid());
      this.state.pending = null;
      if (this.state.schedule) {
        this.state.grid = buildGrid(this.state.schedule, []);
      }
      this.emit();
    } catch (err) {
      this.fail(err);
    }
  }

  async refreshHistory(): Promise<void> {
    const resp = await this.api.history(this.sid());
    this.state.history = resp.steps;
    this.emit();
  }

  async refreshDiffFromServer(): Promise<number> {
    const resp = await this.api.diff(this.sid());
    return resp.hamming;
  }

  /** Trace panel contents: plan sections, patch text, fix attempts. */
  async tracePanel(): Promise<{ attempts: number; patchText?: string; plan: PlanSections | null }> {
    const resp = await this.api.trace(this.sid());
    return { attempts: resp.attempts, patchText: resp.patch_text, plan: resp.plan };
  }

  setThreshold(value: number | null): void {
    this.state.tPerturb = value;
    this.emit();
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.state.banner = {
        kind: "error",
        errorClass: err.detail.error,
        message: err.detail.message,
        span: err.detail.span
          ? { line: err.detail.span.line, col: err.detail.span.col }
          : undefined,
      };
    } else {
      this.state.banner = { kind: "error", errorClass: "Error", message: String(err) };
    }
    this.emit();
  }
}
