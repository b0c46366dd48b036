import type { GatewayClient } from "./client.js";
import { ApiError } from "./client.js";
import type { PolicyDocument, Sensitivity } from "./types.js";

/** Server violation normalized for inline rendering. */
export interface RuleViolation {
  message: string;
  axis?: string;
  label?: string;
}

export type SubmitResult =
  | { ok: true; stored: PolicyDocument }
  | { ok: false; reason: "no-op" }
  | { ok: false; reason: "violations"; violations: RuleViolation[] }
  | { ok: false; reason: "conflict"; currentVersion: number };

/**
 * Editable copy of one platform's policy document.
 *
 * Tracks whether the draft differs from what the server sent (the
 * no-op guard) and keeps the violations from the last rejected submit
 * so they can be shown next to the offending rules. Any edit clears
 * them, since the previous rejection no longer describes the draft.
 */
export class PolicyDraft {
  violations: RuleViolation[] = [];

  private constructor(
    private baseline: PolicyDocument,
    private draft: PolicyDocument,
  ) {}

  static fromServer(doc: PolicyDocument): PolicyDraft {
    return new PolicyDraft(clone(doc), clone(doc));
  }

  get platform(): string {
    return this.draft.platform;
  }

  get version(): number {
    return this.draft.version;
  }

  get document(): PolicyDocument {
    return clone(this.draft);
  }

  get dirty(): boolean {
    return (
      JSON.stringify(editableSlice(this.draft)) !==
      JSON.stringify(editableSlice(this.baseline))
    );
  }

  get canSubmit(): boolean {
    return this.dirty && this.violations.length === 0;
  }

  ruleFor(axis: string, label: string): Sensitivity | undefined {
    return this.draft.rules[axis]?.[label];
  }

  setRule(axis: string, label: string, sensitivity: Sensitivity): void {
    const axisRules = this.draft.rules[axis] ?? {};
    axisRules[label] = sensitivity;
    this.draft.rules[axis] = axisRules;
    this.violations = [];
  }

  removeRule(axis: string, label: string): void {
    const axisRules = this.draft.rules[axis];
    if (!axisRules) return;
    delete axisRules[label];
    this.violations = [];
  }

  setMinConfidence(value: number): void {
    this.draft.min_confidence = value;
    this.violations = [];
  }

  setDefaultSensitivity(value: Sensitivity): void {
    this.draft.default_sensitivity = value;
    this.violations = [];
  }

  /** Violations anchored to one rule row; field-level ones have no axis. */
  violationsFor(axis: string, label: string): RuleViolation[] {
    return this.violations.filter((v) => v.axis === axis && v.label === label);
  }

  async submit(client: GatewayClient): Promise<SubmitResult> {
    if (!this.dirty) {
      return { ok: false, reason: "no-op" };
    }
    if (this.violations.length > 0) {
      return { ok: false, reason: "violations", violations: this.violations };
    }
    try {
      const stored = await client.putPolicy(this.draft);
      this.baseline = clone(stored);
      this.draft = clone(stored);
      this.violations = [];
      return { ok: true, stored };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.violations = normalizeViolations(err.detail);
        return { ok: false, reason: "violations", violations: this.violations };
      }
      if (err instanceof ApiError && err.status === 409) {
        const current = versionFromConflict(err.detail);
        return { ok: false, reason: "conflict", currentVersion: current };
      }
      throw err;
    }
  }
}

function editableSlice(doc: PolicyDocument) {
  return {
    default_sensitivity: doc.default_sensitivity,
    min_confidence: doc.min_confidence,
    rules: doc.rules,
  };
}

function clone(doc: PolicyDocument): PolicyDocument {
  return JSON.parse(JSON.stringify(doc)) as PolicyDocument;
}

/** The 422 body is {violations: [...]} with dict or string entries. */
export function normalizeViolations(detail: unknown): RuleViolation[] {
  if (!detail || typeof detail !== "object") {
    return [{ message: String(detail ?? "policy rejected") }];
  }
  const raw = (detail as { violations?: unknown }).violations;
  if (!Array.isArray(raw)) {
    return [{ message: "policy rejected" }];
  }
  return raw.map((entry) => {
    if (typeof entry === "string") {
      return { message: entry };
    }
    if (entry && typeof entry === "object") {
      const e = entry as Record<string, unknown>;
      const out: RuleViolation = {
        message: String(e.message ?? JSON.stringify(entry)),
      };
      if (typeof e.axis === "string") out.axis = e.axis;
      if (typeof e.label === "string") out.label = e.label;
      return out;
    }
    return { message: String(entry) };
  });
}

function versionFromConflict(detail: unknown): number {
  if (detail && typeof detail === "object" && "current_version" in detail) {
    return Number((detail as { current_version: unknown }).current_version);
  }
  return -1;
}
