import type { GatewayClient } from "./client.js";
import { ApiError } from "./client.js";
import type { ChallengeRecord, ChallengeStatus } from "./types.js";

/** Row model the queue table renders. Countdown never goes negative. */
export interface ChallengeView {
  id: string;
  auditId: string;
  text: string;
  platform: string;
  matchedLabel: string;
  matchedAxis: string;
  confidence: number;
  createdAt: number;
  expiresAt: number;
  remainingMs: number;
  countdownText: string;
  actionable: boolean;
}

/** What happened when the operator pressed approve or deny. */
export type RespondOutcome =
  | { kind: "final"; status: ChallengeStatus }
  | { kind: "superseded"; status: ChallengeStatus }
  | { kind: "gone" };

export function toView(record: ChallengeRecord, nowMs: number): ChallengeView {
  const remaining = Math.max(0, record.expires_at - nowMs);
  return {
    id: record.id,
    auditId: record.audit_id,
    text: record.text,
    platform: record.platform,
    matchedLabel: record.matched_label,
    matchedAxis: record.matched_axis,
    confidence: record.confidence,
    createdAt: record.created_at,
    expiresAt: record.expires_at,
    remainingMs: remaining,
    countdownText: formatCountdown(remaining),
    actionable: record.status === "Pending" && remaining > 0,
  };
}

export function formatCountdown(remainingMs: number): string {
  if (remainingMs <= 0) return "expired";
  const totalSeconds = Math.ceil(remainingMs / 1000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

/**
 * Holds the operator's view of pending challenges.
 *
 * The queue has no timer of its own; the page poller calls refresh()
 * and retick() and passes the clock in, which keeps this testable.
 */
export class ChallengeQueue {
  private records: ChallengeRecord[] = [];
  private notices: string[] = [];

  constructor(private readonly client: GatewayClient) {}

  /** Pull the server's pending list. Server orders newest first. */
  async refresh(nowMs: number): Promise<ChallengeView[]> {
    this.records = await this.client.listPendingChallenges();
    return this.views(nowMs);
  }

  /** Recompute countdowns between polls without a network call. */
  views(nowMs: number): ChallengeView[] {
    return this.records.map((r) => toView(r, nowMs));
  }

  /** Notices accumulated since the last drain (404 removals etc.). */
  drainNotices(): string[] {
    const out = this.notices;
    this.notices = [];
    return out;
  }

  async approve(id: string): Promise<RespondOutcome> {
    return this.respond(id, "approve");
  }

  async deny(id: string): Promise<RespondOutcome> {
    return this.respond(id, "deny");
  }

  private async respond(
    id: string,
    verdict: "approve" | "deny",
  ): Promise<RespondOutcome> {
    try {
      const resp = await this.client.respondToChallenge(id, verdict);
      this.drop(id);
      return { kind: "final", status: resp.status as ChallengeStatus };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Raced with expiry or another operator: show the actual
        // status instead of the optimistic one.
        const status = statusFromConflict(err.detail);
        this.drop(id);
        this.notices.push(`challenge ${id} was already ${status}`);
        return { kind: "superseded", status };
      }
      if (err instanceof ApiError && err.status === 404) {
        this.drop(id);
        this.notices.push(`challenge ${id} no longer exists`);
        return { kind: "gone" };
      }
      throw err;
    }
  }

  private drop(id: string): void {
    this.records = this.records.filter((r) => r.id !== id);
  }
}

function statusFromConflict(detail: unknown): ChallengeStatus {
  if (detail && typeof detail === "object" && "status" in detail) {
    return (detail as { status: ChallengeStatus }).status;
  }
  return "Expired";
}
