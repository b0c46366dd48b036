import type { AuditFilter, GatewayClient } from "./client.js";
import type { AuditRecord } from "./types.js";

/** Flattened audit record for table rendering. */
export interface AuditRowView {
  auditId: string;
  tsMs: number;
  platform: string;
  text: string;
  heardAs: string | null;
  topPrediction: string;
  action: string;
  outcome: string;
  totalLatencyUs: number;
}

export function toAuditRow(record: AuditRecord): AuditRowView {
  return {
    auditId: record.audit_id,
    tsMs: record.ts_ms,
    platform: record.platform,
    text: record.raw_text,
    heardAs:
      record.effective_text !== record.raw_text ? record.effective_text : null,
    topPrediction: `${record.decision.matched_axis}/${record.decision.matched_label} @ ${record.decision.confidence.toFixed(2)}`,
    action: record.decision.action,
    outcome: record.outcome,
    totalLatencyUs: record.latency_us.total ?? 0,
  };
}

/**
 * Read side of the audit log. Holds the active filter; the page
 * re-runs load() whenever the operator changes it.
 */
export class AuditBrowser {
  filter: AuditFilter = {};

  constructor(private readonly client: GatewayClient) {}

  async load(): Promise<AuditRowView[]> {
    const records = await this.client.queryAudit(this.filter);
    return records.map(toAuditRow);
  }

  setActionFilter(action: string | undefined): void {
    this.filter = { ...this.filter, action: action || undefined };
  }

  setLabelFilter(label: string | undefined): void {
    this.filter = { ...this.filter, label: label || undefined };
  }

  setWindow(from?: number, to?: number): void {
    this.filter = { ...this.filter, from, to };
  }
}
