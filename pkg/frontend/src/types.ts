/**
 * Payload shapes for the gateway REST API.
 *
 * These mirror the JSON the Python service emits; field names are kept
 * snake_case so a response can be used without a mapping layer.
 */

export type Platform = "Alexa" | "GoogleHome";

export type DecisionAction = "Allow" | "Challenge" | "Block";

export type ChallengeStatus = "Pending" | "Approved" | "Denied" | "Expired";

export type Sensitivity = "Sensitive" | "NonSensitive";

export interface Decision {
  action: DecisionAction;
  matched_label: string;
  matched_axis: string;
  confidence: number;
  rationale: string;
}

export interface CommandResponse {
  decision: Decision;
  challenge_id: string | null;
  audit_id: string;
}

export interface ChallengeRecord {
  id: string;
  audit_id: string;
  text: string;
  platform: Platform;
  matched_label: string;
  matched_axis: string;
  confidence: number;
  created_at: number;
  ttl_ms: number;
  expires_at: number;
  status: ChallengeStatus;
}

export interface PolicyDocument {
  version: number;
  platform: Platform;
  default_sensitivity: Sensitivity;
  min_confidence: number;
  axis_priority: string[];
  // axis value -> label -> sensitivity
  rules: Record<string, Record<string, Sensitivity>>;
}

/** One entry of a 422 "violations" response from PUT /v1/policy. */
export interface PolicyViolation {
  field: string;
  message: string;
  axis?: string;
  label?: string;
}

export interface AuditRecord {
  kind: string;
  audit_id: string;
  ts_ms: number;
  platform: Platform;
  raw_text: string;
  effective_text: string;
  // per axis: top predictions as [label, probability] pairs
  predictions: Record<string, [string, number][]>;
  decision: Decision;
  challenge_id: string | null;
  outcome: string;
  latency_us: Record<string, number>;
}

export interface HealthReport {
  models_loaded: Record<string, boolean>;
  policy_version: Record<string, number>;
}

export interface NoiseRequest {
  target_wer: number;
  seed?: number;
}

export interface CommandRequest {
  text: string;
  platform: Platform;
  noise?: NoiseRequest;
}
