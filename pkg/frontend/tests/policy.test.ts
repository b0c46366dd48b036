import { describe, expect, it } from "vitest";

import { GatewayClient } from "../src/client.js";
import { PolicyDraft, normalizeViolations } from "../src/policy.js";
import type { PolicyDocument } from "../src/types.js";
import { forbiddenFetch, jsonResponse, stubFetch } from "./helpers.js";

function doc(overrides: Partial<PolicyDocument> = {}): PolicyDocument {
  return {
    version: 3,
    platform: "GoogleHome",
    default_sensitivity: "NonSensitive",
    min_confidence: 0.5,
    axis_priority: ["GoogleTrait", "GoogleDevice"],
    rules: {
      GoogleTrait: { OpenClose: "Sensitive", OnOff: "NonSensitive" },
      GoogleDevice: { Lock: "Sensitive" },
    },
    ...overrides,
  };
}

describe("PolicyDraft", () => {
  it("starts clean with no violations", () => {
    const draft = PolicyDraft.fromServer(doc());
    expect(draft.dirty).toBe(false);
    expect(draft.canSubmit).toBe(false);
    expect(draft.violations).toEqual([]);
  });

  it("rejects a no-op submit without touching the network", async () => {
    const draft = PolicyDraft.fromServer(doc());
    const client = new GatewayClient("http://gw", forbiddenFetch());
    const result = await draft.submit(client);
    expect(result).toEqual({ ok: false, reason: "no-op" });
  });

  it("editing a rule sets the dirty flag; reverting clears it", () => {
    const draft = PolicyDraft.fromServer(doc());
    draft.setRule("GoogleTrait", "OnOff", "Sensitive");
    expect(draft.dirty).toBe(true);
    expect(draft.canSubmit).toBe(true);
    draft.setRule("GoogleTrait", "OnOff", "NonSensitive");
    expect(draft.dirty).toBe(false);
  });

  it("submits the draft and rebases on the stored document", async () => {
    const stub = stubFetch((call) => {
      const body = call.body as PolicyDocument;
      return jsonResponse({ ...body, version: body.version + 1 });
    });
    const client = new GatewayClient("http://gw", stub.fetch);
    const draft = PolicyDraft.fromServer(doc());
    draft.setRule("GoogleTrait", "OnOff", "Sensitive");
    const result = await draft.submit(client);
    expect(result.ok).toBe(true);
    if (result.ok) {
      expect(result.stored.version).toBe(4);
    }
    expect(stub.calls[0]!.method).toBe("PUT");
    expect(draft.dirty).toBe(false);
    expect(draft.version).toBe(4);
  });

  it("stores 422 violations and anchors them to the offending rule", async () => {
    const stub = stubFetch(() =>
      jsonResponse(
        {
          detail: {
            violations: [
              {
                field: "rules",
                message: "label not in inventory",
                axis: "GoogleTrait",
                label: "Teleportation",
              },
            ],
          },
        },
        422,
      ),
    );
    const client = new GatewayClient("http://gw", stub.fetch);
    const draft = PolicyDraft.fromServer(doc());
    draft.setRule("GoogleTrait", "Teleportation", "Sensitive");
    const result = await draft.submit(client);
    expect(result.ok).toBe(false);
    if (!result.ok && result.reason === "violations") {
      expect(result.violations[0]!.message).toBe("label not in inventory");
    }
    expect(draft.violationsFor("GoogleTrait", "Teleportation")).toHaveLength(1);
    expect(draft.violationsFor("GoogleTrait", "OnOff")).toHaveLength(0);
    expect(draft.canSubmit).toBe(false);
  });

  it("blocks resubmission while violations stand, without a network call", async () => {
    const bad = stubFetch(() =>
      jsonResponse({ detail: { violations: ["min_confidence: out of range"] } }, 422),
    );
    const draft = PolicyDraft.fromServer(doc());
    draft.setMinConfidence(7);
    await draft.submit(new GatewayClient("http://gw", bad.fetch));
    expect(draft.violations).toHaveLength(1);

    const result = await draft.submit(
      new GatewayClient("http://gw", forbiddenFetch()),
    );
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.reason).toBe("violations");
  });

  it("clears violations on the next edit so the draft can be fixed", async () => {
    const bad = stubFetch(() =>
      jsonResponse({ detail: { violations: ["min_confidence: out of range"] } }, 422),
    );
    const draft = PolicyDraft.fromServer(doc());
    draft.setMinConfidence(7);
    await draft.submit(new GatewayClient("http://gw", bad.fetch));
    expect(draft.canSubmit).toBe(false);
    draft.setMinConfidence(0.4);
    expect(draft.violations).toEqual([]);
    expect(draft.canSubmit).toBe(true);
  });

  it("reports the server version on an optimistic-lock conflict", async () => {
    const stub = stubFetch(() =>
      jsonResponse({ detail: { current_version: 9 } }, 409),
    );
    const draft = PolicyDraft.fromServer(doc());
    draft.setRule("GoogleDevice", "Lock", "NonSensitive");
    const result = await draft.submit(new GatewayClient("http://gw", stub.fetch));
    expect(result).toEqual({ ok: false, reason: "conflict", currentVersion: 9 });
    // Draft keeps the edit; the operator decides whether to rebase.
    expect(draft.dirty).toBe(true);
  });

  it("removeRule dirties the draft and survives unknown axes", () => {
    const draft = PolicyDraft.fromServer(doc());
    draft.removeRule("NoSuchAxis", "X");
    expect(draft.dirty).toBe(false);
    draft.removeRule("GoogleDevice", "Lock");
    expect(draft.dirty).toBe(true);
    expect(draft.ruleFor("GoogleDevice", "Lock")).toBeUndefined();
  });
});

describe("normalizeViolations", () => {
  it("keeps structured entries and their anchors", () => {
    const out = normalizeViolations({
      violations: [
        { field: "rules", message: "m", axis: "GoogleTrait", label: "X" },
      ],
    });
    expect(out).toEqual([{ message: "m", axis: "GoogleTrait", label: "X" }]);
  });

  it("wraps plain-string entries from malformed-document rejections", () => {
    const out = normalizeViolations({ violations: ["rules: not a mapping"] });
    expect(out).toEqual([{ message: "rules: not a mapping" }]);
  });

  it("degrades gracefully on unexpected payloads", () => {
    expect(normalizeViolations(null)).toEqual([{ message: "policy rejected" }]);
    expect(normalizeViolations({ other: 1 })).toEqual([
      { message: "policy rejected" },
    ]);
  });
});
