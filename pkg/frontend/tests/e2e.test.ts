import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdir, mkdtemp, rm } from "node:fs/promises";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ChallengeQueue } from "../src/challenges.js";
import { GatewayClient } from "../src/client.js";
import { PolicyDraft } from "../src/policy.js";

/**
 * End-to-end checks against a real gateway process. The suite trains a
 * small model pair, starts the REST server on a free port, and drives
 * it through the same service objects the console uses.
 */

const SETUP_TIMEOUT = 180_000;
const TEST_TIMEOUT = 30_000;

let workDir: string;
let server: ChildProcess | null = null;
let client: GatewayClient;

function runCli(args: string[]): void {
  const result = spawnSync("python3", ["-m", "voicegate.cli", ...args], {
    cwd: workDir,
    encoding: "utf8",
  });
  if (result.status !== 0) {
    throw new Error(
      `voicegate ${args[0]} failed (${result.status}): ${result.stderr}`,
    );
  }
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        probe.close(() => reject(new Error("no port assigned")));
      }
    });
  });
}

async function waitForHealth(base: string): Promise<void> {
  const deadline = Date.now() + 90_000;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${base}/v1/healthz`);
      if (resp.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`gateway never became healthy: ${lastError}`);
}

beforeAll(async () => {
  workDir = await mkdtemp(join(tmpdir(), "console-e2e-"));
  await mkdir(join(workDir, "models"));
  runCli([
    "gen-corpus",
    "--platform",
    "GoogleHome",
    "--corpus-out",
    "corpus.jsonl",
  ]);
  for (const axis of ["GoogleTrait", "GoogleDevice"]) {
    runCli([
      "train",
      "--corpus",
      "corpus.jsonl",
      "--platform",
      "GoogleHome",
      "--axis",
      axis,
      "--model-out",
      join("models", `${axis}.vgm`),
      "--epochs",
      "4",
      "--feature-dim",
      "4096",
    ]);
  }

  const port = await freePort();
  const base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    [
      "-m",
      "voicegate.cli",
      "serve",
      "--models-dir",
      "models",
      "--audit",
      "audit.jsonl",
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
    ],
    { cwd: workDir, stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitForHealth(base);
  client = new GatewayClient(base);
}, SETUP_TIMEOUT);

afterAll(async () => {
  if (server && !server.killed) {
    server.kill("SIGTERM");
    await new Promise((resolve) => {
      server!.once("exit", resolve);
      setTimeout(resolve, 5000);
    });
  }
  await rm(workDir, { recursive: true, force: true });
});

describe("operator console against a live gateway", () => {
  it(
    "approving a pending challenge flips it to Approved and the audit row to executed",
    async () => {
      const submitted = await client.submitCommand({
        text: "open the front door",
        platform: "GoogleHome",
      });
      expect(submitted.decision.action).toBe("Challenge");
      expect(submitted.challenge_id).not.toBeNull();

      const queue = new ChallengeQueue(client);
      const views = await queue.refresh(Date.now());
      const row = views.find((v) => v.id === submitted.challenge_id);
      expect(row).toBeDefined();
      expect(row!.actionable).toBe(true);
      expect(row!.countdownText).not.toBe("expired");

      const outcome = await queue.approve(row!.id);
      expect(outcome).toEqual({ kind: "final", status: "Approved" });

      // The queue no longer shows the challenge...
      const after = await queue.refresh(Date.now());
      expect(after.find((v) => v.id === row!.id)).toBeUndefined();

      // ...and the audit trail records the execution.
      const audit = await client.queryAudit({});
      const auditRow = audit.find((r) => r.audit_id === submitted.audit_id);
      expect(auditRow).toBeDefined();
      expect(auditRow!.outcome).toBe("executed");
      expect(auditRow!.decision.action).toBe("Challenge");
    },
    TEST_TIMEOUT,
  );

  it(
    "toggling a label to Sensitive turns the next matching command into a challenge",
    async () => {
      const before = await client.submitCommand({
        text: "turn on the light",
        platform: "GoogleHome",
      });
      expect(before.decision.action).toBe("Allow");
      expect(before.decision.matched_label).toBe("OnOff");

      const draft = PolicyDraft.fromServer(await client.getPolicy("GoogleHome"));
      const versionBefore = draft.version;
      draft.setRule("GoogleTrait", "OnOff", "Sensitive");
      const result = await draft.submit(client);
      expect(result.ok).toBe(true);

      // One fetch cycle later the console sees the new version...
      const refreshed = await client.getPolicy("GoogleHome");
      expect(refreshed.version).toBe(versionBefore + 1);
      expect(refreshed.rules.GoogleTrait!.OnOff).toBe("Sensitive");

      // ...and the same utterance now requires approval.
      const after = await client.submitCommand({
        text: "turn on the light",
        platform: "GoogleHome",
      });
      expect(after.decision.action).toBe("Challenge");
      expect(after.challenge_id).not.toBeNull();

      // Leave the queue clean for the other tests.
      const queue = new ChallengeQueue(client);
      await queue.refresh(Date.now());
      const denied = await queue.deny(after.challenge_id!);
      expect(denied.kind).toBe("final");
    },
    TEST_TIMEOUT,
  );

  it(
    "submitting a rule for an unknown label surfaces the server violation inline",
    async () => {
      const draft = PolicyDraft.fromServer(await client.getPolicy("GoogleHome"));
      const versionBefore = draft.version;
      draft.setRule("GoogleTrait", "Teleportation", "Sensitive");
      const result = await draft.submit(client);

      expect(result.ok).toBe(false);
      if (!result.ok && result.reason === "violations") {
        expect(result.violations.length).toBeGreaterThan(0);
      } else {
        throw new Error(`expected violations, got ${JSON.stringify(result)}`);
      }

      const inline = draft.violationsFor("GoogleTrait", "Teleportation");
      expect(inline).toHaveLength(1);
      expect(inline[0]!.message).toContain("not in inventory");
      expect(draft.canSubmit).toBe(false);

      // The rejected draft was not stored.
      const current = await client.getPolicy("GoogleHome");
      expect(current.version).toBe(versionBefore);
      expect(current.rules.GoogleTrait!.Teleportation).toBeUndefined();
    },
    TEST_TIMEOUT,
  );

  it(
    "health reports the models the server actually loaded",
    async () => {
      const health = await client.health();
      expect(health.models_loaded.GoogleTrait).toBe(true);
      expect(health.models_loaded.GoogleDevice).toBe(true);
      expect(health.models_loaded.AlexaInterface).toBe(false);
      expect(health.policy_version.GoogleHome).toBeGreaterThanOrEqual(1);
    },
    TEST_TIMEOUT,
  );
});
