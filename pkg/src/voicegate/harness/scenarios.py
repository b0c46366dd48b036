"""End-to-end scenario suite exercised over the REST API.

The default four scenarios cross {sensitive, non-sensitive} commands with
{authorized, unauthorized} humans: a sensitive command must challenge and
then execute or block with the verdict, a non-sensitive command must execute
with no challenge no matter who is asking.
"""

from __future__ import annotations

from dataclasses import dataclass

import requests

from ..errors import GatewayUnreachableError
from ..policy import Action
from ..taxonomy import Platform


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    text: str
    platform: Platform
    authorized: bool
    expected_action: Action
    expected_final: str  # "executed" | "blocked"

    def __post_init__(self):
        if self.expected_final not in ("executed", "blocked"):
            raise ValueError(f"expected_final must be executed or blocked, got {self.expected_final!r}")
        if self.expected_action is Action.ALLOW:
            consistent = self.expected_final == "executed"
        elif self.expected_action is Action.CHALLENGE:
            consistent = self.expected_final == ("executed" if self.authorized else "blocked")
        else:
            consistent = self.expected_final == "blocked"
        if not consistent:
            raise ValueError(
                f"scenario {self.name!r}: final {self.expected_final!r} inconsistent with "
                f"action {self.expected_action.value} and authorized={self.authorized}"
            )


@dataclass(frozen=True)
class ScenarioResult:
    name: str
    passed: bool
    action: str
    final_outcome: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "action": self.action,
            "final_outcome": self.final_outcome,
            "detail": self.detail,
        }


def default_scenarios() -> tuple[ScenarioSpec, ...]:
    return (
        ScenarioSpec(
            name="sensitive-authorized",
            text="open the door",
            platform=Platform.GOOGLE_HOME,
            authorized=True,
            expected_action=Action.CHALLENGE,
            expected_final="executed",
        ),
        ScenarioSpec(
            name="sensitive-unauthorized",
            text="open the door",
            platform=Platform.GOOGLE_HOME,
            authorized=False,
            expected_action=Action.CHALLENGE,
            expected_final="blocked",
        ),
        ScenarioSpec(
            name="non-sensitive-authorized",
            text="turn on the lights",
            platform=Platform.GOOGLE_HOME,
            authorized=True,
            expected_action=Action.ALLOW,
            expected_final="executed",
        ),
        ScenarioSpec(
            name="non-sensitive-unauthorized",
            text="turn on the lamp",
            platform=Platform.GOOGLE_HOME,
            authorized=False,
            expected_action=Action.ALLOW,
            expected_final="executed",
        ),
    )


def run_scenarios(specs, base_url: str = "", client=None) -> list[ScenarioResult]:
    """Drive each scenario over HTTP and check action plus final outcome.

    ``client`` is anything with requests-style post/get (a Session, or an
    in-process ASGI test client); ``base_url`` is prefixed onto paths, empty
    for clients that already carry one.
    """
    if client is None:
        client = requests.Session()
    results = []
    for spec in specs:
        results.append(_run_one(spec, base_url, client))
    return results


def _run_one(spec: ScenarioSpec, base_url: str, client) -> ScenarioResult:
    try:
        response = client.post(
            base_url + "/v1/commands",
            json={"text": spec.text, "platform": spec.platform.value},
        )
        response.raise_for_status()
        submitted = response.json()
        action = submitted["decision"]["action"]
        challenge_id = submitted.get("challenge_id")

        if challenge_id is not None:
            verdict = "approve" if spec.authorized else "deny"
            answer = client.post(
                base_url + f"/v1/challenges/{challenge_id}/respond", json={"verdict": verdict}
            )
            answer.raise_for_status()

        audit = client.get(base_url + "/v1/audit")
        audit.raise_for_status()
        rows = [r for r in audit.json() if r["audit_id"] == submitted["audit_id"]]
        final = rows[0]["outcome"] if rows else "missing"
    except requests.exceptions.ConnectionError as exc:
        raise GatewayUnreachableError(str(exc)) from exc

    problems = []
    if action != spec.expected_action.value:
        problems.append(f"action {action} != {spec.expected_action.value}")
    if spec.expected_action is Action.ALLOW and challenge_id is not None:
        problems.append("allow created a challenge")
    if final != spec.expected_final:
        problems.append(f"final {final!r} != {spec.expected_final!r}")
    return ScenarioResult(
        name=spec.name,
        passed=not problems,
        action=action,
        final_outcome=final,
        detail="; ".join(problems),
    )
