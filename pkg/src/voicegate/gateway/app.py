"""REST surface over a Gateway instance.

Endpoints mirror the operator console's needs: submit commands, list and
resolve pending challenges, read/replace the per-platform policy, browse the
audit trail, and a health probe. Domain errors map onto conventional status
codes: unknown ids 404, state conflicts 409, validation problems 422.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from ..errors import (
    ChallengeNotPendingError,
    MalformedDocumentError,
    UnknownChallengeError,
)
from ..noise import NoiseSpec
from ..policy import parse_policy, validate_policy
from ..resources import default_inventory
from ..taxonomy import Platform
from .challenges import Verdict
from .service import CommandRequest, Gateway, PolicyVersionConflict


class CommandBody(BaseModel):
    text: str
    platform: str
    apply_noise: bool = False
    noise_spec_override: dict | None = None


class RespondBody(BaseModel):
    verdict: str


def _platform(name: str) -> Platform:
    try:
        return Platform(name)
    except ValueError:
        raise HTTPException(status_code=422, detail=f"unknown platform {name!r}")


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="voicegate", version="1")
    inventory = default_inventory()

    @app.post("/v1/commands")
    def submit_command(body: CommandBody) -> dict:
        override = None
        if body.noise_spec_override is not None:
            try:
                override = NoiseSpec.from_dict(body.noise_spec_override)
            except (ValueError, TypeError, KeyError) as exc:
                raise HTTPException(status_code=422, detail=f"bad noise spec: {exc}")
        try:
            request = CommandRequest(
                text=body.text,
                platform=_platform(body.platform),
                apply_noise=body.apply_noise,
                noise_spec_override=override,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        result = gateway.handle_command(request)
        return {
            "decision": result.decision.to_dict(),
            "challenge_id": result.challenge_id,
            "audit_id": result.audit_id,
        }

    @app.get("/v1/challenges")
    def list_challenges(status: str = Query(default="pending")) -> list[dict]:
        if status != "pending":
            raise HTTPException(status_code=422, detail="only status=pending is queryable")
        return [record.to_dict() for record in gateway.challenges.pending()]

    @app.post("/v1/challenges/{challenge_id}/respond")
    def respond_challenge(challenge_id: str, body: RespondBody) -> dict:
        try:
            verdict = Verdict(body.verdict.lower())
        except ValueError:
            raise HTTPException(status_code=422, detail=f"verdict must be approve or deny")
        try:
            final = gateway.respond_challenge(challenge_id, verdict)
        except UnknownChallengeError:
            raise HTTPException(status_code=404, detail=f"unknown challenge {challenge_id}")
        except ChallengeNotPendingError as exc:
            raise HTTPException(status_code=409, detail={"status": exc.status})
        return {"status": final.value}

    @app.get("/v1/policy")
    def get_policy(platform: str = Query(...)) -> dict:
        return gateway.policy_for(_platform(platform)).to_dict()

    @app.put("/v1/policy")
    def put_policy(document: dict) -> dict:
        try:
            policy = parse_policy(document)
        except MalformedDocumentError as exc:
            raise HTTPException(status_code=422, detail={"violations": [str(exc)]})
        violations = validate_policy(policy, inventory)
        if violations:
            raise HTTPException(
                status_code=422, detail={"violations": [v.to_dict() for v in violations]}
            )
        try:
            stored = gateway.replace_policy(policy)
        except PolicyVersionConflict as exc:
            raise HTTPException(
                status_code=409, detail={"current_version": exc.current_version}
            )
        return stored.to_dict()

    @app.get("/v1/audit")
    def get_audit(
        ts_from: int | None = Query(default=None, alias="from"),
        ts_to: int | None = Query(default=None, alias="to"),
        action: str | None = Query(default=None),
        label: str | None = Query(default=None),
    ) -> list[dict]:
        result = gateway.audit.query(ts_from=ts_from, ts_to=ts_to, action=action, label=label)
        return list(result.records)

    @app.get("/v1/healthz")
    def healthz() -> dict:
        return gateway.health()

    return app
