"""Signed session tokens and scope checks for the HTTP surface."""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timedelta

from .canonical import iso, parse_ts, utc
from .errors import Forbidden, Unauthorized

log = logging.getLogger(__name__)

USER_SCOPE = "User"
OPERATOR_SCOPE = "Operator"

OPERATOR_ACTIONS = {"integrity_flags", "node_admin"}


@dataclass(frozen=True)
class SessionToken:
    user_id: str
    issued_at: datetime
    expiry: datetime
    scope: str

    def encode(self, secret: str) -> str:
        body = json.dumps(
            {
                "user_id": self.user_id,
                "issued_at": iso(self.issued_at),
                "expiry": iso(self.expiry),
                "scope": self.scope,
            },
            sort_keys=True,
        ).encode("utf-8")
        sig = hmac.new(secret.encode("utf-8"), body, hashlib.sha256).hexdigest()
        return base64.urlsafe_b64encode(body).decode("ascii") + "." + sig


def issue_token(user_id: str, scope: str, secret: str, now: datetime, hours: int = 24) -> str:
    token = SessionToken(user_id=user_id, issued_at=utc(now), expiry=utc(now) + timedelta(hours=hours), scope=scope)
    return token.encode(secret)


def decode_token(raw: str, secret: str) -> SessionToken:
    try:
        body_b64, sig = raw.rsplit(".", 1)
        body = base64.urlsafe_b64decode(body_b64.encode("ascii"))
    except Exception as exc:  # any malformed token is unauthorized
        raise Unauthorized("malformed session token") from exc
    expect = hmac.new(secret.encode("utf-8"), body, hashlib.sha256).hexdigest()
    if not hmac.compare_digest(sig, expect):
        raise Unauthorized("bad token signature")
    data = json.loads(body)
    return SessionToken(
        user_id=data["user_id"],
        issued_at=parse_ts(data["issued_at"]),
        expiry=parse_ts(data["expiry"]),
        scope=data["scope"],
    )


def authorize(token: SessionToken | None, action: str, now: datetime) -> bool:
    """Allow or deny an action for a session. Every deny is logged."""
    if token is None:
        log.info("deny %s: no session", action)
        return False
    if utc(now) >= token.expiry:
        log.info("deny %s for %s: token expired", action, token.user_id)
        return False
    if action in OPERATOR_ACTIONS and token.scope != OPERATOR_SCOPE:
        log.info("deny %s for %s: operator scope required", action, token.user_id)
        return False
    return True


def require(token: SessionToken | None, action: str, now: datetime) -> SessionToken:
    if authorize(token, action, now):
        return token
    if token is None or utc(now) >= token.expiry:
        raise Unauthorized("valid session required")
    raise Forbidden(f"scope {token.scope} may not perform {action}")
