"""JSON-over-HTTP surface of the node.

Every state-mutating endpoint forwards to exactly one engine operation; the
API layer authenticates, translates, and serializes but adds no rules of its
own. Errors leave as ``{"error": {"code", "message"}}`` with the domain code
verbatim. The federation wire endpoints (/sync/*, /blobs/*) carry the
protocol version header on every response.
"""

from __future__ import annotations

import base64
import json
import logging
from datetime import datetime, timezone
from typing import Callable, Literal

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from . import auth, feeds, queries
from .canonical import iso
from .config import NodeConfig
from .engine import Node
from .errors import InvalidIdentity, NodeError, Unauthorized, UnknownUser
from .federation import PROTOCOL_VERSION

log = logging.getLogger(__name__)

# state-mutating endpoint -> the single engine/ledger operation behind it
ENDPOINT_OPERATIONS = {
    "POST /users": "register_user",
    "POST /manuscripts": "submit_manuscript",
    "POST /manuscripts/{paper_id}/initial-rating": "cast_initial_rating",
    "POST /manuscripts/{paper_id}/revision": "submit_revision",
    "POST /referee/invitations/{paper_id}/accept": "accept_invitation",
    "POST /referee/invitations/{paper_id}/decline": "decline_invitation",
    "POST /referee/reports/{paper_id}": "record_referee_report",
    "POST /papers/{paper_id}/community-review": "submit_community_review",
    "POST /rewards/spend": "spend_points",
}


class RegisterBody(BaseModel):
    identity: str
    keywords: list[str] = Field(min_length=1, max_length=16)
    display_name: str = ""
    institution: str | None = None


class SessionBody(BaseModel):
    user_id: str | None = None
    operator_key: str | None = None


class ManuscriptBody(BaseModel):
    title: str
    content: str  # utf-8 manuscript body (or base64 with content_encoding="base64")
    content_encoding: Literal["utf-8", "base64"] = "utf-8"
    keywords: list[str] = Field(min_length=1, max_length=16)
    iar: int
    co_authors: list[str] = []
    anonymous_review: bool = False
    excluded_referees: list[str] = []
    suggested_referees: list[str] = []


class InitialRatingBody(BaseModel):
    value: int


class AcceptBody(BaseModel):
    deadline_days: int


class ReportBody(BaseModel):
    verdict: Literal["Accept", "MinorRevision", "Reject"]
    rating: int
    text: str = ""
    structural_flaw: bool = False


class RevisionBody(BaseModel):
    content: str
    content_encoding: Literal["utf-8", "base64"] = "utf-8"


class CommunityReviewBody(BaseModel):
    value: int
    comment: str
    public_name: bool = True


class SpendBody(BaseModel):
    action: Literal["VisibilityBoost", "QuotaExtension", "CooldownReduction"]
    paper_id: str | None = None


def _decode_content(body_content: str, encoding: str) -> bytes:
    if encoding == "base64":
        return base64.b64decode(body_content)
    return body_content.encode("utf-8")


def create_app(node: Node, clock: Callable[[], datetime] | None = None) -> FastAPI:
    config: NodeConfig = node.config
    clock = clock or (lambda: datetime.now(timezone.utc))
    app = FastAPI(title="scholarnode", version="0.1.0")
    app.state.node = node
    app.state.clock = clock

    @app.exception_handler(NodeError)
    async def node_error_handler(request: Request, exc: NodeError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(Exception)
    async def unexpected_error_handler(request: Request, exc: Exception):
        log.exception("unhandled error on %s %s", request.method, request.url.path)
        return JSONResponse(
            status_code=500,
            content={"error": {"code": "Internal", "message": "internal error"}},
        )

    def session_from(authorization: str | None) -> auth.SessionToken | None:
        if not authorization or not authorization.lower().startswith("bearer "):
            return None
        return auth.decode_token(authorization.split(" ", 1)[1], config.secret)

    def current_user(authorization: str | None = Header(default=None)) -> auth.SessionToken:
        token = session_from(authorization)
        return auth.require(token, "user_action", clock())

    def current_operator(authorization: str | None = Header(default=None)) -> auth.SessionToken:
        token = session_from(authorization)
        return auth.require(token, "integrity_flags", clock())

    # ---- accounts ------------------------------------------------------------

    @app.post("/users", status_code=201)
    def register_user(body: RegisterBody):
        account = node.register_user(
            identity=body.identity,
            keywords=body.keywords,
            display_name=body.display_name,
            institution=body.institution,
            now=clock(),
        )
        return queries.account_view(node.state, account, clock())

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionBody):
        now = clock()
        if body.operator_key is not None:
            if body.operator_key != config.operator_key:
                raise Unauthorized("bad operator key")
            token = auth.issue_token("operator", auth.OPERATOR_SCOPE, config.secret, now,
                                     config.session_hours)
            return {"token": token, "scope": auth.OPERATOR_SCOPE}
        if not body.user_id or body.user_id not in node.state.users:
            raise UnknownUser("no such user")
        # identity confirmation round-trips are stubbed: holding a registered
        # user id stands in for the signed verification token
        token = auth.issue_token(body.user_id, auth.USER_SCOPE, config.secret, now,
                                 config.session_hours)
        return {"token": token, "scope": auth.USER_SCOPE}

    @app.get("/users/me")
    def whoami(session: auth.SessionToken = Depends(current_user)):
        account = node.state.users.get(session.user_id)
        if account is None:
            raise UnknownUser(f"no user {session.user_id!r}")
        return queries.account_view(node.state, account, clock())

    # ---- submission and editorial phase ---------------------------------------

    @app.post("/manuscripts", status_code=201)
    def submit_manuscript(body: ManuscriptBody, session: auth.SessionToken = Depends(current_user)):
        record = node.submit_manuscript(
            author_id=session.user_id,
            title=body.title,
            content=_decode_content(body.content, body.content_encoding),
            keywords=body.keywords,
            iar=body.iar,
            co_authors=body.co_authors,
            anonymous_review=body.anonymous_review,
            excluded_referees=body.excluded_referees,
            suggested_referees=body.suggested_referees,
            now=clock(),
        )
        return queries.paper_view(node.state, node.federation, record.paper_id,
                                  session.user_id, clock())

    @app.get("/submissions/new")
    def new_submissions(section: str = Query(default="")):
        return {"submissions": feeds.new_submissions(node.state, section, clock())}

    @app.post("/manuscripts/{paper_id}/initial-rating", status_code=201)
    def cast_initial_rating(paper_id: str, body: InitialRatingBody,
                            session: auth.SessionToken = Depends(current_user)):
        node.cast_initial_rating(session.user_id, paper_id, body.value, clock())
        return {"paper_id": paper_id, "recorded": True}

    @app.post("/manuscripts/{paper_id}/revision", status_code=201)
    def submit_revision(paper_id: str, body: RevisionBody,
                        session: auth.SessionToken = Depends(current_user)):
        node.submit_revision(session.user_id, paper_id,
                             _decode_content(body.content, body.content_encoding), clock())
        return {"paper_id": paper_id, "recorded": True}

    # ---- refereeing ------------------------------------------------------------

    @app.get("/referee/invitations")
    def referee_invitations(session: auth.SessionToken = Depends(current_user)):
        return {"invitations": queries.invitations_for(node.state, session.user_id)}

    @app.post("/referee/invitations/{paper_id}/accept")
    def accept_invitation(paper_id: str, body: AcceptBody,
                          session: auth.SessionToken = Depends(current_user)):
        node.accept_invitation(session.user_id, paper_id, body.deadline_days, clock())
        return {"paper_id": paper_id, "accepted": True}

    @app.post("/referee/invitations/{paper_id}/decline")
    def decline_invitation(paper_id: str, session: auth.SessionToken = Depends(current_user)):
        node.decline_invitation(session.user_id, paper_id, clock())
        return {"paper_id": paper_id, "declined": True}

    @app.post("/referee/reports/{paper_id}", status_code=201)
    def file_report(paper_id: str, body: ReportBody,
                    session: auth.SessionToken = Depends(current_user)):
        node.record_referee_report(
            referee_id=session.user_id,
            paper_id=paper_id,
            verdict=body.verdict,
            rating=body.rating,
            text=body.text,
            structural_flaw=body.structural_flaw,
            now=clock(),
        )
        return {"paper_id": paper_id, "recorded": True}

    # ---- published papers and community review ----------------------------------

    @app.get("/papers/{paper_id}")
    def get_paper(paper_id: str, authorization: str | None = Header(default=None)):
        token = session_from(authorization)
        viewer = token.user_id if token and auth.authorize(token, "read", clock()) else None
        return queries.paper_view(node.state, node.federation, paper_id, viewer, clock())

    @app.get("/papers/{paper_id}/ratings-history")
    def get_ratings_history(paper_id: str):
        return queries.ratings_history(node.state, paper_id)

    @app.post("/papers/{paper_id}/community-review", status_code=201)
    def community_review(paper_id: str, body: CommunityReviewBody,
                         session: auth.SessionToken = Depends(current_user)):
        node.submit_community_review(
            user_id=session.user_id,
            paper_id=paper_id,
            value=body.value,
            comment=body.comment,
            public_name=body.public_name,
            now=clock(),
        )
        record = node.state.manuscripts[paper_id]
        return {"paper_id": paper_id, "cr": record.cr.value, "cr_count": len(record.community_reviews)}

    # ---- feeds --------------------------------------------------------------------

    @app.get("/portal/")
    @app.get("/portal")
    def root_feed(cursor: str | None = Query(default=None),
                  page_size: int = Query(default=0, ge=0, le=100)):
        return feeds.section_feed(
            node.topics, node.state, node.federation.visible_entries(), "",
            clock(), cursor, page_size or config.feed_page_size,
        )

    @app.get("/portal/{path:path}")
    def section_feed(path: str, cursor: str | None = Query(default=None),
                     page_size: int = Query(default=0, ge=0, le=100)):
        return feeds.section_feed(
            node.topics, node.state, node.federation.visible_entries(), path.strip("/"),
            clock(), cursor, page_size or config.feed_page_size,
        )

    # ---- rewards --------------------------------------------------------------------

    @app.post("/rewards/spend")
    def spend(body: SpendBody, session: auth.SessionToken = Depends(current_user)):
        return node.spend_points(session.user_id, body.action, body.paper_id, clock())

    @app.get("/rewards/ledger")
    def ledger(session: auth.SessionToken = Depends(current_user)):
        return queries.ledger_view(node.state, session.user_id)

    # ---- operator ----------------------------------------------------------------------

    @app.get("/operator/integrity/flags")
    def integrity_flags(session: auth.SessionToken = Depends(current_operator)):
        text = queries.integrity_flags_ndjson(node.state, clock())
        return PlainTextResponse(text, media_type="application/x-ndjson")

    @app.post("/operator/tick")
    def operator_tick(session: auth.SessionToken = Depends(current_operator)):
        return {"fired": node.tick(clock())}

    # ---- federation wire protocol ---------------------------------------------------------

    @app.get("/sync/vv")
    def sync_version_vector(response: Response):
        response.headers["X-Fed-Proto"] = PROTOCOL_VERSION
        return node.federation.version_vector()

    @app.get("/sync/entries")
    def sync_entries(response: Response, after: str = Query(default="{}")):
        response.headers["X-Fed-Proto"] = PROTOCOL_VERSION
        try:
            vv = json.loads(after)
            if not isinstance(vv, dict):
                raise ValueError("version vector must be an object")
            vv = {str(k): int(v) for k, v in vv.items()}
        except (ValueError, TypeError) as exc:
            return JSONResponse(
                status_code=422,
                content={"error": {"code": "MalformedEntry", "message": f"bad version vector: {exc}"}},
                headers={"X-Fed-Proto": PROTOCOL_VERSION},
            )
        return [e.to_wire() for e in node.federation.diff_since(vv)]

    @app.get("/blobs/{digest}")
    def get_blob(digest: str):
        data = node.blobs.get(digest)
        if data is None:
            return JSONResponse(
                status_code=404,
                content={"error": {"code": "UnknownPaper", "message": f"no blob {digest}"}},
                headers={"X-Fed-Proto": PROTOCOL_VERSION},
            )
        return Response(content=data, media_type="application/octet-stream",
                        headers={"X-Fed-Proto": PROTOCOL_VERSION})

    @app.get("/healthz")
    def health():
        return {
            "node_id": config.node_id,
            "events": node.store.last_seq,
            "publications": len(node.federation.visible_entries()),
            "time": iso(clock()),
        }

    return app
