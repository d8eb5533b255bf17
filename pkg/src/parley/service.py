"""HTTP/JSON facade over the core library.

One route per core operation; every handler funnels into a single core call
with the caller-supplied timestamp fixed to the server clock at receipt, so
the core never reads a clock.  Errors map to statuses via the exception
code: validation 400, credentials 401, access 403, missing referents 404,
state conflicts 409.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Callable, Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import errors
from .gateway import EmailGateway
from .indexing import SortKey, ThreadIndex
from .model import (
    AccessAction,
    Anchor,
    Comment,
    CommentTarget,
    GroupSpace,
    Item,
    MeetingArea,
    Priority,
    Revision,
    TargetKind,
    Task,
    Visibility,
    ts_str,
)
from .platform import Platform, TaskSortKey
from .tallying import Ballot, BallotContent, DecisionConfig

STATUS_BY_CODE = {
    "InvalidSlug": 400, "BadToken": 400, "InvalidContent": 400,
    "OffsetOutOfRange": 400, "BadAddress": 400, "EmptyBody": 400,
    "ValidationError": 400,
    "BadCredentials": 401,
    "AccessDenied": 403, "NotMember": 403,
    "NotFound": 404, "DanglingTarget": 404, "UnknownRevision": 404,
    "UnknownSender": 404, "UnknownArea": 404,
    "DuplicateSlug": 409, "DeadlinePassed": 409, "InvalidConfig": 409,
    "AlreadyClosed": 409, "InvariantViolation": 409,
    "StorageFailure": 500, "ChecksumMismatch": 500,
    "UnknownPayloadVersion": 500, "SeqMismatch": 500,
}

DEFAULT_PAGE_LIMIT = 100


# -- passwords ----------------------------------------------------------------

def hash_password(password: str) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(password.encode("utf-8"), salt=salt,
                            n=2 ** 14, r=8, p=1)
    return f"scrypt:16384:8:1:{salt.hex()}:{digest.hex()}"

def verify_password(password: str, stored: Optional[str]) -> bool:
    if not stored:
        return False
    try:
        scheme, n, r, p, salt_hex, digest_hex = stored.split(":")
        if scheme != "scrypt":
            return False
        digest = hashlib.scrypt(password.encode("utf-8"),
                                salt=bytes.fromhex(salt_hex),
                                n=int(n), r=int(r), p=int(p))
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


# -- sessions -----------------------------------------------------------------

@dataclass
class SessionStore:
    ttl: timedelta
    tokens: dict = field(default_factory=dict)

    def issue(self, user_id: int, now: datetime) -> tuple[str, datetime]:
        token = secrets.token_urlsafe(32)  # 256 bits
        expires = now + self.ttl
        self.tokens[token] = (user_id, expires)
        return token, expires

    def resolve(self, token: str, now: datetime) -> Optional[int]:
        entry = self.tokens.get(token)
        if entry is None:
            return None
        user_id, expires = entry
        if now >= expires:
            del self.tokens[token]
            return None
        return user_id


@dataclass
class ServiceConfig:
    domain: str = "parley.local"
    token_ttl_seconds: int = 24 * 3600


# -- wire shapes ----------------------------------------------------------------

def group_json(g: GroupSpace) -> dict:
    return {
        "id": g.id, "slug": g.slug, "name": g.name,
        "visibility": g.visibility.value, "description": g.description,
        "announcements": [list(p) for p in g.announcements],
        "links": [list(p) for p in g.links],
        "members": sorted(g.members),
        "meeting_areas": list(g.meeting_areas),
    }


def area_json(a: MeetingArea) -> dict:
    return {
        "id": a.id, "slug": a.slug, "name": a.name,
        "owner_groups": list(a.owner_groups), "items": list(a.items),
        "subscribers": sorted(a.subscribers),
    }


def item_json(i: Item) -> dict:
    return {
        "id": i.id, "area": i.area, "author": i.author,
        "created_at": ts_str(i.created_at), "title": i.title,
        "kind": i.kind.value, "url": i.url, "body": i.body,
        "reference_token": i.reference_token,
    }


def comment_json(platform: Platform, c: Comment) -> dict:
    token = _header_token(platform, c)
    header = " | ".join(
        [c.subject, platform.users[c.author].display_name, ts_str(c.posted_at)]
        + ([token] if token else []))
    return {
        "id": c.id, "area": c.area, "author": c.author,
        "author_name": platform.users[c.author].display_name,
        "posted_at": ts_str(c.posted_at), "subject": c.subject,
        "body": c.body, "target": c.target.to_dict(),
        "reference_token": c.reference_token, "header": header,
    }


def _header_token(platform: Platform, c: Comment) -> Optional[str]:
    t = c.target
    if t.kind is TargetKind.ITEM:
        return platform.items[t.ref].reference_token
    if t.kind is TargetKind.REPLY:
        return platform.comments[t.ref].reference_token
    if t.kind is TargetKind.IN_TEXT:
        doc = platform.revisions[platform.anchors[t.ref].rev_id].doc
        return platform.items[doc].reference_token
    return None


def revision_json(r: Revision) -> dict:
    return {"rev_id": r.rev_id, "doc": r.doc, "parent": r.parent,
            "author": r.author, "created_at": ts_str(r.created_at),
            "body": r.body}


def anchor_json(a: Anchor) -> dict:
    return {"anchor_id": a.anchor_id, "rev_id": a.rev_id, "offset": a.offset,
            "comment": a.comment, "migrated": a.migrated,
            "source_anchor": a.source_anchor}


def ballot_json(b: Ballot) -> dict:
    return {"voter": b.voter, "cast_at": ts_str(b.cast_at),
            "content": b.content.to_dict(), "annotation": b.annotation,
            "history": [list(h) for h in b.history]}


def task_json(platform: Platform, t: Task) -> dict:
    return {"id": t.id, "project": t.project, "title": t.title,
            "priority": t.priority.value, "status": t.status.value,
            "handlers": sorted(t.handlers),
            "handler_names": sorted(platform.users[u].display_name
                                    for u in t.handlers),
            "created_at": ts_str(t.created_at),
            "updated_at": ts_str(t.updated_at),
            "description": t.description}


def index_json(platform: Platform, index: ThreadIndex,
               limit: int, offset: int) -> dict:
    flat = [(g.header, thread) for g in index.entries for thread in g.threads]
    total = len(flat)
    page = flat[offset:offset + limit]
    entries: list = []
    for header, thread in page:
        if not entries or entries[-1]["header"] != header:
            entries.append({"header": header, "threads": []})
        entries[-1]["threads"].append(
            [comment_json(platform, c) for c in thread])
    return {"sort_key": index.sort_key.value, "total_threads": total,
            "limit": limit, "offset": offset, "entries": entries}


# -- request bodies --------------------------------------------------------------

class LoginBody(BaseModel):
    email: str
    password: str


class GroupBody(BaseModel):
    slug: str
    name: str
    visibility: str = "open"


class HomepageBody(BaseModel):
    description: Optional[str] = None
    announcements: Optional[list] = None
    links: Optional[list] = None


class MemberBody(BaseModel):
    user_id: int


class AreaBody(BaseModel):
    slug: str
    name: str


class ShareBody(BaseModel):
    target_group: int


class CommentBody(BaseModel):
    body: str
    subject: Optional[str] = None
    target: dict = {"kind": "area_global", "ref": None}


class DocumentBody(BaseModel):
    title: str
    body: str


class RevisionBody(BaseModel):
    base_rev: int
    body: str


class AnchorBody(BaseModel):
    offset: int
    body: str
    subject: Optional[str] = None


class DecisionBody(BaseModel):
    kind: str = "decision"
    question: str
    options: list
    method: str
    rule: dict
    basis: str = "ballots_cast"
    deadline: str
    quorum: Optional[int] = None


class BallotBody(BaseModel):
    content: dict
    annotation: Optional[str] = None


class ProjectBody(BaseModel):
    title: str


class TaskBody(BaseModel):
    title: str
    priority: str = "P3"
    description: str = ""


class TaskPatchBody(BaseModel):
    title: Optional[str] = None
    priority: Optional[str] = None
    status: Optional[str] = None
    handlers: Optional[list] = None
    description: Optional[str] = None


class SubscriptionBody(BaseModel):
    enabled: bool


def _require_text(value: str, what: str) -> None:
    try:
        value.encode("utf-8")
    except UnicodeEncodeError:
        raise errors.ValidationError(f"{what} is not valid text") from None
    if "\x00" in value:
        raise errors.ValidationError(f"{what} contains NUL bytes")


def _parse_target(d: dict) -> CommentTarget:
    try:
        return CommentTarget.from_dict(d)
    except (KeyError, ValueError):
        raise errors.ValidationError(f"malformed comment target {d!r}") from None


def _parse_deadline(text: str) -> datetime:
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise errors.ValidationError(f"bad deadline {text!r}") from None
    if dt.tzinfo is None:
        raise errors.ValidationError("deadline must carry a timezone")
    return dt


def create_app(platform: Platform, config: Optional[ServiceConfig] = None,
               clock: Optional[Callable[[], datetime]] = None,
               gateway: Optional[EmailGateway] = None) -> FastAPI:
    config = config or ServiceConfig()
    clock = clock or (lambda: datetime.now(timezone.utc))
    sessions = SessionStore(ttl=timedelta(seconds=config.token_ttl_seconds))
    if gateway is None:
        gateway = EmailGateway(platform, config.domain)
        gateway.install()

    app = FastAPI(title="parley", version="0.1.0")
    app.state.platform = platform
    app.state.sessions = sessions
    app.state.gateway = gateway
    app.state.clock = clock

    @app.exception_handler(errors.ParleyError)
    async def domain_error(request: Request, exc: errors.ParleyError):
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    def current_user(authorization: Optional[str] = Header(None)) -> Optional[int]:
        if not authorization:
            return None
        scheme, _, token = authorization.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise errors.BadCredentials("malformed Authorization header")
        user_id = sessions.resolve(token, clock())
        if user_id is None:
            raise errors.BadCredentials("invalid or expired token")
        return user_id

    def required_user(user: Optional[int] = Depends(current_user)) -> int:
        if user is None:
            raise errors.BadCredentials("authentication required")
        return user

    # -- auth ------------------------------------------------------------

    @app.post("/auth/login")
    def login(body: LoginBody):
        user_id = platform.users_by_email.get(body.email)
        user = platform.users.get(user_id) if user_id is not None else None
        stored = user.password_hash if user else None
        if not verify_password(body.password, stored):
            # identical failure for unknown email and wrong password
            raise errors.BadCredentials("bad email or password")
        token, expires = sessions.issue(user.id, clock())
        return {"token": token, "user_id": user.id,
                "expires_at": ts_str(expires)}

    # -- groups ------------------------------------------------------------

    @app.post("/groups", status_code=201)
    def create_group(body: GroupBody, user: int = Depends(required_user)):
        try:
            visibility = Visibility(body.visibility)
        except ValueError:
            raise errors.ValidationError(f"bad visibility {body.visibility!r}")
        return group_json(platform.create_group(
            user, body.slug, body.name, visibility, clock()))

    @app.get("/groups/{group_id}")
    def get_group(group_id: int, user: Optional[int] = Depends(current_user)):
        group = platform.group(group_id)
        if not platform.check_access(user, group_id, AccessAction.READ_AREA):
            raise errors.AccessDenied("closed group")
        return group_json(group)

    @app.patch("/groups/{group_id}/homepage")
    def set_homepage(group_id: int, body: HomepageBody,
                     user: int = Depends(required_user)):
        return group_json(platform.set_homepage(
            group_id, user, clock(), description=body.description,
            announcements=body.announcements, links=body.links))

    @app.post("/groups/{group_id}/members")
    def add_member(group_id: int, body: MemberBody,
                   user: int = Depends(required_user)):
        return group_json(platform.add_member(
            group_id, user, body.user_id, clock()))

    @app.post("/groups/{group_id}/areas", status_code=201)
    def create_area(group_id: int, body: AreaBody,
                    user: int = Depends(required_user)):
        return area_json(platform.create_meeting_area(
            group_id, user, body.slug, body.name, clock()))

    # -- areas ------------------------------------------------------------

    @app.get("/areas/{area_id}")
    def get_area(area_id: int, user: Optional[int] = Depends(current_user)):
        area = platform.area(area_id)
        if not platform.check_access(user, area_id, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        payload = area_json(area)
        payload["item_details"] = [item_json(platform.items[i])
                                   for i in area.items]
        return payload

    @app.post("/areas/{area_id}/share")
    def share_area(area_id: int, body: ShareBody,
                   user: int = Depends(required_user)):
        return area_json(platform.share_meeting_area(
            area_id, user, body.target_group, clock()))

    @app.get("/areas/{area_id}/index")
    def get_index(area_id: int, sort: str = "date",
                  limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1, le=1000),
                  offset: int = Query(0, ge=0),
                  user: Optional[int] = Depends(current_user)):
        if not platform.check_access(user, area_id, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        try:
            sort_key = SortKey(sort)
        except ValueError:
            raise errors.ValidationError(f"bad sort key {sort!r}")
        return index_json(platform, platform.build_index(area_id, sort_key),
                          limit, offset)

    @app.post("/areas/{area_id}/comments", status_code=201)
    def post_comment(area_id: int, body: CommentBody,
                     user: int = Depends(required_user)):
        _require_text(body.body, "comment body")
        comment = platform.post_comment(
            area_id, user, body.subject, body.body,
            _parse_target(body.target), clock())
        return comment_json(platform, comment)

    @app.get("/areas/{area_id}/resolve")
    def resolve(area_id: int, token: str,
                user: Optional[int] = Depends(current_user)):
        if not platform.check_access(user, area_id, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        entity = platform.resolve_reference(token, area_id)
        if isinstance(entity, Item):
            return {"kind": "item", "item": item_json(entity)}
        return {"kind": "comment", "comment": comment_json(platform, entity)}

    @app.put("/areas/{area_id}/subscription")
    def set_subscription(area_id: int, body: SubscriptionBody,
                         user: int = Depends(required_user)):
        area = platform.set_subscription(area_id, user, body.enabled, clock())
        return {"area": area.id, "user": user,
                "subscribed": user in area.subscribers}

    # -- documents ----------------------------------------------------------

    @app.post("/areas/{area_id}/documents", status_code=201)
    def post_document(area_id: int, body: DocumentBody,
                      user: int = Depends(required_user)):
        _require_text(body.body, "document body")
        item = platform.post_document(area_id, user, body.title, body.body,
                                      clock())
        payload = item_json(item)
        payload["revisions"] = list(platform.documents[item.id])
        return payload

    @app.get("/documents/{doc_id}/revisions")
    def list_revisions(doc_id: int,
                       user: Optional[int] = Depends(current_user)):
        item = platform.item(doc_id)
        if not platform.check_access(user, item.area, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        revs = platform.documents.get(doc_id)
        if revs is None:
            raise errors.NotFound(f"item {doc_id} is not a document")
        return {"doc": doc_id,
                "revisions": [revision_json(platform.revisions[r])
                              for r in revs]}

    @app.post("/documents/{doc_id}/revisions", status_code=201)
    def post_revision(doc_id: int, body: RevisionBody,
                      user: int = Depends(required_user)):
        _require_text(body.body, "document body")
        rev = platform.revise_document(doc_id, body.base_rev, body.body,
                                       user, clock())
        payload = revision_json(rev)
        payload["anchors"] = [anchor_json(platform.anchors[a])
                              for a in platform.anchors_by_rev[rev.rev_id]]
        return payload

    @app.get("/documents/{doc_id}/revisions/{rev_id}")
    def get_revision(doc_id: int, rev_id: int, markers: bool = False,
                     user: Optional[int] = Depends(current_user)):
        item = platform.item(doc_id)
        if not platform.check_access(user, item.area, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        rev = platform.document_revision(doc_id, rev_id)
        payload = revision_json(rev)
        payload["rendered"] = platform.render_document(doc_id, rev_id, markers)
        payload["anchors"] = [anchor_json(platform.anchors[a])
                              for a in platform.anchors_by_rev[rev_id]]
        return payload

    @app.post("/revisions/{rev_id}/anchors", status_code=201)
    def post_anchor(rev_id: int, body: AnchorBody,
                    user: int = Depends(required_user)):
        rev = platform.revisions.get(rev_id)
        if rev is None:
            raise errors.UnknownRevision(f"no revision {rev_id}")
        anchor, comment = platform.insert_intext_comment(
            rev.doc, rev_id, body.offset, user, body.subject, body.body,
            clock())
        return {"anchor": anchor_json(anchor),
                "comment": comment_json(platform, comment)}

    # -- decisions -----------------------------------------------------------

    @app.post("/areas/{area_id}/decisions", status_code=201)
    def create_decision(area_id: int, body: DecisionBody,
                        user: int = Depends(required_user)):
        try:
            config = DecisionConfig.from_dict({
                "kind": body.kind, "question": body.question,
                "options": body.options, "method": body.method,
                "rule": body.rule, "basis": body.basis,
                "deadline": _parse_deadline(body.deadline).isoformat(),
                "quorum": body.quorum,
            })
        except errors.ParleyError:
            raise
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise errors.InvalidConfig(str(exc)) from None
        item = platform.create_decision(area_id, user, config, clock())
        payload = item_json(item)
        payload["config"] = config.to_dict()
        return payload

    @app.get("/decisions/{decision_id}")
    def get_decision(decision_id: int,
                     user: Optional[int] = Depends(current_user)):
        item = platform.item(decision_id)
        if not platform.check_access(user, item.area, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        state = platform.decision_state(decision_id)
        payload = item_json(item)
        payload["config"] = state.config.to_dict()
        payload["closed"] = state.closed_at is not None
        payload["ballots"] = {str(v): ballot_json(b)
                              for v, b in sorted(state.ballots.items())}
        return payload

    @app.put("/decisions/{decision_id}/ballot")
    def cast_ballot(decision_id: int, body: BallotBody,
                    user: int = Depends(required_user)):
        try:
            content = BallotContent.from_dict(body.content)
        except (KeyError, ValueError):
            raise errors.InvalidContent(f"malformed ballot {body.content!r}")
        ballot = platform.cast_ballot(decision_id, user, content, clock(),
                                      annotation=body.annotation)
        return ballot_json(ballot)

    @app.get("/decisions/{decision_id}/tally")
    def get_tally(decision_id: int,
                  user: Optional[int] = Depends(current_user)):
        item = platform.item(decision_id)
        if not platform.check_access(user, item.area, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        return platform.tally(decision_id, clock()).to_dict()

    @app.post("/decisions/{decision_id}/close")
    def close_decision(decision_id: int, user: int = Depends(required_user)):
        item = platform.item(decision_id)
        if not platform.check_access(user, item.area, AccessAction.POST_AREA):
            raise errors.AccessDenied("members only")
        return platform.close_decision(decision_id, user, clock()).to_dict()

    # -- projects -----------------------------------------------------------

    @app.post("/areas/{area_id}/projects", status_code=201)
    def create_project(area_id: int, body: ProjectBody,
                       user: int = Depends(required_user)):
        return item_json(platform.create_project(area_id, user, body.title,
                                                 clock()))

    @app.post("/projects/{project_id}/tasks", status_code=201)
    def add_task(project_id: int, body: TaskBody,
                 user: int = Depends(required_user)):
        try:
            priority = Priority(body.priority)
        except ValueError:
            raise errors.ValidationError(f"bad priority {body.priority!r}")
        return task_json(platform, platform.add_task(
            project_id, user, body.title, priority, body.description, clock()))

    @app.get("/projects/{project_id}/tasks")
    def list_tasks(project_id: int, sort: str = "date",
                   direction: str = "asc",
                   limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1, le=1000),
                   offset: int = Query(0, ge=0),
                   user: Optional[int] = Depends(current_user)):
        item = platform.item(project_id)
        if not platform.check_access(user, item.area, AccessAction.READ_AREA):
            raise errors.AccessDenied("not readable")
        if direction not in ("asc", "desc"):
            raise errors.ValidationError(f"bad direction {direction!r}")
        tasks = platform.sort_tasks(project_id, sort,
                                    descending=direction == "desc")
        page = tasks[offset:offset + limit]
        return {"project": project_id, "total": len(tasks),
                "limit": limit, "offset": offset,
                "tasks": [task_json(platform, t) for t in page]}

    @app.patch("/tasks/{task_id}")
    def edit_task(task_id: int, body: TaskPatchBody,
                  user: int = Depends(required_user)):
        patch = {k: v for k, v in body.model_dump().items() if v is not None}
        return task_json(platform,
                         platform.edit_task(task_id, user, patch, clock()))

    @app.post("/tasks/{task_id}/volunteer")
    def volunteer(task_id: int, user: int = Depends(required_user)):
        return task_json(platform, platform.volunteer(task_id, user, clock()))

    return app
