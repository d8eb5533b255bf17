"""Core domain types: users, groups, meeting areas, items, comments, tasks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from .errors import ValidationError

SLUG_RE = re.compile(r"^[a-z0-9-]{1,64}$")
REFERENCE_RE = re.compile(r"^\[(item|c):([0-9]+)\]$")

# Reserved actor id for platform-generated records (e.g. decision results).
SYSTEM_USER_ID = 0


def to_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        raise ValidationError("timestamps must be timezone-aware")
    return dt.astimezone(timezone.utc)


def ts_str(dt: datetime) -> str:
    return to_utc(dt).isoformat()


def parse_ts(s: str) -> datetime:
    return datetime.fromisoformat(s)


class Visibility(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


class AccessAction(str, Enum):
    READ_AREA = "read_area"
    POST_AREA = "post_area"
    VOTE_AREA = "vote_area"
    ADMIN_GROUP = "admin_group"


class ItemKind(str, Enum):
    DOCUMENT = "document"
    WEBSITE_LINK = "website_link"
    QUESTION = "question"
    DECISION = "decision"
    PROJECT = "project"


@dataclass
class User:
    id: int
    display_name: str
    email: str
    password_hash: Optional[str] = None

    @staticmethod
    def validate_email(email: str) -> None:
        if not email or email.count("@") != 1:
            raise ValidationError(f"bad email address: {email!r}")


@dataclass
class GroupSpace:
    id: int
    slug: str
    name: str
    visibility: Visibility
    description: str = ""
    announcements: list = field(default_factory=list)  # [iso_ts, text] pairs
    links: list = field(default_factory=list)          # [label, url] pairs
    members: set = field(default_factory=set)
    meeting_areas: list = field(default_factory=list)


@dataclass
class MeetingArea:
    id: int
    slug: str
    name: str
    owner_groups: list = field(default_factory=list)  # ordered, acts as a set
    items: list = field(default_factory=list)
    subscribers: set = field(default_factory=set)


@dataclass
class Item:
    id: int
    area: int
    author: int
    created_at: datetime
    title: str
    kind: ItemKind
    url: Optional[str] = None    # website_link
    body: Optional[str] = None   # question

    @property
    def reference_token(self) -> str:
        return f"[item:{self.id}]"


class TargetKind(str, Enum):
    AREA_GLOBAL = "area_global"
    ITEM = "item"
    REPLY = "reply"
    IN_TEXT = "in_text"


@dataclass(frozen=True)
class CommentTarget:
    kind: TargetKind
    ref: Optional[int] = None

    @staticmethod
    def area_global() -> "CommentTarget":
        return CommentTarget(TargetKind.AREA_GLOBAL)

    @staticmethod
    def item(item_id: int) -> "CommentTarget":
        return CommentTarget(TargetKind.ITEM, item_id)

    @staticmethod
    def reply_to(comment_id: int) -> "CommentTarget":
        return CommentTarget(TargetKind.REPLY, comment_id)

    @staticmethod
    def in_text(anchor_id: int) -> "CommentTarget":
        return CommentTarget(TargetKind.IN_TEXT, anchor_id)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "ref": self.ref}

    @staticmethod
    def from_dict(d: dict) -> "CommentTarget":
        return CommentTarget(TargetKind(d["kind"]), d["ref"])


@dataclass
class Comment:
    id: int
    area: int
    author: int
    posted_at: datetime
    subject: str
    body: str
    target: CommentTarget
    event_seq: int = 0

    @property
    def reference_token(self) -> str:
        return f"[c:{self.id}]"


@dataclass
class Revision:
    rev_id: int
    doc: int
    parent: Optional[int]
    author: int
    created_at: datetime
    body: str


@dataclass
class Anchor:
    anchor_id: int
    rev_id: int
    offset: int
    comment: int
    migrated: bool = False
    source_anchor: Optional[int] = None


class Priority(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    P5 = "P5"


class TaskStatus(str, Enum):
    OPEN = "open"
    ASSIGNED = "assigned"
    IN_PROGRESS = "in_progress"
    DONE = "done"
    DECLINED = "declined"


# Deterministic orderings used by task sorting.
PRIORITY_ORDER = {p: i for i, p in enumerate(Priority)}
STATUS_ORDER = {s: i for i, s in enumerate(TaskStatus)}


@dataclass
class Task:
    id: int
    project: int
    title: str
    priority: Priority
    status: TaskStatus
    created_at: datetime
    updated_at: datetime
    description: str = ""
    handlers: set = field(default_factory=set)


def validate_slug(slug: str) -> None:
    from .errors import InvalidSlug
    if not SLUG_RE.match(slug):
        raise InvalidSlug(f"slug must match [a-z0-9-]{{1,64}}: {slug!r}")
