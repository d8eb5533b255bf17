"""Event envelope and canonical serialization.

Every mutation is recorded as exactly one event (two for compound operations
like in-text commenting, which places an anchor and posts the comment).
Replay folds events through the same apply functions the live path uses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime

from .model import SYSTEM_USER_ID, parse_ts, ts_str

EVENT_TYPES = frozenset({
    "user_registered",
    "group_created",
    "member_added",
    "area_created",
    "area_shared",
    "comment_posted",
    "document_posted",
    "revision_posted",
    "anchor_placed",
    "decision_created",
    "ballot_cast",
    "decision_closed",
    "project_created",
    "task_added",
    "task_edited",
    "task_volunteered",
    "subscription_set",
    "homepage_set",
})

# Events that fan out email notifications ("whenever a comment or item is posted").
NOTIFYING_TYPES = frozenset({
    "comment_posted",
    "document_posted",
    "decision_created",
    "project_created",
})


@dataclass(frozen=True)
class Event:
    seq: int
    at: datetime
    actor: int  # SYSTEM_USER_ID for platform-generated events
    type: str
    data: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "at": ts_str(self.at),
            "actor": self.actor,
            "type": self.type,
            "data": self.data,
        }

    @staticmethod
    def from_dict(d: dict) -> "Event":
        return Event(
            seq=d["seq"],
            at=parse_ts(d["at"]),
            actor=d.get("actor", SYSTEM_USER_ID),
            type=d["type"],
            data=d["data"],
        )


def canonical_json(obj) -> str:
    """Stable field order, UTF-8 text, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False,
                      separators=(",", ":"))
