"""Asynchronous deliberation platform core."""

from .errors import ParleyError
from .indexing import SortKey, ThreadIndex
from .model import (
    AccessAction,
    Anchor,
    Comment,
    CommentTarget,
    GroupSpace,
    Item,
    ItemKind,
    MeetingArea,
    Priority,
    Revision,
    SYSTEM_USER_ID,
    TargetKind,
    Task,
    TaskStatus,
    User,
    Visibility,
)
from .platform import DecisionState, Platform, TaskSortKey
from .service import ServiceConfig, create_app, hash_password
from .tallying import (
    Ballot,
    BallotContent,
    Basis,
    DecisionConfig,
    DecisionKind,
    Method,
    Outcome,
    OutcomeKind,
    Rule,
    RuleKind,
    TallyResult,
    compute_tally,
    evaluate_rule,
)

__all__ = [name for name in dir() if not name.startswith("_")]
