"""Shared scenario builders for the test suite."""

from datetime import datetime, timedelta, timezone

from parley import (
    Basis,
    DecisionConfig,
    DecisionKind,
    Method,
    Platform,
    Rule,
    RuleKind,
    Visibility,
)

T0 = datetime(2026, 3, 1, 9, 0, tzinfo=timezone.utc)


def t(minutes=0, seconds=0):
    return T0 + timedelta(minutes=minutes, seconds=seconds)


def make_platform(n_users=3):
    """Platform with n registered users (ids 1..n), no groups."""
    p = Platform()
    for i in range(1, n_users + 1):
        p.register_user(f"User {i}", f"user{i}@example.org", t())
    return p


def make_area(p=None, visibility=Visibility.OPEN, members=(1, 2)):
    """One group + one meeting area; returns (platform, group, area)."""
    if p is None:
        p = make_platform()
    group = p.create_group(members[0], "council", "Council", visibility, t())
    for uid in members[1:]:
        p.add_member(group.id, members[0], uid, t())
    area = p.create_meeting_area(group.id, members[0], "budget", "Budget", t(1))
    return p, group, area


def simple_decision_config(deadline=None, method=Method.CHOOSE_ONE,
                           rule=None, options=("Yes", "No"),
                           basis=Basis.BALLOTS_CAST, quorum=None,
                           kind=DecisionKind.DECISION):
    return DecisionConfig(
        kind=kind, question="Adopt the proposal?", options=tuple(options),
        method=method, rule=rule or Rule(RuleKind.PLURALITY_WINNER),
        basis=basis, deadline=deadline or t(60), quorum=quorum)
