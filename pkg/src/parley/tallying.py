"""Ballot content, decision configuration, and deterministic tally math.

Scores per method: choose-one counts, approval counts, or Borda points
(m options, rank r earns m - r, unranked options earn 0).  Decision rules
operate on exact arithmetic (fractions), never floats, so supermajority
thresholds like 2/3 are applied precisely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import InvalidConfig, InvalidContent
from .model import parse_ts, ts_str


class DecisionKind(str, Enum):
    POLL = "poll"          # nonbinding: provisional outcomes visible continuously
    DECISION = "decision"  # binding: outcome pending until the deadline


class Method(str, Enum):
    CHOOSE_ONE = "choose_one"
    APPROVAL = "approval"
    RANKED = "ranked"


class RuleKind(str, Enum):
    PLURALITY_WINNER = "plurality_winner"
    MAJORITY = "majority"
    SUPERMAJORITY = "supermajority"
    UNANIMITY = "unanimity"


class Basis(str, Enum):
    BALLOTS_CAST = "ballots_cast"
    ELIGIBLE_MEMBERS = "eligible_members"


@dataclass(frozen=True)
class Rule:
    kind: RuleKind
    fraction: Optional[Fraction] = None  # supermajority threshold

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "fraction": None if self.fraction is None else str(self.fraction),
        }

    @staticmethod
    def from_dict(d: dict) -> "Rule":
        frac = d.get("fraction")
        return Rule(RuleKind(d["kind"]), None if frac is None else Fraction(frac))


@dataclass(frozen=True)
class DecisionConfig:
    kind: DecisionKind
    question: str
    options: tuple
    method: Method
    rule: Rule
    basis: Basis
    deadline: datetime
    quorum: Optional[int] = None

    def validate(self, created_at: datetime) -> None:
        if len(self.options) < 2:
            raise InvalidConfig("at least two options required")
        if len(set(self.options)) != len(self.options):
            raise InvalidConfig("options must be distinct")
        if self.rule.kind is RuleKind.SUPERMAJORITY:
            f = self.rule.fraction
            if f is None or not (Fraction(1, 2) < f <= 1):
                raise InvalidConfig("supermajority fraction must satisfy 1/2 < f <= 1")
        elif self.rule.fraction is not None:
            raise InvalidConfig("fraction only valid for supermajority")
        if self.quorum is not None and self.quorum < 0:
            raise InvalidConfig("quorum must be nonnegative")
        if self.deadline <= created_at:
            raise InvalidConfig("deadline must be strictly after creation")

    @property
    def target_option(self) -> str:
        # adopt/reject rules count the first option, conventionally "Yes"
        return self.options[0]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "question": self.question,
            "options": list(self.options),
            "method": self.method.value,
            "rule": self.rule.to_dict(),
            "basis": self.basis.value,
            "deadline": ts_str(self.deadline),
            "quorum": self.quorum,
        }

    @staticmethod
    def from_dict(d: dict) -> "DecisionConfig":
        return DecisionConfig(
            kind=DecisionKind(d["kind"]),
            question=d["question"],
            options=tuple(d["options"]),
            method=Method(d["method"]),
            rule=Rule.from_dict(d["rule"]),
            basis=Basis(d["basis"]),
            deadline=parse_ts(d["deadline"]),
            quorum=d.get("quorum"),
        )


class ContentKind(str, Enum):
    ONE = "one"
    APPROVE = "approve"
    RANK = "rank"
    ABSTAIN = "abstain"


@dataclass(frozen=True)
class BallotContent:
    kind: ContentKind
    choice: Optional[str] = None   # one
    options: tuple = ()            # approve (set) or rank (ordered)

    @staticmethod
    def one(option: str) -> "BallotContent":
        return BallotContent(ContentKind.ONE, choice=option)

    @staticmethod
    def approve(options) -> "BallotContent":
        return BallotContent(ContentKind.APPROVE, options=tuple(sorted(set(options))))

    @staticmethod
    def rank(ordering) -> "BallotContent":
        return BallotContent(ContentKind.RANK, options=tuple(ordering))

    @staticmethod
    def abstain() -> "BallotContent":
        return BallotContent(ContentKind.ABSTAIN)

    def validate(self, config: DecisionConfig) -> None:
        opts = set(config.options)
        if self.kind is ContentKind.ONE:
            if config.method is not Method.CHOOSE_ONE:
                raise InvalidContent("ballot shape does not match method")
            if self.choice not in opts:
                raise InvalidContent(f"unknown option {self.choice!r}")
        elif self.kind is ContentKind.APPROVE:
            if config.method is not Method.APPROVAL:
                raise InvalidContent("ballot shape does not match method")
            if not set(self.options) <= opts:
                raise InvalidContent("unknown option in approval set")
        elif self.kind is ContentKind.RANK:
            if config.method is not Method.RANKED:
                raise InvalidContent("ballot shape does not match method")
            if len(set(self.options)) != len(self.options):
                raise InvalidContent("ranking contains duplicates")
            if not set(self.options) <= opts:
                raise InvalidContent("unknown option in ranking")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "choice": self.choice,
            "options": list(self.options),
        }

    @staticmethod
    def from_dict(d: dict) -> "BallotContent":
        return BallotContent(ContentKind(d["kind"]), d.get("choice"),
                             tuple(d.get("options", ())))


@dataclass
class Ballot:
    voter: int
    cast_at: datetime
    content: BallotContent
    annotation: Optional[str] = None
    history: list = field(default_factory=list)  # prior (content, cast_at, annotation)


class OutcomeKind(str, Enum):
    WINNER = "winner"
    ADOPTED = "adopted"
    REJECTED = "rejected"
    TIE = "tie"
    NO_QUORUM = "no_quorum"
    PENDING = "pending"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    option: Optional[str] = None   # winner
    options: tuple = ()            # tie, sorted

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "option": self.option,
                "options": list(self.options)}

    @staticmethod
    def from_dict(d: dict) -> "Outcome":
        return Outcome(OutcomeKind(d["kind"]), d.get("option"),
                       tuple(d.get("options", ())))


@dataclass(frozen=True)
class TallyResult:
    computed_at: datetime
    provisional: bool
    per_option_scores: dict
    ballots_cast: int
    abstentions: int
    distinct_voters: int
    outcome: Outcome

    def to_dict(self) -> dict:
        return {
            "computed_at": ts_str(self.computed_at),
            "provisional": self.provisional,
            "per_option_scores": dict(self.per_option_scores),
            "ballots_cast": self.ballots_cast,
            "abstentions": self.abstentions,
            "distinct_voters": self.distinct_voters,
            "outcome": self.outcome.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TallyResult":
        return TallyResult(
            computed_at=parse_ts(d["computed_at"]),
            provisional=d["provisional"],
            per_option_scores=dict(d["per_option_scores"]),
            ballots_cast=d["ballots_cast"],
            abstentions=d["abstentions"],
            distinct_voters=d["distinct_voters"],
            outcome=Outcome.from_dict(d["outcome"]),
        )


def compute_scores(config: DecisionConfig, ballots) -> tuple[dict, int, int]:
    """Scores over current ballots only; returns (scores, ballots_cast, abstentions)."""
    scores = {opt: 0 for opt in config.options}
    ballots_cast = 0
    abstentions = 0
    m = len(config.options)
    for ballot in ballots:
        content = ballot.content
        if content.kind is ContentKind.ABSTAIN:
            abstentions += 1
            continue
        ballots_cast += 1
        if content.kind is ContentKind.ONE:
            scores[content.choice] += 1
        elif content.kind is ContentKind.APPROVE:
            for opt in content.options:
                scores[opt] += 1
        elif content.kind is ContentKind.RANK:
            for r, opt in enumerate(content.options, start=1):
                scores[opt] += m - r
    return scores, ballots_cast, abstentions


def evaluate_rule(options, scores: dict, rule: Rule, basis_count: int,
                  ballots_cast: int, quorum: Optional[int],
                  distinct_voters: int) -> Outcome:
    if quorum is not None and distinct_voters < quorum:
        return Outcome(OutcomeKind.NO_QUORUM)
    if rule.kind is RuleKind.PLURALITY_WINNER:
        top = max(scores[o] for o in options)
        leaders = [o for o in options if scores[o] == top]
        if len(leaders) == 1:
            return Outcome(OutcomeKind.WINNER, option=leaders[0])
        return Outcome(OutcomeKind.TIE, options=tuple(sorted(leaders)))
    target = scores[options[0]]
    if rule.kind is RuleKind.MAJORITY:
        adopted = 2 * target > basis_count  # strict majority
    elif rule.kind is RuleKind.SUPERMAJORITY:
        adopted = Fraction(target) >= rule.fraction * basis_count
    else:  # unanimity
        adopted = ballots_cast >= 1 and target == ballots_cast
    return Outcome(OutcomeKind.ADOPTED if adopted else OutcomeKind.REJECTED)


def compute_tally(config: DecisionConfig, current_ballots, at: datetime,
                  eligible_count: int, force_final: bool = False) -> TallyResult:
    scores, ballots_cast, abstentions = compute_scores(config, current_ballots)
    distinct_voters = ballots_cast + abstentions
    provisional = (not force_final) and at < config.deadline
    if provisional and config.kind is DecisionKind.DECISION:
        outcome = Outcome(OutcomeKind.PENDING)
    else:
        basis = ballots_cast if config.basis is Basis.BALLOTS_CAST else eligible_count
        outcome = evaluate_rule(config.options, scores, config.rule, basis,
                                ballots_cast, config.quorum, distinct_voters)
    return TallyResult(
        computed_at=at,
        provisional=provisional,
        per_option_scores=scores,
        ballots_cast=ballots_cast,
        abstentions=abstentions,
        distinct_voters=distinct_voters,
        outcome=outcome,
    )


def export_ballot_line(ballot: Ballot) -> str:
    """One tab-separated record: voter, method content, optional annotation."""
    content = ballot.content
    if content.kind is ContentKind.ONE:
        text = content.choice
    elif content.kind is ContentKind.APPROVE:
        text = ",".join(content.options)
    elif content.kind is ContentKind.RANK:
        text = ">".join(content.options)
    else:
        text = "abstain"
    parts = [str(ballot.voter), text]
    if ballot.annotation is not None:
        parts.append(ballot.annotation)
    return "\t".join(parts)
