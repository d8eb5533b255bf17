"""Seeded random-operation driver over a live platform.

Generates valid operations only (it consults current state before each
call), with a monotone clock, so the resulting event log is a realistic
workload for replay, snapshot, and nondestructiveness checks.
"""

from __future__ import annotations

import random
import string
from datetime import datetime, timedelta, timezone
from fractions import Fraction

from parley import (
    BallotContent,
    Basis,
    CommentTarget,
    DecisionConfig,
    DecisionKind,
    ItemKind,
    Method,
    Platform,
    Priority,
    Rule,
    RuleKind,
    TaskStatus,
    Visibility,
)

START = datetime(2026, 4, 1, 8, 0, tzinfo=timezone.utc)

WORDS = ("budget report plan agenda minutes draft proposal review "
         "schedule survey notes charter ballot cleanup").split()


class OpDriver:
    def __init__(self, seed: int, n_users: int = 6, platform: Platform = None):
        self.rng = random.Random(seed)
        self.p = platform if platform is not None else Platform()
        self.now = START
        self._bootstrap(n_users)

    # -- plumbing -----------------------------------------------------------

    def tick(self) -> datetime:
        self.now += timedelta(seconds=self.rng.randint(1, 240))
        return self.now

    def _text(self, lo=1, hi=8) -> str:
        return " ".join(self.rng.choices(WORDS, k=self.rng.randint(lo, hi)))

    def _slug(self) -> str:
        return "".join(self.rng.choices(string.ascii_lowercase, k=8))

    def _member_of(self, area_id):
        members = set()
        for gid in self.p.areas[area_id].owner_groups:
            members |= self.p.groups[gid].members
        return self.rng.choice(sorted(members))

    def _bootstrap(self, n_users):
        for i in range(n_users):
            self.p.register_user(f"Member {i}", f"m{i}@drv.example", self.tick())
        users = sorted(self.p.users)
        g1 = self.p.create_group(users[0], "alpha", "Alpha",
                                 Visibility.OPEN, self.tick())
        g2 = self.p.create_group(users[1], "beta", "Beta",
                                 Visibility.CLOSED, self.tick())
        for u in users[1:4]:
            self.p.add_member(g1.id, u, u, self.tick())
        for u in users[3:]:
            self.p.add_member(g2.id, users[1], u, self.tick())
        self.areas = [
            self.p.create_meeting_area(g1.id, users[0], "main", "Main",
                                       self.tick()).id,
            self.p.create_meeting_area(g1.id, users[0], "side", "Side",
                                       self.tick()).id,
            self.p.create_meeting_area(g2.id, users[1], "board", "Board",
                                       self.tick()).id,
        ]
        self.p.share_meeting_area(self.areas[1], users[3], g2.id, self.tick())

    # -- op menu ------------------------------------------------------------

    def _random_target(self, area_id):
        choices = [CommentTarget.area_global()]
        items = [i for i in self.p.areas[area_id].items]
        if items:
            choices.append(CommentTarget.item(self.rng.choice(items)))
        comments = self.p.comments_by_area[area_id]
        if comments:
            choices.append(CommentTarget.reply_to(self.rng.choice(comments)))
        return self.rng.choice(choices)

    def _random_content(self, config: DecisionConfig) -> BallotContent:
        opts = list(config.options)
        if self.rng.random() < 0.1:
            return BallotContent.abstain()
        if config.method is Method.CHOOSE_ONE:
            return BallotContent.one(self.rng.choice(opts))
        if config.method is Method.APPROVAL:
            k = self.rng.randint(0, len(opts))
            return BallotContent.approve(self.rng.sample(opts, k))
        k = self.rng.randint(1, len(opts))
        return BallotContent.rank(self.rng.sample(opts, k))

    def random_config(self, n_options=None, deadline_minutes=None):
        n = n_options or self.rng.randint(2, 6)
        options = tuple(f"opt{i}" for i in range(n))
        method = self.rng.choice(list(Method))
        rule_kind = self.rng.choice(list(RuleKind))
        fraction = None
        if rule_kind is RuleKind.SUPERMAJORITY:
            fraction = self.rng.choice(
                [Fraction(2, 3), Fraction(3, 4), Fraction(3, 5), Fraction(1)])
        deadline = self.now + timedelta(
            minutes=deadline_minutes or self.rng.randint(5, 120))
        return DecisionConfig(
            kind=self.rng.choice(list(DecisionKind)),
            question=self._text() + "?",
            options=options,
            method=method,
            rule=Rule(rule_kind, fraction),
            basis=self.rng.choice(list(Basis)),
            deadline=deadline,
            quorum=self.rng.choice([None, 0, 1, 2, 3]),
        )

    def op_comment(self):
        area = self.rng.choice(self.areas)
        self.p.post_comment(area, self._member_of(area),
                            self.rng.choice([None, self._text(1, 3)]),
                            self._text(), self._random_target(area),
                            self.tick())

    def op_document(self):
        area = self.rng.choice(self.areas)
        self.p.post_document(area, self._member_of(area), self._text(1, 3),
                             self._text(0, 30), self.tick())

    def _docs(self):
        return [i for i, item in self.p.items.items()
                if item.kind is ItemKind.DOCUMENT]

    def op_revision(self):
        docs = self._docs()
        if not docs:
            return self.op_document()
        doc = self.rng.choice(docs)
        base = self.rng.choice(self.p.documents[doc])
        body = list(self.p.revisions[base].body)
        for _ in range(self.rng.randint(1, 5)):  # small random edit
            pos = self.rng.randint(0, len(body))
            if body and self.rng.random() < 0.5:
                del body[pos - 1 if pos else 0]
            else:
                body.insert(pos, self.rng.choice(string.ascii_lowercase + " "))
        self.p.revise_document(doc, base, "".join(body),
                               self._member_of(self.p.items[doc].area),
                               self.tick())

    def op_anchor(self):
        docs = self._docs()
        if not docs:
            return self.op_document()
        doc = self.rng.choice(docs)
        rev = self.rng.choice(self.p.documents[doc])
        offset = self.rng.randint(0, len(self.p.revisions[rev].body))
        self.p.insert_intext_comment(
            doc, rev, offset, self._member_of(self.p.items[doc].area),
            None, self._text(), self.tick())

    def op_decision(self):
        area = self.rng.choice(self.areas)
        self.p.create_decision(area, self._member_of(area),
                               self.random_config(), self.tick())

    def _open_decisions(self):
        return [d for d, s in self.p.decisions.items()
                if s.closed_at is None and s.config.deadline >= self.now]

    def op_ballot(self):
        open_ds = self._open_decisions()
        if not open_ds:
            return self.op_decision()
        d = self.rng.choice(open_ds)
        state = self.p.decisions[d]
        voter = self._member_of(self.p.items[d].area)
        at = self.tick()
        if at > state.config.deadline or state.closed_at is not None:
            return  # clock ran past the deadline; skip, stay valid
        self.p.cast_ballot(d, voter, self._random_content(state.config), at,
                           annotation=self.rng.choice(
                               [None, None, self._text(1, 4)]))

    def op_close(self):
        ripe = [d for d, s in self.p.decisions.items()
                if s.closed_at is None and s.config.deadline <= self.now]
        if not ripe:
            return self.op_ballot()
        d = self.rng.choice(ripe)
        self.p.close_decision(d, self._member_of(self.p.items[d].area),
                              self.tick())

    def op_project(self):
        area = self.rng.choice(self.areas)
        self.p.create_project(area, self._member_of(area), self._text(1, 3),
                              self.tick())

    def _projects(self):
        return sorted(self.p.projects)

    def op_task(self):
        projects = self._projects()
        if not projects:
            return self.op_project()
        proj = self.rng.choice(projects)
        self.p.add_task(proj, self._member_of(self.p.items[proj].area),
                        self._text(1, 3), self.rng.choice(list(Priority)),
                        self._text(0, 6), self.tick())

    def op_task_update(self):
        tasks = sorted(self.p.tasks)
        if not tasks:
            return self.op_task()
        task_id = self.rng.choice(tasks)
        task = self.p.tasks[task_id]
        actor = self._member_of(self.p.items[task.project].area)
        if self.rng.random() < 0.5:
            self.p.volunteer(task_id, actor, self.tick())
        else:
            status = self.rng.choice(list(TaskStatus))
            patch = {"status": status.value}
            if status in (TaskStatus.ASSIGNED, TaskStatus.IN_PROGRESS) \
                    and not task.handlers:
                patch["handlers"] = [actor]
            self.p.edit_task(task_id, actor, patch, self.tick())

    def op_subscription(self):
        area = self.rng.choice(self.areas)
        self.p.set_subscription(area, self._member_of(area),
                                self.rng.random() < 0.7, self.tick())

    def op_homepage(self):
        gid = self.rng.choice(sorted(self.p.groups))
        editor = self.rng.choice(sorted(self.p.groups[gid].members))
        self.p.set_homepage(gid, editor, self.tick(),
                            description=self._text(),
                            announcements=[[self.now.isoformat(),
                                            self._text(1, 4)]])

    MENU = [
        (op_comment, 8), (op_document, 3), (op_revision, 4), (op_anchor, 3),
        (op_decision, 2), (op_ballot, 5), (op_close, 2),
        (op_project, 1), (op_task, 2), (op_task_update, 3),
        (op_subscription, 1), (op_homepage, 1),
    ]

    def step(self):
        ops, weights = zip(*self.MENU)
        self.rng.choices(ops, weights=weights)[0](self)

    def run(self, n_ops: int):
        for _ in range(n_ops):
            self.step()
        return self.p
