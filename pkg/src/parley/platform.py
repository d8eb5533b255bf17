"""The platform state machine.

All state is a deterministic fold over the event log: mutating operations
validate against current state, build an event payload (allocating ids
up front so replay reproduces them), commit the event, and apply it.  Apply
functions never validate, never read a clock, and never allocate ids beyond
what the payload carries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Optional, Union

from . import diffing, indexing, tallying
from .errors import (
    AccessDenied,
    AlreadyClosed,
    DanglingTarget,
    DeadlinePassed,
    DuplicateSlug,
    InvariantViolation,
    NotFound,
    NotMember,
    OffsetOutOfRange,
    BadToken,
    UnknownPayloadVersion,
    UnknownRevision,
    ValidationError,
)
from .events import EVENT_TYPES, NOTIFYING_TYPES, Event, canonical_json
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
    PRIORITY_ORDER,
    Priority,
    REFERENCE_RE,
    Revision,
    STATUS_ORDER,
    SYSTEM_USER_ID,
    TargetKind,
    Task,
    TaskStatus,
    User,
    Visibility,
    parse_ts,
    to_utc,
    ts_str,
    validate_slug,
)
from .tallying import (
    Ballot,
    BallotContent,
    DecisionConfig,
    DecisionKind,
    OutcomeKind,
    TallyResult,
    compute_tally,
)

NO_SUBJECT = "(no subject)"


@dataclass
class DecisionState:
    config: DecisionConfig
    ballots: dict = field(default_factory=dict)  # voter -> Ballot
    closed_at: Optional[datetime] = None
    final_tally: Optional[TallyResult] = None


class TaskSortKey:
    PRIORITY = "priority"
    STATUS = "status"
    HANDLER = "handler"
    DATE = "date"
    TITLE = "title"
    ALL = (PRIORITY, STATUS, HANDLER, DATE, TITLE)


class Platform:
    """In-memory state plus the operations of every core module."""

    def __init__(self):
        self.head_seq = 0
        self._next_id = 1
        self.users: dict[int, User] = {}
        self.users_by_email: dict[str, int] = {}
        self.groups: dict[int, GroupSpace] = {}
        self.group_slugs: dict[str, int] = {}
        self.areas: dict[int, MeetingArea] = {}
        self.items: dict[int, Item] = {}
        self.comments: dict[int, Comment] = {}
        self.comments_by_area: dict[int, list] = {}
        self.comment_by_event_seq: dict[int, int] = {}
        self.documents: dict[int, list] = {}   # doc item -> ordered rev ids
        self.revisions: dict[int, Revision] = {}
        self.anchors: dict[int, Anchor] = {}
        self.anchors_by_rev: dict[int, list] = {}
        self.decisions: dict[int, DecisionState] = {}
        self.projects: dict[int, list] = {}    # project item -> ordered task ids
        self.tasks: dict[int, Task] = {}
        self._log = None
        self._notifier: Optional[Callable] = None

    # -- wiring -----------------------------------------------------------

    def attach_log(self, log) -> None:
        self._log = log

    def set_notifier(self, fn: Callable) -> None:
        """fn(platform, event), invoked on live commits only (never on replay)."""
        self._notifier = fn

    # -- id and event plumbing ---------------------------------------------

    def _allocate(self, count: int = 1) -> list:
        return list(range(self._next_id, self._next_id + count))

    def _commit(self, type: str, actor: int, at: datetime, data: dict) -> Event:
        event = Event(seq=self.head_seq + 1, at=to_utc(at), actor=actor,
                      type=type, data=data)
        if self._log is not None:
            self._log.append(event)  # durable before the mutation applies
        self.apply(event)
        if self._notifier is not None and type in NOTIFYING_TYPES:
            self._notifier(self, event)
        return event

    def apply(self, event: Event) -> None:
        handler = getattr(self, "_apply_" + event.type, None)
        if event.type not in EVENT_TYPES or handler is None:
            raise UnknownPayloadVersion(f"unknown event type {event.type!r}")
        handler(event)
        self.head_seq = event.seq

    def _bump_id(self, *ids: int) -> None:
        for i in ids:
            if i >= self._next_id:
                self._next_id = i + 1

    @classmethod
    def replay(cls, events) -> "Platform":
        platform = cls()
        for event in events:
            platform.apply(event)
        return platform

    # -- lookups -----------------------------------------------------------

    def group(self, group_id: int) -> GroupSpace:
        try:
            return self.groups[group_id]
        except KeyError:
            raise NotFound(f"no group {group_id}") from None

    def area(self, area_id: int) -> MeetingArea:
        try:
            return self.areas[area_id]
        except KeyError:
            raise NotFound(f"no meeting area {area_id}") from None

    def item(self, item_id: int) -> Item:
        try:
            return self.items[item_id]
        except KeyError:
            raise NotFound(f"no item {item_id}") from None

    def comment(self, comment_id: int) -> Comment:
        try:
            return self.comments[comment_id]
        except KeyError:
            raise NotFound(f"no comment {comment_id}") from None

    def user(self, user_id: int) -> User:
        try:
            return self.users[user_id]
        except KeyError:
            raise NotFound(f"no user {user_id}") from None

    def task(self, task_id: int) -> Task:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise NotFound(f"no task {task_id}") from None

    def decision_state(self, item_id: int) -> DecisionState:
        item = self.item(item_id)
        if item.kind is not ItemKind.DECISION:
            raise NotFound(f"item {item_id} is not a decision")
        return self.decisions[item_id]

    # ======================================================================
    # core_model
    # ======================================================================

    def register_user(self, display_name: str, email: str, at: datetime,
                      password_hash: Optional[str] = None) -> User:
        User.validate_email(email)
        if email in self.users_by_email:
            raise ValidationError(f"email already registered: {email}")
        (uid,) = self._allocate()
        self._commit("user_registered", SYSTEM_USER_ID, at, {
            "id": uid, "display_name": display_name, "email": email,
            "password_hash": password_hash,
        })
        return self.users[uid]

    def _apply_user_registered(self, event: Event) -> None:
        d = event.data
        user = User(d["id"], d["display_name"], d["email"], d.get("password_hash"))
        self.users[user.id] = user
        self.users_by_email[user.email] = user.id
        self._bump_id(user.id)

    def create_group(self, creator: int, slug: str, name: str,
                     visibility: Visibility, at: datetime) -> GroupSpace:
        self.user(creator)
        validate_slug(slug)
        if slug in self.group_slugs:
            raise DuplicateSlug(f"group slug {slug!r} already in use")
        (gid,) = self._allocate()
        self._commit("group_created", creator, at, {
            "id": gid, "slug": slug, "name": name,
            "visibility": Visibility(visibility).value,
        })
        return self.groups[gid]

    def _apply_group_created(self, event: Event) -> None:
        d = event.data
        group = GroupSpace(d["id"], d["slug"], d["name"],
                           Visibility(d["visibility"]), members={event.actor})
        self.groups[group.id] = group
        self.group_slugs[group.slug] = group.id
        self._bump_id(group.id)

    def set_homepage(self, group_id: int, editor: int, at: datetime,
                     description: Optional[str] = None,
                     announcements: Optional[list] = None,
                     links: Optional[list] = None) -> GroupSpace:
        group = self.group(group_id)
        if editor not in group.members:
            raise NotMember(f"user {editor} is not a member of group {group_id}")
        data: dict = {"group": group_id}
        if description is not None:
            data["description"] = description
        if announcements is not None:
            data["announcements"] = [[ts, text] for ts, text in announcements]
        if links is not None:
            data["links"] = [[label, url] for label, url in links]
        self._commit("homepage_set", editor, at, data)
        return group

    def _apply_homepage_set(self, event: Event) -> None:
        d = event.data
        group = self.groups[d["group"]]
        if "description" in d:
            group.description = d["description"]
        if "announcements" in d:
            group.announcements = [list(pair) for pair in d["announcements"]]
        if "links" in d:
            group.links = [list(pair) for pair in d["links"]]

    def add_member(self, group_id: int, inviter: int, new_member: int,
                   at: datetime) -> GroupSpace:
        group = self.group(group_id)
        self.user(new_member)
        if group.visibility is Visibility.CLOSED:
            if inviter not in group.members:
                raise NotMember("closed group: inviter must be a member")
        else:
            if inviter != new_member and inviter not in group.members:
                raise NotMember("open group: join yourself or be invited by a member")
        if new_member in group.members:
            return group  # idempotent
        self._commit("member_added", inviter, at,
                     {"group": group_id, "member": new_member})
        return group

    def _apply_member_added(self, event: Event) -> None:
        self.groups[event.data["group"]].members.add(event.data["member"])

    def create_meeting_area(self, group_id: int, creator: int, slug: str,
                            name: str, at: datetime) -> MeetingArea:
        group = self.group(group_id)
        if creator not in group.members:
            raise NotMember(f"user {creator} is not a member of group {group_id}")
        validate_slug(slug)
        for area_id in group.meeting_areas:
            if self.areas[area_id].slug == slug:
                raise DuplicateSlug(f"area slug {slug!r} already used in group")
        (aid,) = self._allocate()
        self._commit("area_created", creator, at, {
            "id": aid, "group": group_id, "slug": slug, "name": name,
        })
        return self.areas[aid]

    def _apply_area_created(self, event: Event) -> None:
        d = event.data
        area = MeetingArea(d["id"], d["slug"], d["name"], owner_groups=[d["group"]])
        self.areas[area.id] = area
        self.comments_by_area[area.id] = []
        self.groups[d["group"]].meeting_areas.append(area.id)
        self._bump_id(area.id)

    def share_meeting_area(self, area_id: int, sharer: int,
                           target_group: int, at: datetime) -> MeetingArea:
        area = self.area(area_id)
        target = self.group(target_group)
        if not any(sharer in self.groups[g].members for g in area.owner_groups):
            raise NotMember("sharer must belong to an owning group")
        if sharer not in target.members:
            raise NotMember("sharer must belong to the target group")
        if target_group in area.owner_groups:
            return area  # idempotent re-share
        for existing in target.meeting_areas:
            if self.areas[existing].slug == area.slug:
                raise DuplicateSlug(
                    f"area slug {area.slug!r} already used in target group")
        self._commit("area_shared", sharer, at,
                     {"area": area_id, "target_group": target_group})
        return area

    def _apply_area_shared(self, event: Event) -> None:
        d = event.data
        area = self.areas[d["area"]]
        area.owner_groups.append(d["target_group"])
        self.groups[d["target_group"]].meeting_areas.append(area.id)

    def check_access(self, user: Optional[int], target_id: int,
                     action: AccessAction) -> bool:
        """Pure membership/visibility rule; total over areas and groups."""
        if target_id in self.areas:
            owner_ids = self.areas[target_id].owner_groups
        elif target_id in self.groups:
            owner_ids = [target_id]
        else:
            raise NotFound(f"no area or group {target_id}")
        owners = [self.groups[g] for g in owner_ids]
        if user == SYSTEM_USER_ID:
            return True
        member = user is not None and any(user in g.members for g in owners)
        if action is AccessAction.READ_AREA:
            return member or any(g.visibility is Visibility.OPEN for g in owners)
        return member  # post, vote, admin all require membership

    def _require_access(self, user: Optional[int], target_id: int,
                        action: AccessAction) -> None:
        if not self.check_access(user, target_id, action):
            raise AccessDenied(f"{action.value} denied in {target_id}")

    # ======================================================================
    # discussion
    # ======================================================================

    def _default_subject(self, subject: Optional[str],
                         target: CommentTarget) -> str:
        if subject:
            return subject
        if target.kind is TargetKind.REPLY:
            parent = self.comments[target.ref].subject
            return parent if parent.startswith("Re: ") else "Re: " + parent
        if target.kind is TargetKind.ITEM:
            return "Re: " + self.items[target.ref].title
        if target.kind is TargetKind.IN_TEXT:
            doc = self.revisions[self.anchors[target.ref].rev_id].doc
            return "Re: " + self.items[doc].title
        return NO_SUBJECT

    def _validate_target(self, area_id: int, target: CommentTarget,
                         expected_anchor: Optional[int] = None) -> None:
        if target.kind is TargetKind.AREA_GLOBAL:
            return
        if target.kind is TargetKind.ITEM:
            item = self.items.get(target.ref)
            if item is None or item.area != area_id:
                raise DanglingTarget(f"no item {target.ref} in area {area_id}")
        elif target.kind is TargetKind.REPLY:
            parent = self.comments.get(target.ref)
            if parent is None or parent.area != area_id:
                raise DanglingTarget(f"no comment {target.ref} in area {area_id}")
        else:  # IN_TEXT: anchors are only bound via insert_intext_comment
            if target.ref != expected_anchor:
                raise DanglingTarget(
                    "in-text comments are posted via insert_intext_comment")

    def post_comment(self, area_id: int, author: int, subject: Optional[str],
                     body: str, target: CommentTarget, at: datetime,
                     source: str = "web") -> Comment:
        self.area(area_id)
        self._require_access(author, area_id, AccessAction.POST_AREA)
        if not body:
            raise ValidationError("comment body must be non-empty")
        self._validate_target(area_id, target)
        return self._post_comment_unchecked(area_id, author, subject, body,
                                            target, at, source)

    def _post_comment_unchecked(self, area_id, author, subject, body, target,
                                at, source) -> Comment:
        (cid,) = self._allocate()
        self._commit("comment_posted", author, at, {
            "id": cid,
            "area": area_id,
            "subject": self._default_subject(subject, target),
            "body": body,
            "target": target.to_dict(),
            "source": source,
        })
        return self.comments[cid]

    def _apply_comment_posted(self, event: Event) -> None:
        d = event.data
        comment = Comment(
            id=d["id"], area=d["area"], author=event.actor,
            posted_at=event.at, subject=d["subject"], body=d["body"],
            target=CommentTarget.from_dict(d["target"]), event_seq=event.seq,
        )
        self.comments[comment.id] = comment
        self.comments_by_area[comment.area].append(comment.id)
        self.comment_by_event_seq[event.seq] = comment.id
        self._bump_id(comment.id)

    def build_index(self, area_id: int, sort_key: SortKey) -> ThreadIndex:
        area = self.area(area_id)
        area_comments = [self.comments[c] for c in self.comments_by_area[area_id]]
        return indexing.build_index(
            area_comments, SortKey(sort_key), self.comments, self.anchors,
            self.revisions, self.users, self.items, area.items)

    def resolve_reference(self, token: str, area_id: int) -> Union[Item, Comment]:
        self.area(area_id)
        match = REFERENCE_RE.match(token)
        if not match:
            raise BadToken(f"malformed reference token {token!r}")
        kind, ref = match.group(1), int(match.group(2))
        if kind == "item":
            item = self.items.get(ref)
            if item is None or item.area != area_id:
                raise NotFound(f"no item {ref} in area {area_id}")
            return item
        comment = self.comments.get(ref)
        if comment is None or comment.area != area_id:
            raise NotFound(f"no comment {ref} in area {area_id}")
        return comment

    def set_subscription(self, area_id: int, user: int, enabled: bool,
                         at: datetime) -> MeetingArea:
        area = self.area(area_id)
        self._require_access(user, area_id, AccessAction.READ_AREA)
        if (user in area.subscribers) == enabled:
            return area  # idempotent
        self._commit("subscription_set", user, at,
                     {"area": area_id, "user": user, "enabled": enabled})
        return area

    def _apply_subscription_set(self, event: Event) -> None:
        d = event.data
        area = self.areas[d["area"]]
        if d["enabled"]:
            area.subscribers.add(d["user"])
        else:
            area.subscribers.discard(d["user"])

    # ======================================================================
    # documents
    # ======================================================================

    def document_revision(self, doc_id: int, rev_id: int) -> Revision:
        item = self.item(doc_id)
        if item.kind is not ItemKind.DOCUMENT:
            raise NotFound(f"item {doc_id} is not a document")
        rev = self.revisions.get(rev_id)
        if rev is None or rev.doc != doc_id:
            raise UnknownRevision(f"no revision {rev_id} of document {doc_id}")
        return rev

    def post_document(self, area_id: int, author: int, title: str,
                      body: str, at: datetime) -> Item:
        self.area(area_id)
        self._require_access(author, area_id, AccessAction.POST_AREA)
        if not title:
            raise ValidationError("item title must be non-empty")
        item_id, rev_id = self._allocate(2)
        self._commit("document_posted", author, at, {
            "item_id": item_id, "rev_id": rev_id, "area": area_id,
            "title": title, "body": body,
        })
        return self.items[item_id]

    def _apply_document_posted(self, event: Event) -> None:
        d = event.data
        item = Item(d["item_id"], d["area"], event.actor, event.at,
                    d["title"], ItemKind.DOCUMENT)
        self.items[item.id] = item
        self.areas[item.area].items.append(item.id)
        rev = Revision(d["rev_id"], item.id, None, event.actor, event.at, d["body"])
        self.revisions[rev.rev_id] = rev
        self.documents[item.id] = [rev.rev_id]
        self.anchors_by_rev[rev.rev_id] = []
        self._bump_id(item.id, rev.rev_id)

    def insert_intext_comment(self, doc_id: int, rev_id: int, offset: int,
                              author: int, subject: Optional[str], body: str,
                              at: datetime) -> tuple[Anchor, Comment]:
        rev = self.document_revision(doc_id, rev_id)
        area_id = self.items[doc_id].area
        self._require_access(author, area_id, AccessAction.POST_AREA)
        if not 0 <= offset <= len(rev.body):
            raise OffsetOutOfRange(
                f"offset {offset} outside 0..{len(rev.body)}")
        if not body:
            raise ValidationError("comment body must be non-empty")
        anchor_id, comment_id = self._allocate(2)
        self._commit("anchor_placed", author, at, {
            "anchor_id": anchor_id, "rev_id": rev_id, "offset": offset,
            "comment": comment_id,
        })
        target = CommentTarget.in_text(anchor_id)
        self._validate_target(area_id, target, expected_anchor=anchor_id)
        self._commit("comment_posted", author, at, {
            "id": comment_id,
            "area": area_id,
            "subject": self._default_subject(subject, target),
            "body": body,
            "target": target.to_dict(),
            "source": "web",
        })
        return self.anchors[anchor_id], self.comments[comment_id]

    def _apply_anchor_placed(self, event: Event) -> None:
        d = event.data
        anchor = Anchor(d["anchor_id"], d["rev_id"], d["offset"], d["comment"])
        self.anchors[anchor.anchor_id] = anchor
        self.anchors_by_rev[anchor.rev_id].append(anchor.anchor_id)
        self._bump_id(anchor.anchor_id, d["comment"])

    def revise_document(self, doc_id: int, base_rev: int, new_body: str,
                        author: int, at: datetime) -> Revision:
        base = self.document_revision(doc_id, base_rev)
        area_id = self.items[doc_id].area
        self._require_access(author, area_id, AccessAction.POST_AREA)
        script = diffing.diff(base.body, new_body)
        base_anchors = [self.anchors[a] for a in self.anchors_by_rev[base_rev]]
        new_offsets = diffing.migrate_anchors(script,
                                              [a.offset for a in base_anchors])
        ids = self._allocate(1 + len(base_anchors))
        rev_id, anchor_ids = ids[0], ids[1:]
        migrated = [
            [aid, a.comment, offset, a.anchor_id]
            for aid, a, offset in zip(anchor_ids, base_anchors, new_offsets)
        ]
        self._commit("revision_posted", author, at, {
            "rev_id": rev_id, "doc": doc_id, "parent": base_rev,
            "body": new_body, "migrated_anchors": migrated,
        })
        return self.revisions[rev_id]

    def _apply_revision_posted(self, event: Event) -> None:
        d = event.data
        rev = Revision(d["rev_id"], d["doc"], d["parent"], event.actor,
                       event.at, d["body"])
        self.revisions[rev.rev_id] = rev
        self.documents[rev.doc].append(rev.rev_id)
        self.anchors_by_rev[rev.rev_id] = []
        max_id = rev.rev_id
        for aid, comment, offset, source in d["migrated_anchors"]:
            anchor = Anchor(aid, rev.rev_id, offset, comment,
                            migrated=True, source_anchor=source)
            self.anchors[aid] = anchor
            self.anchors_by_rev[rev.rev_id].append(aid)
            max_id = max(max_id, aid)
        self._bump_id(max_id)

    def render_document(self, doc_id: int, rev_id: int,
                        with_markers: bool = False) -> str:
        rev = self.document_revision(doc_id, rev_id)
        if not with_markers:
            return rev.body
        anchors = sorted(
            (self.anchors[a] for a in self.anchors_by_rev[rev_id]),
            key=lambda a: (a.offset, a.comment))
        text = rev.body
        for anchor in reversed(anchors):
            marker = f"[c:{anchor.comment}]"
            text = text[:anchor.offset] + marker + text[anchor.offset:]
        return text

    # ======================================================================
    # decisions
    # ======================================================================

    def create_decision(self, area_id: int, author: int,
                        config: DecisionConfig, at: datetime) -> Item:
        self.area(area_id)
        self._require_access(author, area_id, AccessAction.POST_AREA)
        config.validate(to_utc(at))
        (item_id,) = self._allocate()
        self._commit("decision_created", author, at, {
            "item_id": item_id, "area": area_id, "config": config.to_dict(),
        })
        return self.items[item_id]

    def _apply_decision_created(self, event: Event) -> None:
        d = event.data
        config = DecisionConfig.from_dict(d["config"])
        item = Item(d["item_id"], d["area"], event.actor, event.at,
                    config.question, ItemKind.DECISION)
        self.items[item.id] = item
        self.areas[item.area].items.append(item.id)
        self.decisions[item.id] = DecisionState(config=config)
        self._bump_id(item.id)

    def cast_ballot(self, decision_id: int, voter: int,
                    content: BallotContent, at: datetime,
                    annotation: Optional[str] = None) -> Ballot:
        state = self.decision_state(decision_id)
        area_id = self.items[decision_id].area
        self._require_access(voter, area_id, AccessAction.VOTE_AREA)
        at_utc = to_utc(at)
        if state.closed_at is not None or at_utc > state.config.deadline:
            raise DeadlinePassed("ballots accepted up to the deadline only")
        content.validate(state.config)
        self._commit("ballot_cast", voter, at, {
            "decision": decision_id,
            "content": content.to_dict(),
            "annotation": annotation,
        })
        return state.ballots[voter]

    def _apply_ballot_cast(self, event: Event) -> None:
        d = event.data
        state = self.decisions[d["decision"]]
        content = BallotContent.from_dict(d["content"])
        prior = state.ballots.get(event.actor)
        history = []
        if prior is not None:
            history = prior.history + [
                [prior.content.to_dict(), ts_str(prior.cast_at), prior.annotation]]
        state.ballots[event.actor] = Ballot(
            voter=event.actor, cast_at=event.at, content=content,
            annotation=d.get("annotation"), history=history)

    def _eligible_members(self, decision_id: int) -> set:
        area = self.areas[self.items[decision_id].area]
        eligible: set = set()
        for gid in area.owner_groups:
            eligible |= self.groups[gid].members
        return eligible

    def tally(self, decision_id: int, at: datetime) -> TallyResult:
        state = self.decision_state(decision_id)
        if state.final_tally is not None:
            return state.final_tally
        return tallying.compute_tally(
            state.config, list(state.ballots.values()), to_utc(at),
            eligible_count=len(self._eligible_members(decision_id)))

    def close_decision(self, decision_id: int, actor: int,
                       at: datetime) -> TallyResult:
        state = self.decision_state(decision_id)
        if state.closed_at is not None:
            raise AlreadyClosed(f"decision {decision_id} already closed")
        at_utc = to_utc(at)
        if at_utc < state.config.deadline:
            raise ValidationError("cannot close before the deadline")
        self._commit("decision_closed", actor, at, {
            "decision": decision_id,
            "eligible_count": len(self._eligible_members(decision_id)),
        })
        tally = self.decisions[decision_id].final_tally
        # announce the result in the discussion as a system comment
        item = self.items[decision_id]
        self._post_comment_unchecked(
            item.area, SYSTEM_USER_ID, None,
            _result_comment_body(tally),
            CommentTarget.item(decision_id), at, source="system")
        return tally

    def _apply_decision_closed(self, event: Event) -> None:
        d = event.data
        state = self.decisions[d["decision"]]
        state.closed_at = event.at
        state.final_tally = tallying.compute_tally(
            state.config, list(state.ballots.values()), event.at,
            eligible_count=d["eligible_count"], force_final=True)

    def export_ballots(self, decision_id: int) -> str:
        state = self.decision_state(decision_id)
        lines = [tallying.export_ballot_line(state.ballots[v])
                 for v in sorted(state.ballots)]
        return "\n".join(lines)

    # ======================================================================
    # projects
    # ======================================================================

    def create_project(self, area_id: int, author: int, title: str,
                       at: datetime) -> Item:
        self.area(area_id)
        self._require_access(author, area_id, AccessAction.POST_AREA)
        if not title:
            raise ValidationError("item title must be non-empty")
        (item_id,) = self._allocate()
        self._commit("project_created", author, at, {
            "item_id": item_id, "area": area_id, "title": title,
        })
        return self.items[item_id]

    def _apply_project_created(self, event: Event) -> None:
        d = event.data
        item = Item(d["item_id"], d["area"], event.actor, event.at,
                    d["title"], ItemKind.PROJECT)
        self.items[item.id] = item
        self.areas[item.area].items.append(item.id)
        self.projects[item.id] = []
        self._bump_id(item.id)

    def _project(self, project_id: int) -> Item:
        item = self.item(project_id)
        if item.kind is not ItemKind.PROJECT:
            raise NotFound(f"item {project_id} is not a project")
        return item

    def add_task(self, project_id: int, author: int, title: str,
                 priority: Priority, description: str, at: datetime) -> Task:
        project = self._project(project_id)
        self._require_access(author, project.area, AccessAction.POST_AREA)
        if not title:
            raise ValidationError("task title must be non-empty")
        (task_id,) = self._allocate()
        self._commit("task_added", author, at, {
            "task_id": task_id, "project": project_id, "title": title,
            "priority": Priority(priority).value, "description": description,
        })
        return self.tasks[task_id]

    def _apply_task_added(self, event: Event) -> None:
        d = event.data
        task = Task(d["task_id"], d["project"], d["title"],
                    Priority(d["priority"]), TaskStatus.OPEN,
                    event.at, event.at, d["description"])
        self.tasks[task.id] = task
        self.projects[task.project].append(task.id)
        self._bump_id(task.id)

    def edit_task(self, task_id: int, editor: int, patch: dict,
                  at: datetime) -> Task:
        task = self.task(task_id)
        project = self._project(task.project)
        self._require_access(editor, project.area, AccessAction.POST_AREA)
        allowed = {"title", "priority", "status", "handlers", "description"}
        unknown = set(patch) - allowed
        if unknown:
            raise ValidationError(f"unknown task fields: {sorted(unknown)}")
        data: dict = {"task": task_id}
        status = TaskStatus(patch["status"]) if "status" in patch else task.status
        handlers = set(patch["handlers"]) if "handlers" in patch else task.handlers
        if status in (TaskStatus.ASSIGNED, TaskStatus.IN_PROGRESS) and not handlers:
            raise InvariantViolation(f"{status.value} task needs at least one handler")
        if "title" in patch:
            if not patch["title"]:
                raise ValidationError("task title must be non-empty")
            data["title"] = patch["title"]
        if "priority" in patch:
            data["priority"] = Priority(patch["priority"]).value
        if "status" in patch:
            data["status"] = status.value
        if "handlers" in patch:
            for uid in handlers:
                self.user(uid)
            data["handlers"] = sorted(handlers)
        if "description" in patch:
            data["description"] = patch["description"]
        self._commit("task_edited", editor, at, data)
        return task

    def _apply_task_edited(self, event: Event) -> None:
        d = event.data
        task = self.tasks[d["task"]]
        if "title" in d:
            task.title = d["title"]
        if "priority" in d:
            task.priority = Priority(d["priority"])
        if "status" in d:
            task.status = TaskStatus(d["status"])
        if "handlers" in d:
            task.handlers = set(d["handlers"])
        if "description" in d:
            task.description = d["description"]
        task.updated_at = event.at

    def volunteer(self, task_id: int, user: int, at: datetime) -> Task:
        task = self.task(task_id)
        project = self._project(task.project)
        self._require_access(user, project.area, AccessAction.POST_AREA)
        if user in task.handlers:
            return task  # idempotent
        self._commit("task_volunteered", user, at, {"task": task_id})
        return task

    def _apply_task_volunteered(self, event: Event) -> None:
        task = self.tasks[event.data["task"]]
        task.handlers.add(event.actor)
        if task.status is TaskStatus.OPEN:
            task.status = TaskStatus.ASSIGNED
        task.updated_at = event.at

    def sort_tasks(self, project_id: int, key: str,
                   descending: bool = False) -> list:
        self._project(project_id)
        if key not in TaskSortKey.ALL:
            raise ValidationError(f"unknown task sort key {key!r}")
        tasks = [self.tasks[t] for t in self.projects[project_id]]
        tasks.sort(key=lambda t: (t.created_at, t.id))

        def handler_key(task: Task):
            if not task.handlers:
                return (1, "")  # unassigned last
            return (0, min(self.users[u].display_name for u in task.handlers))

        key_fn = {
            TaskSortKey.PRIORITY: lambda t: PRIORITY_ORDER[t.priority],
            TaskSortKey.STATUS: lambda t: STATUS_ORDER[t.status],
            TaskSortKey.HANDLER: handler_key,
            TaskSortKey.DATE: lambda t: t.created_at,
            TaskSortKey.TITLE: lambda t: t.title.casefold(),
        }[key]
        tasks.sort(key=key_fn, reverse=descending)
        return tasks


    # ======================================================================
    # state serialization (snapshots and digests)
    # ======================================================================

    def to_state_dict(self) -> dict:
        """Canonical depth-first representation of the whole platform state."""
        return {
            "head_seq": self.head_seq,
            "next_id": self._next_id,
            "users": {
                str(uid): {
                    "id": u.id, "display_name": u.display_name,
                    "email": u.email, "password_hash": u.password_hash,
                } for uid, u in self.users.items()
            },
            "groups": {
                str(gid): {
                    "id": g.id, "slug": g.slug, "name": g.name,
                    "visibility": g.visibility.value,
                    "description": g.description,
                    "announcements": [list(p) for p in g.announcements],
                    "links": [list(p) for p in g.links],
                    "members": sorted(g.members),
                    "meeting_areas": list(g.meeting_areas),
                } for gid, g in self.groups.items()
            },
            "areas": {
                str(aid): {
                    "id": a.id, "slug": a.slug, "name": a.name,
                    "owner_groups": list(a.owner_groups),
                    "items": list(a.items),
                    "subscribers": sorted(a.subscribers),
                } for aid, a in self.areas.items()
            },
            "items": {
                str(iid): {
                    "id": i.id, "area": i.area, "author": i.author,
                    "created_at": ts_str(i.created_at), "title": i.title,
                    "kind": i.kind.value, "url": i.url, "body": i.body,
                } for iid, i in self.items.items()
            },
            "comments": {
                str(cid): {
                    "id": c.id, "area": c.area, "author": c.author,
                    "posted_at": ts_str(c.posted_at), "subject": c.subject,
                    "body": c.body, "target": c.target.to_dict(),
                    "event_seq": c.event_seq,
                } for cid, c in self.comments.items()
            },
            "documents": {str(k): list(v) for k, v in self.documents.items()},
            "revisions": {
                str(rid): {
                    "rev_id": r.rev_id, "doc": r.doc, "parent": r.parent,
                    "author": r.author, "created_at": ts_str(r.created_at),
                    "body": r.body,
                } for rid, r in self.revisions.items()
            },
            "anchors": {
                str(aid): {
                    "anchor_id": a.anchor_id, "rev_id": a.rev_id,
                    "offset": a.offset, "comment": a.comment,
                    "migrated": a.migrated, "source_anchor": a.source_anchor,
                } for aid, a in self.anchors.items()
            },
            "decisions": {
                str(did): {
                    "config": s.config.to_dict(),
                    "ballots": {
                        str(v): {
                            "voter": b.voter, "cast_at": ts_str(b.cast_at),
                            "content": b.content.to_dict(),
                            "annotation": b.annotation,
                            "history": b.history,
                        } for v, b in s.ballots.items()
                    },
                    "closed_at": None if s.closed_at is None else ts_str(s.closed_at),
                    "final_tally": None if s.final_tally is None
                                   else s.final_tally.to_dict(),
                } for did, s in self.decisions.items()
            },
            "projects": {str(k): list(v) for k, v in self.projects.items()},
            "tasks": {
                str(tid): {
                    "id": t.id, "project": t.project, "title": t.title,
                    "priority": t.priority.value, "status": t.status.value,
                    "created_at": ts_str(t.created_at),
                    "updated_at": ts_str(t.updated_at),
                    "description": t.description,
                    "handlers": sorted(t.handlers),
                } for tid, t in self.tasks.items()
            },
        }

    @classmethod
    def from_state_dict(cls, state: dict) -> "Platform":
        p = cls()
        p.head_seq = state["head_seq"]
        p._next_id = state["next_id"]
        for d in state["users"].values():
            user = User(d["id"], d["display_name"], d["email"], d["password_hash"])
            p.users[user.id] = user
            p.users_by_email[user.email] = user.id
        for d in state["groups"].values():
            group = GroupSpace(
                d["id"], d["slug"], d["name"], Visibility(d["visibility"]),
                d["description"], [list(x) for x in d["announcements"]],
                [list(x) for x in d["links"]], set(d["members"]),
                list(d["meeting_areas"]))
            p.groups[group.id] = group
            p.group_slugs[group.slug] = group.id
        for d in state["areas"].values():
            area = MeetingArea(d["id"], d["slug"], d["name"],
                               list(d["owner_groups"]), list(d["items"]),
                               set(d["subscribers"]))
            p.areas[area.id] = area
            p.comments_by_area[area.id] = []
        for d in state["items"].values():
            item = Item(d["id"], d["area"], d["author"],
                        parse_ts(d["created_at"]), d["title"],
                        ItemKind(d["kind"]), d["url"], d["body"])
            p.items[item.id] = item
        for d in state["comments"].values():
            comment = Comment(d["id"], d["area"], d["author"],
                              parse_ts(d["posted_at"]), d["subject"], d["body"],
                              CommentTarget.from_dict(d["target"]),
                              d["event_seq"])
            p.comments[comment.id] = comment
            p.comment_by_event_seq[comment.event_seq] = comment.id
        for cid in sorted(p.comments):
            p.comments_by_area[p.comments[cid].area].append(cid)
        p.documents = {int(k): list(v) for k, v in state["documents"].items()}
        for d in state["revisions"].values():
            rev = Revision(d["rev_id"], d["doc"], d["parent"], d["author"],
                           parse_ts(d["created_at"]), d["body"])
            p.revisions[rev.rev_id] = rev
            p.anchors_by_rev[rev.rev_id] = []
        for aid in sorted(int(k) for k in state["anchors"]):
            d = state["anchors"][str(aid)]
            anchor = Anchor(d["anchor_id"], d["rev_id"], d["offset"],
                            d["comment"], d["migrated"], d["source_anchor"])
            p.anchors[anchor.anchor_id] = anchor
            p.anchors_by_rev[anchor.rev_id].append(anchor.anchor_id)
        for did_s, d in state["decisions"].items():
            ballots = {}
            for v_s, bd in d["ballots"].items():
                ballots[int(v_s)] = Ballot(
                    bd["voter"], parse_ts(bd["cast_at"]),
                    BallotContent.from_dict(bd["content"]),
                    bd["annotation"], [list(h) for h in bd["history"]])
            p.decisions[int(did_s)] = DecisionState(
                config=DecisionConfig.from_dict(d["config"]),
                ballots=ballots,
                closed_at=None if d["closed_at"] is None
                          else parse_ts(d["closed_at"]),
                final_tally=None if d["final_tally"] is None
                            else TallyResult.from_dict(d["final_tally"]))
        p.projects = {int(k): list(v) for k, v in state["projects"].items()}
        for d in state["tasks"].values():
            task = Task(d["id"], d["project"], d["title"],
                        Priority(d["priority"]), TaskStatus(d["status"]),
                        parse_ts(d["created_at"]), parse_ts(d["updated_at"]),
                        d["description"], set(d["handlers"]))
            p.tasks[task.id] = task
        return p

    def canonical_state(self) -> str:
        return canonical_json(self.to_state_dict())


def _result_comment_body(tally: TallyResult) -> str:
    outcome = tally.outcome
    if outcome.kind is OutcomeKind.WINNER:
        verdict = f"winner: {outcome.option}"
    elif outcome.kind is OutcomeKind.TIE:
        verdict = "tie: " + ", ".join(outcome.options)
    else:
        verdict = outcome.kind.value.replace("_", " ")
    scores = ", ".join(f"{opt}={n}" for opt, n in tally.per_option_scores.items())
    return (f"Decision closed. Result: {verdict}.\n"
            f"Scores: {scores}.\n"
            f"Ballots cast: {tally.ballots_cast}; "
            f"abstentions: {tally.abstentions}; "
            f"voters: {tally.distinct_voters}.")
