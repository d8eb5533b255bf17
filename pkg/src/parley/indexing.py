"""Threaded discussion index with the four sort orders.

Grouping semantics: Subject/Item/Author produce groups sorted ascending by
header (case-insensitive; Author by display name; Item by item creation
order with global comments in a trailing "(general)" group); Date produces
a single group of threads ordered by root posted time.  Replies are indexed
under their thread root, and target chains resolve transitively so a reply
to a comment on item X groups under item X.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .model import Comment, TargetKind

GENERAL_HEADER = "(general)"
DATE_HEADER = "(all)"


class SortKey(str, Enum):
    SUBJECT = "subject"
    ITEM = "item"
    DATE = "date"
    AUTHOR = "author"


@dataclass
class IndexGroup:
    header: str
    threads: list  # each thread: list[Comment], root first, depth-first replies


@dataclass
class ThreadIndex:
    sort_key: SortKey
    entries: list = field(default_factory=list)  # list[IndexGroup]

    def all_comment_ids(self) -> list[int]:
        return [c.id for g in self.entries for t in g.threads for c in t]


def resolve_item_for_comment(comment: Comment, comments: dict,
                             anchors: dict, revisions: dict) -> Optional[int]:
    """Item a comment ultimately attaches to, following reply chains; None if global."""
    seen = set()
    current = comment
    while True:
        if current.id in seen:
            return None  # defensive: cycles cannot occur in valid state
        seen.add(current.id)
        target = current.target
        if target.kind is TargetKind.AREA_GLOBAL:
            return None
        if target.kind is TargetKind.ITEM:
            return target.ref
        if target.kind is TargetKind.IN_TEXT:
            anchor = anchors[target.ref]
            return revisions[anchor.rev_id].doc
        current = comments[target.ref]


def build_thread(root: Comment, children_of: dict) -> list:
    """Depth-first flatten: root, then each reply subtree in posted order."""
    thread = [root]
    stack = [list(reversed(children_of.get(root.id, [])))]
    while stack:
        top = stack[-1]
        if not top:
            stack.pop()
            continue
        comment = top.pop()
        thread.append(comment)
        stack.append(list(reversed(children_of.get(comment.id, []))))
    return thread


def build_index(area_comments: list, sort_key: SortKey, comments: dict,
                anchors: dict, revisions: dict, users: dict,
                items: dict, area_item_order: list) -> ThreadIndex:
    """Pure function of the area's comments; deterministic for identical input."""
    by_time = sorted(area_comments, key=lambda c: (c.posted_at, c.id))
    children_of: dict[int, list] = {}
    roots = []
    for c in by_time:
        if c.target.kind is TargetKind.REPLY:
            children_of.setdefault(c.target.ref, []).append(c)
        else:
            roots.append(c)

    threads = [build_thread(root, children_of) for root in roots]

    if sort_key is SortKey.DATE:
        entries = [IndexGroup(DATE_HEADER, threads)] if threads else []
        return ThreadIndex(sort_key, entries)

    groups: dict = {}
    order: dict = {}
    headers: dict = {}
    for thread in threads:
        root = thread[0]
        if sort_key is SortKey.SUBJECT:
            key = root.subject.casefold()
            sort_rank = (0, key)
            header = root.subject
        elif sort_key is SortKey.AUTHOR:
            name = users[root.author].display_name
            key = name.casefold()
            sort_rank = (0, key)
            header = name
        else:  # ITEM: creation order within the area, globals trail
            item_id = resolve_item_for_comment(root, comments, anchors, revisions)
            if item_id is None:
                key = GENERAL_HEADER
                sort_rank = (1, 0)
                header = GENERAL_HEADER
            else:
                key = item_id
                sort_rank = (0, area_item_order.index(item_id))
                header = items[item_id].title
        if key not in groups:
            groups[key] = []
            order[key] = sort_rank
            headers[key] = header
        groups[key].append(thread)

    entries = [IndexGroup(headers[k], groups[k])
               for k in sorted(groups, key=lambda k: order[k])]
    return ThreadIndex(sort_key, entries)
