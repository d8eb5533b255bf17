"""Comments, threading, the four index sort orders, and references."""

import pytest
from hypothesis import given, settings, strategies as st

from parley import CommentTarget, SortKey, Visibility
from parley.errors import AccessDenied, BadToken, DanglingTarget, NotFound
from parley.indexing import DATE_HEADER, GENERAL_HEADER

from helpers import make_area, make_platform, t


def test_item_targeted_comment_carries_reference_token():
    p, _, area = make_area()
    doc = p.post_document(area.id, 1, "Budget draft", "text", t(2))
    c = p.post_comment(area.id, 2, None, "Looks good",
                       CommentTarget.item(doc.id), t(3))
    assert c.subject == "Re: Budget draft"
    assert p.items[c.target.ref].reference_token == f"[item:{doc.id}]"


def test_global_comment_has_no_reference():
    p, _, area = make_area()
    c = p.post_comment(area.id, 1, "Hello", "hi all",
                       CommentTarget.area_global(), t(2))
    assert c.target.ref is None


def test_reply_to_missing_comment():
    p, _, area = make_area()
    with pytest.raises(DanglingTarget):
        p.post_comment(area.id, 1, None, "orphan",
                       CommentTarget.reply_to(999), t(2))


def test_reply_inherits_re_subject_without_stacking():
    p, _, area = make_area()
    root = p.post_comment(area.id, 1, "Budget", "body",
                          CommentTarget.area_global(), t(2))
    r1 = p.post_comment(area.id, 2, None, "reply",
                        CommentTarget.reply_to(root.id), t(3))
    r2 = p.post_comment(area.id, 1, None, "reply again",
                        CommentTarget.reply_to(r1.id), t(4))
    assert r1.subject == "Re: Budget"
    assert r2.subject == "Re: Budget"


def test_empty_body_rejected():
    p, _, area = make_area()
    from parley.errors import ValidationError
    with pytest.raises(ValidationError):
        p.post_comment(area.id, 1, "x", "", CommentTarget.area_global(), t(2))


def test_subject_sort_groups_and_threads():
    p, _, area = make_area()
    for i, subj in enumerate(("Budget", "Agenda", "Budget")):
        p.post_comment(area.id, 1, subj, f"body {i}",
                       CommentTarget.area_global(), t(2 + i))
    index = p.build_index(area.id, SortKey.SUBJECT)
    assert [g.header for g in index.entries] == ["Agenda", "Budget"]
    budget = index.entries[1]
    assert len(budget.threads) == 2


def test_item_sort_global_comments_trail_in_general_group():
    p, _, area = make_area()
    doc = p.post_document(area.id, 1, "Charter", "text", t(2))
    p.post_comment(area.id, 2, None, "on the doc",
                   CommentTarget.item(doc.id), t(3))
    p.post_comment(area.id, 1, "misc", "offtopic",
                   CommentTarget.area_global(), t(4))
    index = p.build_index(area.id, SortKey.ITEM)
    assert [g.header for g in index.entries] == ["Charter", GENERAL_HEADER]


def test_reply_to_item_comment_groups_under_item():
    # target chains resolve transitively for Item grouping
    p, _, area = make_area()
    doc = p.post_document(area.id, 1, "Charter", "text", t(2))
    root = p.post_comment(area.id, 2, None, "on the doc",
                          CommentTarget.item(doc.id), t(3))
    reply = p.post_comment(area.id, 1, None, "agreed",
                           CommentTarget.reply_to(root.id), t(4))
    index = p.build_index(area.id, SortKey.ITEM)
    assert [g.header for g in index.entries] == ["Charter"]
    (thread,) = index.entries[0].threads
    assert [c.id for c in thread] == [root.id, reply.id]


def test_date_sort_single_group():
    p, _, area = make_area()
    for i in range(3):
        p.post_comment(area.id, 1, f"s{i}", "b",
                       CommentTarget.area_global(), t(2 + i))
    index = p.build_index(area.id, SortKey.DATE)
    assert [g.header for g in index.entries] == [DATE_HEADER]
    assert len(index.entries[0].threads) == 3


def test_author_sort_groups_by_display_name():
    p, _, area = make_area()
    p.post_comment(area.id, 2, "a", "b", CommentTarget.area_global(), t(2))
    p.post_comment(area.id, 1, "c", "d", CommentTarget.area_global(), t(3))
    index = p.build_index(area.id, SortKey.AUTHOR)
    assert [g.header for g in index.entries] == ["User 1", "User 2"]


def test_empty_area_index():
    p, _, area = make_area()
    for key in SortKey:
        assert p.build_index(area.id, key).entries == []


def test_reply_never_precedes_parent():
    p, _, area = make_area()
    root = p.post_comment(area.id, 1, "T", "b",
                          CommentTarget.area_global(), t(2))
    mid = p.post_comment(area.id, 2, None, "r1",
                         CommentTarget.reply_to(root.id), t(3))
    p.post_comment(area.id, 1, None, "r2",
                   CommentTarget.reply_to(mid.id), t(4))
    p.post_comment(area.id, 2, None, "r3",
                   CommentTarget.reply_to(root.id), t(5))
    for key in SortKey:
        for group in p.build_index(area.id, key).entries:
            for thread in group.threads:
                seen = set()
                for c in thread:
                    if c.target.kind.value == "reply":
                        assert c.target.ref in seen
                    seen.add(c.id)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([1, 2]),          # author
                          st.sampled_from(["A", "b", "A "]),  # subject
                          st.integers(-1, 3)),               # reply to nth-back
                max_size=25))
def test_index_is_permutation_for_every_sort_key(posts):
    p, _, area = make_area()
    ids = []
    for i, (author, subject, back) in enumerate(posts):
        if back >= 0 and back < len(ids):
            target = CommentTarget.reply_to(ids[-1 - back])
        else:
            target = CommentTarget.area_global()
        c = p.post_comment(area.id, author, subject, "b", target, t(2 + i))
        ids.append(c.id)
    for key in SortKey:
        index = p.build_index(area.id, key)
        assert sorted(index.all_comment_ids()) == sorted(ids)
        again = p.build_index(area.id, key)
        assert again.all_comment_ids() == index.all_comment_ids()
        assert [g.header for g in again.entries] == \
               [g.header for g in index.entries]


def test_resolve_reference_round_trip():
    p, _, area = make_area()
    doc = p.post_document(area.id, 1, "Doc", "x", t(2))
    c = p.post_comment(area.id, 1, "s", "b", CommentTarget.item(doc.id), t(3))
    assert p.resolve_reference(f"[item:{doc.id}]", area.id) is doc
    assert p.resolve_reference(f"[c:{c.id}]", area.id) is c


def test_resolve_reference_errors():
    p, _, area = make_area()
    with pytest.raises(BadToken):
        p.resolve_reference("[thing:3]", area.id)
    with pytest.raises(NotFound):
        p.resolve_reference("[item:999]", area.id)


def test_unsubscribe_twice_is_noop():
    p, _, area = make_area()
    p.set_subscription(area.id, 2, True, t(2))
    p.set_subscription(area.id, 2, False, t(3))
    seq = p.head_seq
    p.set_subscription(area.id, 2, False, t(4))
    assert p.head_seq == seq


def test_subscription_requires_read_access():
    p, _, area = make_area(visibility=Visibility.CLOSED, members=(1,))
    with pytest.raises(AccessDenied):
        p.set_subscription(area.id, 3, True, t(2))
