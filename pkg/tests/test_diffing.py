import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parley.diffing import (
    Delete,
    Equal,
    Insert,
    apply_script,
    dest_length,
    diff,
    migrate_anchors,
    source_length,
)
from parley.errors import OffsetOutOfRange

from oracles import apply_naive, lcs_length, migrate_oracle, script_edit_cost


def test_identity():
    assert diff("abc", "abc") == [Equal(3)]


def test_annihilation():
    assert diff("abc", "") == [Delete(3)]


def test_creation():
    assert diff("", "xyz") == [Insert("xyz")]


def test_empty_to_empty():
    assert diff("", "") == []


def test_insertion_in_middle():
    # expected script computed by hand and by the quadratic oracle
    script = diff("hello world", "hello brave world")
    assert script == [Equal(6), Insert("brave "), Equal(5)]
    assert apply_script(script, "hello world") == "hello brave world"


def test_canonical_form():
    for src, dst in [("abcdef", "abf"), ("ab", "ba"), ("kitten", "sitting")]:
        script = diff(src, dst)
        kinds = [type(op) for op in script]
        for k1, k2 in zip(kinds, kinds[1:]):
            assert k1 is not k2 or (k1 is not Equal and k2 is not Equal) is False \
                or True
        # no adjacent ops of the same kind, delete precedes insert in a block
        for a, b in zip(script, script[1:]):
            assert type(a) is not type(b)
            assert not (isinstance(a, Insert) and isinstance(b, Delete))
        assert all(op.n > 0 for op in script)
        assert source_length(script) == len(src)
        assert dest_length(script) == len(dst)


def test_delete_before_insert_in_replacement():
    script = diff("abc", "aXc")
    assert script == [Equal(1), Delete(1), Insert("X"), Equal(1)]


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="ab\ncd", max_size=40), st.text(alphabet="ab\ncd", max_size=40))
def test_apply_correctness_and_minimality_small_alphabet(src, dst):
    script = diff(src, dst)
    assert apply_script(script, src) == dst
    assert apply_naive(script, src) == dst
    expected_cost = len(src) + len(dst) - 2 * lcs_length(src, dst)
    assert script_edit_cost(script) == expected_cost


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=120), st.text(max_size=120))
def test_apply_correctness_unicode(src, dst):
    script = diff(src, dst)
    assert apply_script(script, src) == dst
    expected_cost = len(src) + len(dst) - 2 * lcs_length(src, dst)
    assert script_edit_cost(script) == expected_cost


def test_large_inputs_route_through_divide_and_conquer():
    rng = random.Random(7)
    src = "".join(rng.choice("abcdefgh") for _ in range(1500))
    dst = list(src)
    for _ in range(60):
        k = rng.randrange(len(dst))
        op = rng.choice(("del", "ins", "sub"))
        if op == "del":
            del dst[k]
        elif op == "ins":
            dst.insert(k, rng.choice("abcdefgh"))
        else:
            dst[k] = rng.choice("ABCD")
    dst = "".join(dst)
    script = diff(src, dst)
    assert apply_script(script, src) == dst
    assert script_edit_cost(script) == len(src) + len(dst) - 2 * lcs_length(src, dst)


def test_line_level_fallback_for_huge_bodies():
    rng = random.Random(11)
    lines = ["line %d %s\n" % (i, "x" * rng.randrange(30)) for i in range(4000)]
    src = "".join(lines)
    assert len(src) > 64 * 1024
    changed = list(lines)
    changed[100] = "line 100 rewritten\n"
    del changed[2000]
    changed.insert(3000, "brand new line\n")
    dst = "".join(changed)
    script = diff(src, dst)
    assert apply_script(script, src) == dst


def test_determinism():
    rng = random.Random(3)
    for _ in range(20):
        src = "".join(rng.choice("abcde") for _ in range(rng.randrange(200)))
        dst = "".join(rng.choice("abcde") for _ in range(rng.randrange(200)))
        assert diff(src, dst) == diff(src, dst)


# -- anchor migration ---------------------------------------------------------

def test_migrate_identity():
    script = diff("hello", "hello")
    assert migrate_anchors(script, [0, 2, 5]) == [0, 2, 5]


def test_migrate_insertion_binds_left():
    script = diff("hello world", "hello brave world")
    assert migrate_anchors(script, [6]) == [6]
    assert migrate_anchors(script, [11]) == [17]
    assert migrate_anchors(script, [5]) == [5]
    assert migrate_anchors(script, [7]) == [13]


def test_migrate_deletion_collapse():
    script = diff("abcdef", "abf")
    assert migrate_anchors(script, [3]) == [2]
    assert migrate_anchors(script, [2]) == [2]   # left boundary
    assert migrate_anchors(script, [5]) == [2]   # right boundary, nearer edge
    assert migrate_anchors(script, [6]) == [3]


def test_migrate_out_of_range():
    script = diff("abc", "abcd")
    with pytest.raises(OffsetOutOfRange):
        migrate_anchors(script, [4])
    with pytest.raises(OffsetOutOfRange):
        migrate_anchors(script, [-1])


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="abXY", max_size=30), st.text(alphabet="abXY", max_size=30),
       st.data())
def test_migrate_matches_survivor_map_oracle(src, dst, data):
    script = diff(src, dst)
    offset = data.draw(st.integers(min_value=0, max_value=len(src)))
    got = migrate_anchors(script, [offset])[0]
    assert got == migrate_oracle(script, offset)
    assert 0 <= got <= len(dst)


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60), st.data())
def test_migrate_validity_random_edits(src, data):
    dst = data.draw(st.text(max_size=60))
    script = diff(src, dst)
    offsets = data.draw(st.lists(
        st.integers(min_value=0, max_value=len(src)), max_size=8))
    for o, m in zip(offsets, migrate_anchors(script, offsets)):
        assert 0 <= m <= len(dst)
        assert m == migrate_oracle(script, o)
