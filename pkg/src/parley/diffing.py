"""Text diffing and anchor migration over code-point offsets.

All offsets count Unicode code points (Python string indices), never bytes.
``diff`` produces a minimal edit script via LCS: a full dynamic program with
deterministic tie-breaks for small inputs, Hirschberg divide-and-conquer over
a bit-parallel LCS row for large ones.  Bodies above 64Ki code points are
diffed line-first, with code-point diffs inside changed line blocks.

Anchors bind left: an insertion exactly at an anchor offset lands after the
anchor; anchors strictly inside a deleted span collapse to the destination
offset at the start of that change block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .errors import OffsetOutOfRange

# Above this many code points, diff line-level first.
CHAR_DIFF_LIMIT = 64 * 1024
# Full-table DP is used when len(src) * len(dst) is at most this.
_DP_CELLS = 4096


@dataclass(frozen=True)
class Equal:
    n: int


@dataclass(frozen=True)
class Delete:
    n: int


@dataclass(frozen=True)
class Insert:
    text: str

    @property
    def n(self) -> int:
        return len(self.text)


EditOp = Union[Equal, Delete, Insert]
EditScript = list


def source_length(script: Sequence[EditOp]) -> int:
    return sum(op.n for op in script if not isinstance(op, Insert))


def dest_length(script: Sequence[EditOp]) -> int:
    return sum(op.n for op in script if not isinstance(op, Delete))


def apply_script(script: Sequence[EditOp], src: str) -> str:
    """Replay an edit script against its source text."""
    out = []
    pos = 0
    for op in script:
        if isinstance(op, Equal):
            out.append(src[pos:pos + op.n])
            pos += op.n
        elif isinstance(op, Delete):
            pos += op.n
        else:
            out.append(op.text)
    if pos != len(src):
        raise ValueError("script does not span the source text")
    return "".join(out)


def diff(src: str, dst: str) -> list[EditOp]:
    """Minimal deterministic edit script turning src into dst."""
    if max(len(src), len(dst)) <= CHAR_DIFF_LIMIT:
        raw = _char_diff(src, dst)
    else:
        raw = _line_then_char_diff(src, dst)
    return _canonical(raw)


# -- script canonicalization ---------------------------------------------------
#
# Canonical form: no zero-length ops, no two adjacent ops of the same kind,
# and within every changed block the Delete precedes the Insert.

def _canonical(raw: list[EditOp]) -> list[EditOp]:
    out: list[EditOp] = []
    del_n = 0
    ins_parts: list[str] = []

    def flush_block():
        nonlocal del_n
        if del_n:
            out.append(Delete(del_n))
            del_n = 0
        if ins_parts:
            out.append(Insert("".join(ins_parts)))
            ins_parts.clear()

    for op in raw:
        if op.n == 0:
            continue
        if isinstance(op, Equal):
            flush_block()
            if out and isinstance(out[-1], Equal):
                out[-1] = Equal(out[-1].n + op.n)
            else:
                out.append(op)
        elif isinstance(op, Delete):
            del_n += op.n
        else:
            ins_parts.append(op.text)
    flush_block()
    return out


# -- code-point level diff -----------------------------------------------------

def _char_diff(src: str, dst: str) -> list[EditOp]:
    # Common prefix/suffix peel keeps the expensive core small.
    pre = 0
    limit = min(len(src), len(dst))
    while pre < limit and src[pre] == dst[pre]:
        pre += 1
    suf = 0
    while suf < limit - pre and src[len(src) - 1 - suf] == dst[len(dst) - 1 - suf]:
        suf += 1

    ops: list[EditOp] = []
    if pre:
        ops.append(Equal(pre))
    a = src[pre:len(src) - suf]
    b = dst[pre:len(dst) - suf]
    _align(a, b, ops)
    if suf:
        ops.append(Equal(suf))
    return ops


def _align(a: Sequence, b: Sequence, out: list[EditOp]) -> None:
    """Append an optimal alignment of a onto b (both may be str or token lists)."""
    if not a:
        if b:
            out.append(_insert_of(b))
        return
    if not b:
        out.append(Delete(len(a)))
        return
    if len(a) * len(b) <= _DP_CELLS or len(a) < 2:
        _dp_align(a, b, out)
        return

    i = len(a) // 2
    left = _lcs_row(a[:i], b)
    right = _lcs_row(a[i:][::-1], b[::-1])
    m = len(b)
    best = -1
    split = 0
    for j in range(m + 1):
        v = left[j] + right[m - j]
        if v > best:
            best = v
            split = j
    _align(a[:i], b[:split], out)
    _align(a[i:], b[split:], out)


def _insert_of(b: Sequence) -> Insert:
    return Insert(b if isinstance(b, str) else "".join(b))


def _dp_align(a: Sequence, b: Sequence, out: list[EditOp]) -> None:
    """Full LCS table with backtrack.

    Backtrack prefers the insert move over the delete move, which puts
    deletions before insertions in the forward script; diagonal moves are
    taken whenever optimal, yielding the leftmost alignment.
    """
    n, m = len(a), len(b)
    width = m + 1
    table = [0] * ((n + 1) * width)
    for i in range(1, n + 1):
        row = i * width
        prev = row - width
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                table[row + j] = table[prev + j - 1] + 1
            else:
                up = table[prev + j]
                lf = table[row + j - 1]
                table[row + j] = up if up >= lf else lf
    rev: list[EditOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        row = i * width
        if (i > 0 and j > 0 and a[i - 1] == b[j - 1]
                and table[row + j] == table[row - width + j - 1] + 1):
            rev.append(Equal(1))
            i -= 1
            j -= 1
        elif j > 0 and table[row + j] == table[row + j - 1]:
            rev.append(_insert_of(b[j - 1:j]))
            j -= 1
        else:
            rev.append(Delete(1))
            i -= 1
    out.extend(reversed(rev))


def _lcs_row(a: Sequence, b: Sequence) -> list[int]:
    """Prefix LCS lengths L[len(a)][j] for j in 0..len(b), bit-parallel.

    Bits range over b; a zero bit marks a matched position, so the row value
    at j is the count of zero bits among the first j bits.
    """
    m = len(b)
    masks: dict = {}
    bit = 1
    for c in b:
        masks[c] = masks.get(c, 0) | bit
        bit <<= 1
    v = (1 << m) - 1
    for c in a:
        u = v & masks.get(c, 0)
        v = (v + u) | (v - u)
    row = [0] * (m + 1)
    count = 0
    for j in range(m):
        if not (v >> j) & 1:
            count += 1
        row[j + 1] = count
    return row


# -- line-first diff for large bodies ------------------------------------------

def _split_lines(text: str) -> list[str]:
    lines = text.splitlines(keepends=True)
    return lines


def _line_then_char_diff(src: str, dst: str) -> list[EditOp]:
    a = _split_lines(src)
    b = _split_lines(dst)
    line_ops: list[EditOp] = []
    _align_lines(a, b, line_ops)

    # Expand line ops to code points, rediffing changed blocks char-wise.
    ops: list[EditOp] = []
    src_lines_pos = 0
    del_lines = 0
    ins_lines: list[str] = []

    def flush_block():
        nonlocal src_lines_pos, del_lines
        if del_lines or ins_lines:
            block_src = "".join(a[src_lines_pos:src_lines_pos + del_lines])
            block_dst = "".join(ins_lines)
            ops.extend(_char_diff(block_src, block_dst))
            src_lines_pos += del_lines
            del_lines = 0
            ins_lines.clear()

    for op in line_ops:
        if isinstance(op, Equal):
            flush_block()
            span = sum(len(line) for line in a[src_lines_pos:src_lines_pos + op.n])
            ops.append(Equal(span))
            src_lines_pos += op.n
        elif isinstance(op, Delete):
            del_lines += op.n
        else:
            ins_lines.append(op.text)
    flush_block()
    return ops


def _align_lines(a: list[str], b: list[str], out: list[EditOp]) -> None:
    # Token-level alignment over whole lines; Insert carries the joined text.
    pre = 0
    limit = min(len(a), len(b))
    while pre < limit and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < limit - pre and a[len(a) - 1 - suf] == b[len(b) - 1 - suf]:
        suf += 1
    if pre:
        out.append(Equal(pre))
    mid_out: list[EditOp] = []
    _align(a[pre:len(a) - suf], b[pre:len(b) - suf], mid_out)
    out.extend(_merge_line_inserts(mid_out))
    if suf:
        out.append(Equal(suf))


def _merge_line_inserts(ops: list[EditOp]) -> list[EditOp]:
    # _align over token lists emits Insert ops via _insert_of, which joins
    # line tokens already; nothing further to do beyond passing through.
    return ops


# -- anchor migration -----------------------------------------------------------

def migrate_anchors(script: Sequence[EditOp], offsets: Sequence[int]) -> list[int]:
    """Project source offsets through an edit script onto the destination.

    Anchors bind left of insertions; anchors strictly inside deletions map to
    the destination offset at the start of their change block; boundary
    anchors map to the nearer surviving edge.
    """
    src_len = source_length(script)
    for o in offsets:
        if not 0 <= o <= src_len:
            raise OffsetOutOfRange(f"anchor offset {o} outside 0..{src_len}")
    return [_migrate_one(script, o) for o in offsets]


def _migrate_one(script: Sequence[EditOp], offset: int) -> int:
    s = 0  # source consumed
    d = 0  # destination produced
    block_start_d = 0
    prev_was_change = False
    prev_was_delete = False
    for op in script:
        if isinstance(op, Equal):
            if s <= offset <= s + op.n:
                return d + (offset - s)
            s += op.n
            d += op.n
            prev_was_change = False
            prev_was_delete = False
        elif isinstance(op, Delete):
            if not prev_was_change:
                block_start_d = d
            # strictly inside, or at the start when no Equal covered it
            if s <= offset < s + op.n:
                return block_start_d
            s += op.n
            prev_was_change = True
            prev_was_delete = True
        else:
            if not prev_was_change:
                block_start_d = d
            if offset == s:
                if prev_was_delete:
                    # right boundary of a replaced span: nearer surviving
                    # edge sits after the replacement text
                    return d + op.n
                return d  # pure insertion point binds left
            d += op.n
            prev_was_change = True
            prev_was_delete = False
    return d
