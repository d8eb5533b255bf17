"""Event log format, integrity checks, replay, and snapshots."""

import json

import pytest

from parley import CommentTarget, Platform
from parley.errors import ChecksumMismatch, SeqMismatch, StorageFailure
from parley.store import (
    EventLog,
    HEADER,
    load,
    load_snapshot,
    read_events,
    replay,
    state_digest,
    write_snapshot,
)

from driver import OpDriver
from helpers import make_area, make_platform, t


def _logged_platform(tmp_path, n_ops=60, seed=7):
    path = tmp_path / "events.log"
    platform = Platform()
    platform.attach_log(EventLog(path))
    d = OpDriver(seed, platform=platform)
    d.run(n_ops)
    return platform, path


def test_log_header_and_record_grammar(tmp_path):
    _, path = _logged_platform(tmp_path, n_ops=5)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == HEADER
    for line in lines[1:]:
        crc, body = line.split(" ", 1)
        assert len(crc) == 8 and int(crc, 16) >= 0
        record = json.loads(body)
        assert set(record) >= {"seq", "at", "actor", "type", "data"}


def test_replay_reproduces_live_state(tmp_path):
    platform, path = _logged_platform(tmp_path)
    assert state_digest(replay(path)) == state_digest(platform)


def test_corrupted_record_detected(tmp_path):
    _, path = _logged_platform(tmp_path, n_ops=5)
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[3] = lines[3][:20] + ("x" if lines[3][20] != "x" else "y") + lines[3][21:]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ChecksumMismatch):
        list(read_events(path))


def test_sequence_gap_detected(tmp_path):
    _, path = _logged_platform(tmp_path, n_ops=5)
    lines = path.read_text(encoding="utf-8").splitlines()
    del lines[3]  # drop a middle record
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ChecksumMismatch):
        list(read_events(path))


def test_wrong_header_rejected(tmp_path):
    path = tmp_path / "bogus.log"
    path.write_text("some other format\n", encoding="utf-8")
    with pytest.raises(StorageFailure):
        list(read_events(path))
    with pytest.raises(StorageFailure):
        EventLog(path)


def test_reopened_log_appends(tmp_path):
    path = tmp_path / "events.log"
    from parley import Visibility
    p1 = Platform()
    p1.attach_log(EventLog(path))
    p1.register_user("A", "a@x.org", t())
    p1.create_group(1, "g", "G", Visibility.OPEN, t())
    p2 = replay(path)
    p2.attach_log(EventLog(path))
    area = p2.create_meeting_area(p2.group_slugs["g"], 1, "m", "M", t(1))
    p3 = replay(path)
    assert area.id in p3.areas
    assert state_digest(p3) == state_digest(p2)


def test_snapshot_round_trip(tmp_path):
    platform, path = _logged_platform(tmp_path)
    snap = tmp_path / "snap"
    write_snapshot(platform, snap)
    assert state_digest(load_snapshot(snap)) == state_digest(platform)


def test_snapshot_plus_tail_equals_full_replay(tmp_path):
    platform, path = _logged_platform(tmp_path, n_ops=80)
    cut = platform.head_seq // 2
    prefix = Platform.replay(e for e in read_events(path) if e.seq <= cut)
    snap = tmp_path / "snap"
    write_snapshot(prefix, snap)
    tail = [e for e in read_events(path) if e.seq > cut]
    combined = load(snap, tail)
    assert state_digest(combined) == state_digest(platform)


def test_tail_gap_rejected(tmp_path):
    platform, path = _logged_platform(tmp_path, n_ops=30)
    cut = platform.head_seq // 2
    prefix = Platform.replay(e for e in read_events(path) if e.seq <= cut)
    snap = tmp_path / "snap"
    write_snapshot(prefix, snap)
    bad_tail = [e for e in read_events(path) if e.seq > cut + 1]
    with pytest.raises(SeqMismatch):
        load(snap, bad_tail)


def test_tampered_snapshot_seq_rejected(tmp_path):
    platform, path = _logged_platform(tmp_path, n_ops=10)
    snap = tmp_path / "snap"
    write_snapshot(platform, snap)
    lines = snap.read_text(encoding="utf-8").splitlines()
    body = json.loads(lines[1].split(" ", 1)[1])
    body["seq"] += 1
    import zlib
    canon = json.dumps(body, sort_keys=True, ensure_ascii=False,
                       separators=(",", ":"))
    crc = zlib.crc32(canon.encode("utf-8")) & 0xFFFFFFFF
    snap.write_text(f"{lines[0]}\n{crc:08x} {canon}\n", encoding="utf-8")
    with pytest.raises(SeqMismatch):
        load_snapshot(snap)


def test_digest_sensitive_to_state():
    p1, _, area1 = make_area()
    p2, _, area2 = make_area(p=make_platform())
    assert state_digest(p1) == state_digest(p2)
    p2.post_comment(area2.id, 1, "s", "b", CommentTarget.area_global(), t(2))
    assert state_digest(p1) != state_digest(p2)
