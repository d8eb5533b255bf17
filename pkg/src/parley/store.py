"""Append-only event log and snapshot files.

Both files start with the header line ``demelog v1``.  Each log record is
one line: an 8-hex-digit CRC32 of the canonical JSON body, a space, then
the body.  Appends are flushed and fsynced before the mutation is
acknowledged, so an acknowledged write survives a crash.
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from pathlib import Path
from typing import Iterator

from .errors import ChecksumMismatch, SeqMismatch, StorageFailure
from .events import Event, canonical_json

HEADER = "demelog v1"


def _encode_record(body: str) -> str:
    crc = zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return f"{crc:08x} {body}\n"


def _decode_record(line: str, where: str) -> str:
    if len(line) < 10 or line[8] != " ":
        raise ChecksumMismatch(f"malformed record at {where}")
    crc_text, body = line[:8], line[9:]
    try:
        expected = int(crc_text, 16)
    except ValueError:
        raise ChecksumMismatch(f"malformed checksum at {where}") from None
    if zlib.crc32(body.encode("utf-8")) & 0xFFFFFFFF != expected:
        raise ChecksumMismatch(f"checksum mismatch at {where}")
    return body


class EventLog:
    """Single-writer append-only log; readers iterate immutable prefixes."""

    def __init__(self, path):
        self.path = Path(path)
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                first = fh.readline().rstrip("\n")
            if first != HEADER:
                raise StorageFailure(f"{self.path} is not a {HEADER} file")
            self._fh = open(self.path, "a", encoding="utf-8")
        else:
            self._fh = open(self.path, "a", encoding="utf-8")
            self._fh.write(HEADER + "\n")
            self._sync()

    def _sync(self) -> None:
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def append(self, event: Event) -> int:
        try:
            body = canonical_json(event.to_dict())
            self._fh.write(_encode_record(body))
            self._sync()
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc
        return event.seq

    def close(self) -> None:
        self._fh.close()


def read_events(path) -> Iterator[Event]:
    """Validate and yield every event in the log; checks header, CRC, seq density."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != HEADER:
            raise StorageFailure(f"{path} is not a {HEADER} file")
        expected_seq = 1
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            body = _decode_record(line, f"{path}:{lineno}")
            event = Event.from_dict(json.loads(body))
            if event.seq != expected_seq:
                raise ChecksumMismatch(
                    f"sequence gap at {path}:{lineno}: "
                    f"expected {expected_seq}, found {event.seq}")
            expected_seq += 1
            yield event


def replay(path):
    """Fold the full log into a fresh platform."""
    from .platform import Platform
    return Platform.replay(read_events(path))


def state_digest(platform) -> str:
    """Hash of the canonical depth-first state serialization (test oracle)."""
    return hashlib.sha256(platform.canonical_state().encode("utf-8")).hexdigest()


def write_snapshot(platform, path) -> None:
    body = canonical_json({"seq": platform.head_seq,
                           "state": platform.to_state_dict()})
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        fh.write(_encode_record(body))
        fh.flush()
        os.fsync(fh.fileno())


def load_snapshot(path):
    """Platform as of the snapshot's seq; combine with a log tail via load()."""
    from .platform import Platform
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != HEADER:
            raise StorageFailure(f"{path} is not a {HEADER} file")
        body = _decode_record(fh.readline().rstrip("\n"), str(path))
    payload = json.loads(body)
    platform = Platform.from_state_dict(payload["state"])
    if platform.head_seq != payload["seq"]:
        raise SeqMismatch("snapshot seq disagrees with embedded state")
    return platform


def load(snapshot_path, tail_events):
    """Snapshot plus log tail; the tail must start at snapshot seq + 1."""
    platform = load_snapshot(snapshot_path)
    expected = platform.head_seq + 1
    for event in tail_events:
        if event.seq != expected:
            raise SeqMismatch(
                f"tail starts at {event.seq}, snapshot ends at {expected - 1}")
        platform.apply(event)
        expected += 1
    return platform
