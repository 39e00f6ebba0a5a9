"""Transcript files: the bulletin board's externalized, verifiable log.

A transcript is line-delimited canonical JSON.  The first record is the
genesis (parameters and board configuration), every subsequent record is
one transaction or one board-induced transition, and the last line seals
the log with the final state digest.  Records are hash-chained.

Verification replays the whole file: externally-sent records are
re-applied through the board (re-running every proof verification) and
each regenerated line must match the file byte-for-byte; board-induced
lines must appear exactly where the replay regenerates them.  A single
flipped byte anywhere therefore surfaces as a mismatch at (or right
after) the offending record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .board import BOARD_SENDER, Board, TxRecord
from .errors import TranscriptError

FINAL_ACTION = "final"


def final_line(board: Board) -> bytes:
    doc = {
        "action": FINAL_ACTION,
        "prev": board._prev,
        "state": board.state_digest(),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def write_transcript(path, board: Board) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        for rec in board.records:
            fh.write(rec.line)
        fh.write(final_line(board))
    return path


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    record_index: Optional[int] = None  # first offending line, 0-based
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_transcript(path) -> VerifyResult:
    """Replay a transcript file and re-check everything it claims."""
    try:
        with open(path, "rb") as fh:
            lines = fh.read().splitlines(keepends=True)
    except OSError as exc:
        return VerifyResult(False, None, f"cannot read transcript: {exc}")
    if not lines:
        return VerifyResult(False, None, "empty transcript")

    try:
        board, pending = _replay_genesis(lines[0])
    except TranscriptError as exc:
        return VerifyResult(False, 0, str(exc))

    sealed = False
    index = 0
    for index, line in enumerate(lines):
        try:
            doc = json.loads(line.decode())
            if not isinstance(doc, dict):
                raise ValueError("not an object")
        except (UnicodeDecodeError, ValueError) as exc:
            return VerifyResult(False, index, f"unparseable record: {exc}")

        if sealed:
            return VerifyResult(False, index, "data after the final record")

        if doc.get("action") == FINAL_ACTION:
            if pending:
                return VerifyResult(False, index,
                                    "file omits expected board records")
            if line != final_line(board):
                return VerifyResult(False, index, "final state digest mismatch")
            sealed = True
            continue

        if not pending:
            if doc.get("sender") == BOARD_SENDER:
                return VerifyResult(False, index,
                                    "unexpected board-induced record")
            try:
                sender = doc["sender"]
                action = doc["action"]
                payload = bytes.fromhex(doc["payload"])
            except (KeyError, ValueError, TypeError):
                return VerifyResult(False, index, "malformed record fields")
            pending.extend(board.apply(sender, action, payload))

        expected = pending.pop(0)
        if line != expected.line:
            return VerifyResult(False, index, "record does not replay")

    if not sealed:
        return VerifyResult(False, len(lines) - 1,
                            "truncated: final record missing")
    return VerifyResult(True)


def _replay_genesis(line: bytes) -> tuple[Board, list[TxRecord]]:
    try:
        doc = json.loads(line.decode())
        if doc.get("action") != "genesis":
            raise ValueError("first record is not a genesis record")
        payload = bytes.fromhex(doc["payload"])
        board = Board.from_genesis(payload)
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
        raise TranscriptError(f"bad genesis record: {exc}")
    return board, list(board.records)
