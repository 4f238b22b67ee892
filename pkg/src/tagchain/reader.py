"""Reader: challenge relay, replay filter, partial authentication, aggregation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Optional, Sequence

from .crypto import MSG, aggregate
from .errors import EmptyBatchError, UsageError
from .server import Database, expected_ats, issue_challenge
from .wire import BatchReport, ReaderHello, Scheme, ServerReply, TagResponse

log = logging.getLogger(__name__)


class Exclusion(str, Enum):
    DUPLICATE_RT = "DUPLICATE_RT"
    AT_MISMATCH = "AT_MISMATCH"
    MALFORMED = "MALFORMED"


@dataclass
class BatchDecision:
    marked: list = field(default_factory=list)    # (id, TagResponse)
    excluded: list = field(default_factory=list)  # (id, Exclusion)


@dataclass
class ReaderState:
    scheme: Scheme = Scheme.S1
    seen_R_t: set = field(default_factory=set)
    # id -> acceptable AT values for the current session (scheme 2)
    at_table: dict = field(default_factory=dict)
    pending: dict = field(default_factory=dict)   # id -> ReaderHello
    decision: BatchDecision = field(default_factory=BatchDecision)
    forwarded: list = field(default_factory=list)  # ids of the last report, in order


def open_batch(reader: ReaderState, db: Database, ids: Sequence[Hashable]) -> list[tuple[Hashable, ReaderHello]]:
    if len(set(ids)) != len(ids):
        raise UsageError("open_batch ids must be distinct")
    for i in ids:
        db.record(i)
    reader.pending = {}
    reader.decision = BatchDecision()
    out = []
    for i in ids:
        hello = issue_challenge(db, i)
        reader.pending[i] = hello
        if reader.scheme is Scheme.S2:
            # issuance-time provisioning also covers a tag one key step ahead
            reader.at_table[i] = expected_ats(db, i)
        out.append((i, hello))
    return out


def collect(reader: ReaderState, i: Hashable, resp: Optional[TagResponse]) -> Optional[Exclusion]:
    """Mark or exclude one tag response; returns the exclusion reason, if any."""
    if i not in reader.pending:
        raise UsageError(f"no pending challenge for tag {i!r}")
    reason = None
    if resp is None:
        reason = Exclusion.MALFORMED
    elif resp.R_t in reader.seen_R_t:
        reason = Exclusion.DUPLICATE_RT
    elif reader.scheme is Scheme.S2 and resp.at not in reader.at_table.get(i, ()):
        reason = Exclusion.AT_MISMATCH
    if reason is not None:
        log.info("excluding tag %r: %s", i, reason.value)
        reader.decision.excluded.append((i, reason))
        return reason
    reader.seen_R_t.add(resp.R_t)
    reader.decision.marked.append((i, resp))
    return None


def close_batch(reader: ReaderState, decision: Optional[BatchDecision] = None) -> tuple[BatchReport, list]:
    """Aggregate the marked responses; returns the report and its (id, R_t) map."""
    decision = reader.decision if decision is None else decision
    if not decision.marked:
        raise EmptyBatchError("no marked responses to forward")
    h = aggregate(r.H_id for _, r in decision.marked)
    session_map = [(i, r.R_t) for i, r in decision.marked]
    reader.forwarded = [i for i, _ in decision.marked]
    return BatchReport(h, tuple(rt for _, rt in session_map)), session_map


def apply_reply(reader: ReaderState, reply: ServerReply) -> ReaderState:
    if reader.scheme is Scheme.S1:
        if reply.at_next:
            log.warning("scheme 1 reply carried AT values; ignored")
        return reader
    if reply.msg is MSG.TAG_VALID and reply.at_next is not None:
        if len(reply.at_next) != len(reader.forwarded):
            log.warning("reply carries %d AT values for %d forwarded tags; ignored",
                        len(reply.at_next), len(reader.forwarded))
            return reader
        for i, at in zip(reader.forwarded, reply.at_next):
            reader.at_table[i] = (at,)
    return reader
