"""Trusted back end: tag database, challenge issuance, batch verification."""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

from .crypto import (MSG, REFERENCE, KeyedHash, OpMeter, Prng, aggregate, cat,
                     keyed_hash, word, xor_pad)
from .errors import RenewalRequired, RenewalSpaceExhausted, UsageError
from .tag import TagState
from .wire import BatchReport, ReaderHello, Scheme, ServerReply

log = logging.getLogger(__name__)

SUPPORTED_SECURITY_PARAMS = (64,)
# previous unconfirmed R_r values remembered per tag
UNCONFIRMED_WINDOW = 8
# upper bound on per-tag candidate combinations tried by verify_batch
MAX_COMBINATIONS = 4096
DEFAULT_T0 = 1


@dataclass
class Issued:
    T_r: int
    R_r: int


@dataclass
class ServerRecord:
    id: Hashable
    key: int
    t_max: int
    t_confirmed: int
    issued: Optional[Issued] = None
    # R_r of sessions issued after the last confirmation, oldest first; a tag
    # that processed one of them is exactly one key step ahead
    unconfirmed: list[int] = field(default_factory=list)
    t_max_pending: Optional[int] = None
    at_expected: Optional[int] = None
    epoch: int = 0  # simulator bookkeeping: key updates applied

    @property
    def auth_t_max(self) -> int:
        return self.t_max if self.t_max_pending is None else self.t_max_pending


@dataclass
class Database:
    scheme: Scheme
    clock: int
    rng: Prng
    hasher: KeyedHash = REFERENCE
    t0: int = DEFAULT_T0
    records: dict = field(default_factory=dict)
    meter: OpMeter = field(default_factory=OpMeter)

    def __len__(self):
        return len(self.records)

    def __contains__(self, i):
        return i in self.records

    def record(self, i) -> ServerRecord:
        try:
            return self.records[i]
        except KeyError:
            raise UsageError(f"unknown tag id {i!r}") from None

    def random_word(self) -> int:
        return self.rng.next()

    # snapshot / restore ---------------------------------------------------

    def snapshot(self) -> dict:
        def rec(r: ServerRecord):
            return {
                "id": r.id,
                "key": f"{r.key:016x}",
                "t_max": f"{r.t_max:016x}",
                "t_confirmed": f"{r.t_confirmed:016x}",
                "issued": None if r.issued is None else [f"{r.issued.T_r:016x}", f"{r.issued.R_r:016x}"],
                "unconfirmed": [f"{x:016x}" for x in r.unconfirmed],
                "t_max_pending": None if r.t_max_pending is None else f"{r.t_max_pending:016x}",
                "at_expected": None if r.at_expected is None else f"{r.at_expected:016x}",
                "epoch": r.epoch,
            }

        return {
            "scheme": self.scheme.value,
            "clock": f"{self.clock:016x}",
            "t0": f"{self.t0:016x}",
            "rng_seed": f"{self.rng.seed:016x}",
            "rng_counter": self.rng.counter,
            "hash": self.hasher.algorithm,
            "records": [rec(r) for r in self.records.values()],
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def restore(cls, data) -> "Database":
        if isinstance(data, str):
            data = json.loads(data)
        hx = lambda v: None if v is None else int(v, 16)  # noqa: E731
        hasher = KeyedHash(data["hash"])
        db = cls(scheme=Scheme(data["scheme"]), clock=hx(data["clock"]),
                 rng=Prng(hx(data["rng_seed"]), data["rng_counter"], hasher),
                 hasher=hasher, t0=hx(data["t0"]))
        for r in data["records"]:
            issued = r["issued"]
            db.records[r["id"]] = ServerRecord(
                id=r["id"], key=hx(r["key"]), t_max=hx(r["t_max"]),
                t_confirmed=hx(r["t_confirmed"]),
                issued=None if issued is None else Issued(hx(issued[0]), hx(issued[1])),
                unconfirmed=[hx(x) for x in r["unconfirmed"]],
                t_max_pending=hx(r["t_max_pending"]), at_expected=hx(r["at_expected"]),
                epoch=r.get("epoch", 0))
        return db


def setup_server(security_param: int = 64, *, seed: int = 0, scheme: Scheme = Scheme.S1,
                 hasher: KeyedHash = REFERENCE, t0: int = DEFAULT_T0) -> Database:
    if security_param not in SUPPORTED_SECURITY_PARAMS:
        raise UsageError(f"unsupported security parameter {security_param}; only 64-bit words")
    return Database(scheme=Scheme(scheme), clock=word(t0), rng=Prng(word(seed), 0, hasher),
                    hasher=hasher, t0=t0)


def setup_tag(db: Database, i: Hashable, k: Optional[int] = None, t_max: Optional[int] = None,
              *, prng_seed: Optional[int] = None, mutant=None) -> tuple[TagState, Database]:
    """Register tag ``i`` and return its freshly provisioned state.

    Missing ``k`` / ``prng_seed`` are drawn from the server's randomness;
    missing ``t_max`` defaults to 2**40 steps past the current clock.
    """
    if i in db.records:
        raise UsageError(f"duplicate tag id {i!r}")
    k = db.random_word() if k is None else word(k)
    t_max = db.clock + (1 << 40) if t_max is None else word(t_max)
    if t_max <= db.clock:
        raise UsageError("t_max must exceed the server clock")
    rec = ServerRecord(id=i, key=k, t_max=t_max, t_confirmed=db.t0)
    if db.scheme is Scheme.S2:
        rec.at_expected = keyed_hash(cat(t_max), k, hasher=db.hasher)
    db.records[i] = rec
    seed = db.random_word() if prng_seed is None else word(prng_seed)
    tag = TagState(id=i, key=k, t_max=t_max, t_cur=db.t0, t_prev=db.t0,
                   prng=Prng(seed, 0, db.hasher), scheme=db.scheme, mutant=mutant)
    return tag, db


def _issue(db: Database, rec: ServerRecord, T_r: int) -> ReaderHello:
    R_r = db.random_word()
    if rec.issued is not None:
        rec.unconfirmed.append(rec.issued.R_r)
        del rec.unconfirmed[:-UNCONFIRMED_WINDOW]
    rec.issued = Issued(T_r, R_r)
    digest = keyed_hash(cat(rec.t_confirmed, T_r), rec.auth_t_max, hasher=db.hasher, meter=db.meter)
    return ReaderHello(T_r, R_r, digest)


def issue_challenge(db: Database, i: Hashable) -> ReaderHello:
    rec = db.record(i)
    T_r = db.clock + 1
    if T_r > rec.auth_t_max:
        raise RenewalRequired(f"tag {i!r}: next timestamp exceeds T_max; issue a renewal")
    db.clock = T_r
    return _issue(db, rec, T_r)


def _msb(x: int) -> int:
    return x.bit_length() - 1


def issue_renewal(db: Database, i: Hashable, t_max_new: Optional[int] = None) -> ReaderHello:
    """One-time-pad a fresh T_max to the tag.

    ``T_r = t_max_new ^ t_max`` where ``t_max_new`` has its top bit strictly
    above that of ``t_max``, so the tag sees ``T_r > t_max`` and decodes a
    strictly larger threshold.  The server adopts the new value for issuance
    immediately and commits it on the next TAG-VALID.
    """
    rec = db.record(i)
    old = rec.t_max
    if _msb(old) >= 63:
        raise RenewalSpaceExhausted(f"tag {i!r}: T_max already uses bit 63")
    if t_max_new is None:
        p = max(_msb(old) + 1, (db.clock + (1 << 40)).bit_length())
        if p > 63:
            p = 63
        t_max_new = (1 << p) | (db.random_word() & ((1 << p) - 1))
    else:
        word(t_max_new)
        if _msb(t_max_new) <= _msb(old):
            raise UsageError("t_max_new must set a bit above the old T_max's top bit")
    if t_max_new <= db.clock:
        raise UsageError("t_max_new must exceed the server clock")
    T_r = xor_pad(t_max_new, old)
    # the renewal hello authenticates under the tag's current (old) T_max
    rec.t_max_pending = None
    hello = _issue(db, rec, T_r)
    # the tag never advances its key on a renewal hello, so it is not an in-flight session
    rec.issued = None
    rec.t_max_pending = t_max_new
    if db.scheme is Scheme.S2:
        rec.at_expected = keyed_hash(cat(t_max_new), rec.key, hasher=db.hasher)
    return hello


def candidate_keys(db: Database, rec: ServerRecord) -> list[int]:
    """Stored key first, then ephemeral keys Hash(key, R_r) of unconfirmed sessions."""
    cands = [rec.key]
    for rr in reversed(rec.unconfirmed):
        ek = keyed_hash(cat(rec.key), rr, hasher=db.hasher, meter=db.meter)
        if ek not in cands:
            cands.append(ek)
    return cands


def expected_ats(db: Database, i: Hashable) -> tuple[int, ...]:
    """AT values the reader should accept from tag ``i`` this session (scheme 2)."""
    rec = db.record(i)
    t_max = rec.auth_t_max
    return tuple(keyed_hash(cat(t_max), k, hasher=db.hasher) for k in candidate_keys(db, rec))


def verify_batch(db: Database, report: BatchReport,
                 session_map: Sequence[tuple[Hashable, int]]) -> ServerReply:
    """Verify an aggregated batch; all-or-nothing on the database."""
    recs = [db.record(i) for i, _ in session_map]
    fail = ServerReply(MSG.TAG_AUTH_ERROR, () if db.scheme is Scheme.S2 else None)
    if len(recs) != report.n or len({id(r) for r in recs}) != len(recs):
        return fail
    if any(r.issued is None for r in recs):
        return fail

    options = []  # per tag: list of (key, digest)
    for rec, rt in zip(recs, report.R_t_list):
        rr = rec.issued.R_r
        options.append([(k, keyed_hash(cat(rt, rr), k, hasher=db.hasher, meter=db.meter))
                        for k in candidate_keys(db, rec)])

    chosen = _search(options, report.H)
    if chosen is None:
        return fail

    at_next = []
    for rec, key in zip(recs, chosen):
        # an ephemeral match means the tag had already advanced once on its own
        rec.epoch += 1 if key == rec.key else 2
        rec.key = keyed_hash(cat(key), rec.issued.R_r, hasher=db.hasher, meter=db.meter)
        rec.t_confirmed = rec.issued.T_r
        rec.issued = None
        rec.unconfirmed.clear()
        if rec.t_max_pending is not None:
            rec.t_max, rec.t_max_pending = rec.t_max_pending, None
        if db.scheme is Scheme.S2:
            rec.at_expected = keyed_hash(cat(rec.t_max), rec.key, hasher=db.hasher, meter=db.meter)
            at_next.append(rec.at_expected)
    return ServerReply(MSG.TAG_VALID, tuple(at_next) if db.scheme is Scheme.S2 else None)


def _search(options, h: int) -> Optional[list[int]]:
    total = 1
    for o in options:
        total *= len(o)
    if total <= MAX_COMBINATIONS:
        for combo in itertools.product(*options):
            if aggregate(d for _, d in combo) == h:
                return [k for k, _ in combo]
        return None
    # too many combinations: stored keys, then each tag alone on its newest ephemeral key
    log.warning("candidate space %d exceeds %d; using restricted search", total, MAX_COMBINATIONS)
    base = [o[0] for o in options]
    acc = aggregate(d for _, d in base)
    if acc == h:
        return [k for k, _ in base]
    for idx, o in enumerate(options):
        for k, d in o[1:]:
            if acc ^ base[idx][1] ^ d == h:
                keys = [k0 for k0, _ in base]
                keys[idx] = k
                return keys
    return None


def force_update(db: Database, i: Hashable) -> None:
    """UpdateServer: advance the server's key for ``i`` without involving the tag."""
    rec = db.record(i)
    hello = issue_challenge(db, i)
    rec.key = keyed_hash(cat(rec.key), hello.R_r, hasher=db.hasher)
    rec.epoch += 1
    rec.t_confirmed = hello.T_r
    rec.issued = None
    rec.unconfirmed.clear()
    if db.scheme is Scheme.S2:
        rec.at_expected = keyed_hash(cat(rec.t_max), rec.key, hasher=db.hasher)
