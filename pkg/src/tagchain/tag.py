"""Tag-side state machine: reader authentication, T_max renewal, response or decoy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Optional

from .crypto import WORD_BITS, KeyedHash, OpMeter, Prng, cat, keyed_hash, xor_pad
from .wire import ReaderHello, Scheme, TagResponse


class Mutant(str, Enum):
    """Deliberately broken protocol variants, each changing exactly one rule."""

    STATIC_ID = "static_id"
    NO_KEY_UPDATE = "no_key_update"
    LEAKY_DECOY = "leaky_decoy"
    REUSED_RT = "reused_rt"
    NO_TIMESTAMP_CHECK = "no_timestamp_check"


class Path(str, Enum):
    GENUINE = "genuine"
    DECOY = "decoy"
    RENEWAL = "renewal"


@dataclass
class TagState:
    id: Hashable
    key: int
    t_max: int
    t_cur: int
    # timestamp before t_cur; lets the tag accept a hello built on the server's
    # last confirmed timestamp after a blocked response (not part of the 192-bit budget)
    t_prev: int
    prng: Prng
    scheme: Scheme = Scheme.S1
    mutant: Optional[Mutant] = None
    first_rt: Optional[int] = None  # REUSED_RT mutant only
    # simulator bookkeeping: number of key updates so far (never sent, not tag memory)
    epoch: int = 0
    meter: OpMeter = field(default_factory=OpMeter)

    @property
    def hasher(self) -> KeyedHash:
        return self.prng.hasher

    PERSISTENT_BITS = 3 * WORD_BITS  # key, t_cur, t_max

    def snapshot(self) -> dict:
        return {
            "id": self.id,
            "key": f"{self.key:016x}",
            "t_max": f"{self.t_max:016x}",
            "t_cur": f"{self.t_cur:016x}",
            "t_prev": f"{self.t_prev:016x}",
            "prng_seed": f"{self.prng.seed:016x}",
            "prng_counter": self.prng.counter,
            "hash": self.prng.hasher.algorithm,
            "scheme": self.scheme.value,
            "mutant": self.mutant.value if self.mutant else None,
            "first_rt": None if self.first_rt is None else f"{self.first_rt:016x}",
            "epoch": self.epoch,
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def restore(cls, data) -> "TagState":
        if isinstance(data, str):
            data = json.loads(data)
        h = lambda k: int(data[k], 16)  # noqa: E731
        return cls(
            id=data["id"],
            key=h("key"),
            t_max=h("t_max"),
            t_cur=h("t_cur"),
            t_prev=h("t_prev"),
            prng=Prng(h("prng_seed"), data["prng_counter"], KeyedHash(data["hash"])),
            scheme=Scheme(data["scheme"]),
            mutant=Mutant(data["mutant"]) if data.get("mutant") else None,
            first_rt=None if data.get("first_rt") is None else h("first_rt"),
            epoch=data.get("epoch", 0),
        )


@dataclass
class TagOutcome:
    response: TagResponse
    path: Path
    ops_used: int

    @property
    def genuine(self) -> bool:
        return self.path is Path.GENUINE


def ops_per_session(scheme: Scheme) -> int:
    return 4 if Scheme(scheme) is Scheme.S1 else 5


def _decoy(state: TagState, meter: OpMeter) -> TagResponse:
    rt = state.prng.next(meter)
    if state.mutant is Mutant.STATIC_ID:
        # the constant identifier leaks on every path, not only on success
        hid = keyed_hash(cat(state.t_max), state.prng.seed, hasher=state.hasher, meter=meter)
    else:
        hid = state.prng.next(meter)
    at = state.prng.next(meter) if state.scheme is Scheme.S2 else None
    if state.mutant is not Mutant.LEAKY_DECOY:
        state.prng.next(meter)  # stands in for the key update; result discarded
    return TagResponse(hid, rt, at)


def tag_process(state: TagState, hello: Optional[ReaderHello]) -> TagOutcome:
    """Run one tag session against ``hello``.

    ``None`` stands for an undecodable message; it gets a decoy like any other
    rejected input.  Every path consumes the same number of primitive ops
    (4 for scheme 1, 5 for scheme 2), except under the LEAKY_DECOY mutant.
    """
    meter = OpMeter()
    response, path = _run(state, hello, meter)
    state.meter.tick(meter.count)
    return TagOutcome(response, path, meter.count)


def tag_reject(state: TagState) -> TagOutcome:
    return tag_process(state, None)


def _run(state: TagState, hello: Optional[ReaderHello], meter: OpMeter):
    hasher = state.hasher
    if hello is None:
        # the auth hash is still spent so timing matches a real check
        state.prng.next(meter)
        return _decoy(state, meter), Path.DECOY

    d = keyed_hash(cat(state.t_cur, hello.T_r), state.t_max, hasher=hasher, meter=meter)
    if d != hello.auth_digest:
        # second slot shares the single metered auth op
        if hasher(cat(state.t_prev, hello.T_r), state.t_max) != hello.auth_digest:
            return _decoy(state, meter), Path.DECOY

    if hello.T_r > state.t_max:
        candidate = xor_pad(hello.T_r, state.t_max)
        if candidate <= state.t_max:
            return _decoy(state, meter), Path.DECOY
        # renewal-only session: answer with PRNG output, keep key and timestamps
        response = _decoy(state, meter)
        state.t_max = candidate
        return response, Path.RENEWAL

    if hello.T_r <= state.t_cur and state.mutant is not Mutant.NO_TIMESTAMP_CHECK:
        return _decoy(state, meter), Path.DECOY

    state.t_prev, state.t_cur = state.t_cur, hello.T_r
    rt = state.prng.next(meter)
    if state.mutant is Mutant.REUSED_RT:
        if state.first_rt is None:
            state.first_rt = rt
        rt = state.first_rt
    if state.mutant is Mutant.STATIC_ID:
        hid = keyed_hash(cat(state.t_max), state.prng.seed, hasher=hasher, meter=meter)
    else:
        hid = keyed_hash(cat(rt, hello.R_r), state.key, hasher=hasher, meter=meter)
    at = None
    if state.scheme is Scheme.S2:
        at = keyed_hash(cat(state.t_max), state.key, hasher=hasher, meter=meter)
    if state.mutant is Mutant.NO_KEY_UPDATE:
        state.prng.next(meter)
    else:
        state.key = keyed_hash(cat(state.key), hello.R_r, hasher=hasher, meter=meter)
        state.epoch += 1
    return TagResponse(hid, rt, at), Path.GENUINE
