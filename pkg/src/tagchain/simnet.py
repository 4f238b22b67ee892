"""Deterministic message transport with adversarial interposition and metering.

Time is simulated: link events last ``bits / rate`` and tag computation lasts
``ops * hash_ms``.  Nothing here reads a wall clock.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Hashable, Optional, Sequence

from .crypto import MSG, REFERENCE, KeyedHash
from .errors import MalformedMessage
from .reader import ReaderState, apply_reply, close_batch, collect, open_batch
from .server import Database, setup_server, setup_tag, verify_batch
from .tag import tag_process
from .wire import Bits, Kind, Scheme, ServerReply, decode, encode

HASH_MS = 0.33


class Link(str, Enum):
    R2T = "R->T"
    T2R = "T->R"
    R2S = "R->S"
    S2R = "S->R"


DEFAULT_RATES = {Link.R2T: 126_000, Link.T2R: 640_000, Link.R2S: 20_000, Link.S2R: 20_000}

_KIND = {Link.R2T: Kind.READER_HELLO, Link.T2R: Kind.TAG_RESPONSE,
         Link.R2S: Kind.BATCH_REPORT, Link.S2R: Kind.SERVER_REPLY}


class Action(str, Enum):
    PASS = "PASS"
    DROP = "DROP"
    REPLAY = "REPLAY"
    MODIFY = "MODIFY"
    INJECT = "INJECT"
    OBSERVE = "OBSERVE"


@dataclass(frozen=True)
class HookAction:
    action: Action = Action.PASS
    arg: object = None  # REPLAY: history index; MODIFY: xor mask; INJECT: Bits


PASS = HookAction()
DROP = HookAction(Action.DROP)

# (link, per-link message index, bits, history of bits seen on that link) -> action
AdversaryHook = Callable[[Link, int, Bits, list], HookAction]


@dataclass
class Channel:
    name: Link
    rate_bps: float
    interposer: Optional[AdversaryHook] = None
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.rate_bps <= 0:
            raise ValueError("channel rate must be positive")


@dataclass
class Event:
    seq: int
    channel: str
    bits: int
    time_ms: float
    at_ms: float
    kind: str
    payload_hex: str
    hook_action: str
    delivered: bool = True
    entity: Optional[str] = None
    ops: int = 0

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


@dataclass
class Transcript:
    events: list = field(default_factory=list)
    op_counts: dict = field(default_factory=dict)
    clock_ms: float = 0.0

    def append(self, **kw) -> Event:
        duration = kw.pop("time_ms")
        self.clock_ms += duration
        ev = Event(seq=len(self.events), time_ms=duration, at_ms=self.clock_ms, **kw)
        self.events.append(ev)
        return ev

    def count_ops(self, entity: str, n: int) -> None:
        self.op_counts[entity] = self.op_counts.get(entity, 0) + n

    def bits_on(self, link: Link) -> int:
        return sum(e.bits for e in self.events if e.channel == link.value and e.delivered)

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def deliver(channel: Channel, bits: Bits, transcript: Transcript, kind: str = "") -> Optional[Bits]:
    """Send ``bits`` over ``channel``; returns what arrives, or None if dropped."""
    index = len(channel.history)
    action = channel.interposer(channel.name, index, bits, channel.history) if channel.interposer else PASS
    channel.history.append(bits)
    out: Optional[Bits] = bits
    if action.action is Action.DROP:
        out = None
    elif action.action is Action.REPLAY:
        out = channel.history[action.arg]
    elif action.action is Action.MODIFY:
        out = bits.flip(action.arg)
    elif action.action is Action.INJECT:
        out = action.arg
    sent = bits if out is None else out
    transcript.append(channel=channel.name.value, bits=sent.length,
                      time_ms=sent.length / channel.rate_bps * 1000.0, kind=kind,
                      payload_hex=sent.hex(), hook_action=action.action.value,
                      delivered=out is not None)
    return out


def default_channels(hooks: Optional[dict] = None, rates: Optional[dict] = None) -> dict:
    hooks = hooks or {}
    rates = {**DEFAULT_RATES, **(rates or {})}
    return {link: Channel(link, rates[link], hooks.get(link)) for link in Link}


@dataclass
class World:
    db: Database
    reader: ReaderState
    tags: dict
    channels: dict
    transcript: Transcript = field(default_factory=Transcript)
    hash_ms: float = HASH_MS

    @property
    def scheme(self) -> Scheme:
        return self.db.scheme

    def set_hook(self, link: Link, hook: Optional[AdversaryHook]) -> None:
        self.channels[link].interposer = hook


def make_world(n_tags: int = 1, *, seed: int = 0, scheme: Scheme = Scheme.S1,
               hasher: KeyedHash = REFERENCE, mutant=None, hooks: Optional[dict] = None,
               ids: Optional[Sequence[Hashable]] = None) -> World:
    db = setup_server(64, seed=seed, scheme=scheme, hasher=hasher)
    ids = list(ids) if ids is not None else [f"tag{j}" for j in range(n_tags)]
    tags = {}
    for i in ids:
        tags[i], db = setup_tag(db, i, mutant=mutant)
    return World(db, ReaderState(scheme=db.scheme), tags, default_channels(hooks))


@dataclass
class SessionResult:
    msg: Optional[MSG]
    marked: list
    excluded: list
    outcomes: dict  # id -> TagOutcome (only tags that received something)
    reply: Optional[ServerReply] = None


def run_session(world: World, ids: Optional[Sequence[Hashable]] = None) -> SessionResult:
    """One batch of the protocol, steps 1-7, under the installed hooks.

    ``msg`` is None when no server verdict reached the reader (responses,
    report or reply dropped).  Raises EmptyBatchError when responses arrived
    but the reader excluded all of them.
    """
    ids = list(world.tags) if ids is None else list(ids)
    scheme = world.scheme
    tr = world.transcript
    ch = world.channels

    hellos = open_batch(world.reader, world.db, ids)
    outcomes = {}
    for i, hello in hellos:
        got = deliver(ch[Link.R2T], encode(hello), tr, Kind.READER_HELLO.value)
        if got is None:
            continue
        try:
            msg_in = decode(got, Kind.READER_HELLO, scheme)
        except MalformedMessage:
            msg_in = None
        outcome = tag_process(world.tags[i], msg_in)
        outcomes[i] = outcome
        tr.count_ops(f"tag:{i}", outcome.ops_used)
        tr.append(channel="local", bits=0, time_ms=outcome.ops_used * world.hash_ms,
                  kind="tag_compute", payload_hex="", hook_action="", entity=f"tag:{i}",
                  ops=outcome.ops_used)
        back = deliver(ch[Link.T2R], encode(outcome.response), tr, Kind.TAG_RESPONSE.value)
        if back is None:
            continue
        try:
            resp = decode(back, Kind.TAG_RESPONSE, scheme)
        except MalformedMessage:
            resp = None
        collect(world.reader, i, resp)

    decision = world.reader.decision
    result = SessionResult(None, list(decision.marked), list(decision.excluded), outcomes)
    if not decision.marked and not decision.excluded:
        return result  # every response was blocked in transit; nothing to forward
    tr.append(channel="local", bits=0, time_ms=0.0, kind="reader_aggregate", payload_hex="",
              hook_action="", entity="reader")
    report, session_map = close_batch(world.reader)
    arrived = deliver(ch[Link.R2S], encode(report), tr, Kind.BATCH_REPORT.value)
    if arrived is None:
        return result
    before = world.db.meter.count
    try:
        report_in = decode(arrived, Kind.BATCH_REPORT, scheme)
        reply = verify_batch(world.db, report_in, session_map)
    except MalformedMessage:
        reply = ServerReply(MSG.TAG_AUTH_ERROR, () if scheme is Scheme.S2 else None)
    server_ops = world.db.meter.count - before
    tr.count_ops("server", server_ops)
    tr.append(channel="local", bits=0, time_ms=0.0, kind="server_verify", payload_hex="",
              hook_action="", entity="server", ops=server_ops)
    back = deliver(ch[Link.S2R], encode(reply), tr, Kind.SERVER_REPLY.value)
    if back is None:
        return result
    try:
        reply_in = decode(back, Kind.SERVER_REPLY, scheme)
    except MalformedMessage:
        return result
    apply_reply(world.reader, reply_in)
    result.msg = reply_in.msg
    result.reply = reply_in
    return result


# canned hook programs --------------------------------------------------------

def drop_at(index: Optional[int] = None) -> AdversaryHook:
    """Drop message ``index`` on the link (every message if None)."""
    def hook(link, i, bits, history):
        return DROP if index is None or i == index else PASS
    return hook


def flip_at(mask: int, index: Optional[int] = None) -> AdversaryHook:
    def hook(link, i, bits, history):
        return HookAction(Action.MODIFY, mask) if index is None or i == index else PASS
    return hook


def replay_at(index: int, source: int) -> AdversaryHook:
    """At message ``index`` deliver the earlier message ``source`` instead."""
    def hook(link, i, bits, history):
        return HookAction(Action.REPLAY, source) if i == index else PASS
    return hook


def flip_top_bit(index: Optional[int] = None) -> AdversaryHook:
    """Flip the most significant bit, i.e. bit 63 of the leading field."""
    def hook(link, i, bits, history):
        if index is None or i == index:
            return HookAction(Action.MODIFY, 1 << (bits.length - 1))
        return PASS
    return hook


def observe(link, i, bits, history):
    return HookAction(Action.OBSERVE)


HOOK_PROGRAMS = {
    "none": {},
    "observe": {link: observe for link in Link},
    "drop-t2r-first": {Link.T2R: drop_at(0)},
    "drop-r2t-first": {Link.R2T: drop_at(0)},
    "drop-r2s-first": {Link.R2S: drop_at(0)},
    "drop-s2r-first": {Link.S2R: drop_at(0)},
    "flip-h-first": {Link.R2S: flip_top_bit(0)},
}


def hook_program(name: str) -> dict:
    """Build a fresh hook mapping by name (fresh closures, no shared history)."""
    if name not in HOOK_PROGRAMS:
        raise KeyError(name)
    return dict(HOOK_PROGRAMS[name])
