"""Oracle access and the security games played against the protocol.

Each game is a repeatable statistical experiment: a challenger flips a coin,
a named adversary strategy guesses, and the report carries the observed
advantage with a 95% confidence half-width.  Mutant runs check that the
built-in adversaries actually have power.

Advantage is estimated as ``|P(b'=1 | b=1) - P(b'=1 | b=0)| / 2``, which is
``|P(win) - 1/2|`` for a fair coin but removes the coin's own sampling noise,
so a guess that ignores the challenge scores exactly 0.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Hashable, Optional

from .crypto import MSG, REFERENCE, KeyedHash, cat
from .errors import EmptyBatchError, UsageError
from .reader import apply_reply, close_batch, collect, open_batch
from .server import force_update, issue_challenge, setup_tag, verify_batch
from .simnet import DEFAULT_RATES, Action, HookAction, Link, World, make_world, run_session
from .tag import Mutant, tag_process
from .wire import ReaderHello, Scheme, TagResponse, encode

NEGLIGIBLE = 0.05
CLONE_BOUND = 2.0 ** -20
MIN_KEY_TRIALS = 100

EXPERIMENTS = ("forward", "backward", "tracking1", "tracking2", "cloning", "replay", "timing", "desync")

# (experiment, mutant) -> advantage floor the built-in adversary must exceed
MUTANT_FLOORS = {
    ("forward", Mutant.NO_KEY_UPDATE): 0.4,
    ("backward", Mutant.NO_KEY_UPDATE): 0.4,
    ("tracking1", Mutant.STATIC_ID): 0.45,
    ("tracking2", Mutant.STATIC_ID): 0.45,
    ("tracking1", Mutant.REUSED_RT): 0.45,
    ("tracking2", Mutant.REUSED_RT): 0.45,
    ("timing", Mutant.LEAKY_DECOY): 0.45,
    ("replay", Mutant.NO_TIMESTAMP_CHECK): 0.0,  # win rate must be > 0
}


# oracles ---------------------------------------------------------------------

@dataclass
class Instance:
    """One Auth protocol instance as seen through the oracles."""

    id: Hashable
    hello: ReaderHello
    response: Optional[TagResponse] = None
    accepted: Optional[bool] = None


class OracleContext:
    """The challenger's world plus the oracle interface handed to an adversary."""

    def __init__(self, world: World, seed: int = 0):
        self.world = world
        self.corrupted: set = set()
        self.rng = random.Random(seed)
        self._coin: Optional[int] = None

    @classmethod
    def fresh(cls, n_tags: int, seed: int, scheme=Scheme.S1, hasher: KeyedHash = REFERENCE,
              mutant: Optional[Mutant] = None) -> "OracleContext":
        return cls(make_world(n_tags, seed=seed, scheme=scheme, hasher=hasher, mutant=mutant), seed)

    @property
    def hasher(self) -> KeyedHash:
        return self.world.db.hasher

    def coin(self) -> int:
        """The challenger's bit, drawn once per trial."""
        if self._coin is None:
            self._coin = self.rng.getrandbits(1)
        return self._coin

    def random_response(self) -> TagResponse:
        r = self.rng.getrandbits
        return TagResponse(r(64), r(64), r(64) if self.world.scheme is Scheme.S2 else None)

    # O^CreateTag
    def create_tag(self, i: Hashable, mutant: Optional[Mutant] = None) -> None:
        self.world.tags[i], _ = setup_tag(self.world.db, i, mutant=mutant)

    # O^Corrupt
    def corrupt(self, i: Hashable) -> dict:
        self.corrupted.add(i)
        t = self.world.tags[i]
        return {"key": t.key, "t_max": t.t_max, "t_cur": t.t_cur, "t_prev": t.t_prev}

    # O^Launch
    def launch(self, i: Hashable) -> Instance:
        (_, hello), = open_batch(self.world.reader, self.world.db, [i])
        return Instance(i, hello)

    # O^SendTag
    def send_tag(self, m: Optional[ReaderHello], i: Hashable) -> TagResponse:
        return tag_process(self.world.tags[i], m).response

    # O^SendReader
    def send_reader(self, m: Optional[TagResponse], pi: Instance):
        pi.response = m
        return collect(self.world.reader, pi.id, m)

    # O^Return
    def return_(self, pi: Instance) -> int:
        reader = self.world.reader
        try:
            report, session_map = close_batch(reader)
        except EmptyBatchError:
            pi.accepted = False
            return 0
        reply = verify_batch(self.world.db, report, session_map)
        apply_reply(reader, reply)
        pi.accepted = reply.msg is MSG.TAG_VALID and pi.id not in self.corrupted
        return int(pi.accepted)

    # O^Execute
    def execute(self, i: Hashable) -> Instance:
        pi = self.launch(i)
        pi.response = self.send_tag(pi.hello, i)
        self.send_reader(pi.response, pi)
        self.return_(pi)
        return pi

    # O^Tr: a success or failure session and the tag's simulated response time
    def timed(self, outcome: str, i: Hashable) -> tuple[TagResponse, float]:
        pi = self.launch(i)
        hello = pi.hello
        if outcome == "F":
            hello = ReaderHello(hello.T_r, hello.R_r, self.rng.getrandbits(64))
        res = tag_process(self.world.tags[i], hello)
        link_ms = (encode(hello).length / DEFAULT_RATES[Link.R2T]
                   + encode(res.response).length / DEFAULT_RATES[Link.T2R]) * 1000.0
        return res.response, res.ops_used * self.world.hash_ms + link_ms


# reports ---------------------------------------------------------------------

@dataclass
class ExperimentReport:
    name: str
    scheme: str
    trials: int
    wins: int
    advantage: float
    ci95: float
    metric: str            # "advantage" or "win_rate"
    threshold: float
    verdict: str           # PASS / FAIL against the security threshold
    adversary: str
    seed: int
    mutant: Optional[str] = None
    floor: Optional[float] = None
    mutant_detected: Optional[bool] = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class _Tally:
    def __init__(self):
        self.n = [0, 0]
        self.ones = [0, 0]
        self.wins = 0

    def add(self, b: int, guess: int) -> None:
        self.n[b] += 1
        self.ones[b] += guess
        self.wins += int(b == guess)

    @property
    def trials(self) -> int:
        return self.n[0] + self.n[1]

    def advantage(self) -> tuple[float, float]:
        p = [self.ones[k] / self.n[k] if self.n[k] else 0.0 for k in (0, 1)]
        var = sum(p[k] * (1 - p[k]) / self.n[k] for k in (0, 1) if self.n[k])
        return abs(p[1] - p[0]) / 2, 1.96 * math.sqrt(var) / 2


def _check_trials(trials: int, minimum: int = 1) -> None:
    if trials < minimum:
        raise UsageError(f"need at least {minimum} trials, got {trials}")


def _floor_for(name: str, mutant: Optional[Mutant]) -> Optional[float]:
    if mutant is None:
        return None
    mutant = Mutant(mutant)
    try:
        return MUTANT_FLOORS[(name, mutant)]
    except KeyError:
        raise UsageError(f"mutant {mutant.value} is not applicable to experiment {name}") from None


def _advantage_report(name, tally: _Tally, scheme, adversary, seed, mutant, detail=None) -> ExperimentReport:
    adv, ci = tally.advantage()
    floor = _floor_for(name, mutant)
    return ExperimentReport(
        name=name, scheme=Scheme(scheme).value, trials=tally.trials, wins=tally.wins,
        advantage=adv, ci95=ci, metric="advantage", threshold=NEGLIGIBLE,
        verdict="PASS" if adv < NEGLIGIBLE else "FAIL", adversary=adversary, seed=seed,
        mutant=None if mutant is None else Mutant(mutant).value, floor=floor,
        mutant_detected=None if floor is None else adv > floor, detail=detail or {})


def _winrate_report(name, wins, trials, scheme, adversary, seed, mutant, detail=None,
                    threshold=CLONE_BOUND) -> ExperimentReport:
    rate = wins / trials
    # Wilson-style upper half-width; with zero wins this is the rule-of-three bound
    ci = 3.0 / trials if wins == 0 else 1.96 * math.sqrt(rate * (1 - rate) / trials)
    floor = _floor_for(name, mutant)
    return ExperimentReport(
        name=name, scheme=Scheme(scheme).value, trials=trials, wins=wins, advantage=rate,
        ci95=ci, metric="win_rate", threshold=threshold,
        verdict="PASS" if rate <= threshold else "FAIL", adversary=adversary, seed=seed,
        mutant=None if mutant is None else Mutant(mutant).value, floor=floor,
        mutant_detected=None if floor is None else rate > floor, detail=detail or {})


def _trial_seeds(seed: int, trials: int):
    rng = random.Random(seed)
    for _ in range(trials):
        yield rng.getrandbits(64)


def _matches_key(ctx: OracleContext, hello: ReaderHello, resp: TagResponse, key: int, t_max: int) -> bool:
    h = ctx.hasher
    if h(cat(resp.R_t, hello.R_r), key) != resp.H_id:
        return False
    return resp.at is None or h(cat(t_max), key) == resp.at


# forward / backward security ----------------------------------------------------

def _key_chain_guess(ctx, view, candidate_keys, t_max) -> int:
    hello, resp = view
    return int(any(_matches_key(ctx, hello, resp, k, t_max) for k in candidate_keys))


def _random_guess(ctx, view, candidate_keys, t_max) -> int:
    return ctx.rng.getrandbits(1)


def _name(adversary) -> str:
    return adversary if isinstance(adversary, str) else getattr(adversary, "__name__", "custom")


KEY_ADVERSARIES = {"key-chain-extender": _key_chain_guess, "random-guess": _random_guess}


def _adversary(table: dict, name) -> Callable:
    if callable(name):
        return name
    try:
        return table[name]
    except KeyError:
        raise UsageError(f"unknown adversary {name!r}; choose from {sorted(table)}") from None


def run_forward_security(trials: int, adversary: str = "key-chain-extender", *, seed: int = 0,
                         scheme=Scheme.S1, mutant: Optional[Mutant] = None,
                         hasher: KeyedHash = REFERENCE, n_tags: int = 2) -> ExperimentReport:
    """Corrupt the challenge tag after instance j-1; tell its real j-1 response from random."""
    _check_trials(trials, MIN_KEY_TRIALS)
    guess = _adversary(KEY_ADVERSARIES, adversary)
    tally = _Tally()
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(n_tags, s, scheme, hasher, mutant)
        ids = list(ctx.world.tags)
        ic, others = ids[0], ids[1:]
        for i in others:
            ctx.execute(i)
        ctx.execute(ic)
        pi = ctx.execute(ic)                       # instance j-1
        secrets = ctx.corrupt(ic)                  # current key k_j
        b = ctx.coin()
        resp = pi.response if b else ctx.random_response()
        for i in others:
            ctx.execute(i)
        tally.add(b, guess(ctx, (pi.hello, resp), [secrets["key"]], secrets["t_max"]))
    return _advantage_report("forward", tally, scheme, _name(adversary), seed, mutant)


def run_backward_security(trials: int, adversary: str = "key-chain-extender", *, seed: int = 0,
                          scheme=Scheme.S1, mutant: Optional[Mutant] = None,
                          hasher: KeyedHash = REFERENCE, n_tags: int = 2,
                          lift_restriction: bool = False) -> ExperimentReport:
    """Corrupt at j, miss the refresh transcript's R_r, then judge instance j+1.

    ``lift_restriction`` hands the adversary the refresh R_r as a control run.
    """
    _check_trials(trials, MIN_KEY_TRIALS)
    guess = _adversary(KEY_ADVERSARIES, adversary)
    tally = _Tally()
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(n_tags, s, scheme, hasher, mutant)
        ids = list(ctx.world.tags)
        ic, others = ids[0], ids[1:]
        for i in others:
            ctx.execute(i)
        ctx.execute(ic)
        secrets = ctx.corrupt(ic)                  # k_j
        refresh = ctx.execute(ic)                  # instance j; R_r withheld
        seen_rr = refresh.hello.R_r if lift_restriction else None
        pi = ctx.execute(ic)                       # instance j+1
        b = ctx.coin()
        resp = pi.response if b else ctx.random_response()
        for i in others:
            ctx.execute(i)
        cands = [secrets["key"]]
        if seen_rr is not None:
            cands.append(ctx.hasher(cat(secrets["key"]), seen_rr))
        tally.add(b, guess(ctx, (pi.hello, resp), cands, secrets["t_max"]))
    return _advantage_report("backward", tally, scheme, _name(adversary), seed, mutant,
                             {"lift_restriction": lift_restriction})


# tracking ------------------------------------------------------------------------

def _fields(resp: TagResponse) -> set:
    out = {("H_id", resp.H_id), ("R_t", resp.R_t)}
    if resp.at is not None:
        out.add(("AT", resp.at))
    return out


def _correlate(ctx, challenge: list, seen0: set, seen1: set) -> Optional[int]:
    got = set().union(*(_fields(r) for r in challenge))
    if got & seen0:
        return 0
    if got & seen1:
        return 1
    return None


def run_tracking(variant: str, trials: int, adversary: str = "linkability-correlator", *,
                 seed: int = 0, scheme=Scheme.S1, mutant: Optional[Mutant] = None,
                 hasher: KeyedHash = REFERENCE, n_tags: int = 3) -> ExperimentReport:
    variant = variant.lower()
    if variant not in ("exp1", "exp2"):
        raise UsageError("tracking variant must be EXP1 or EXP2")
    _check_trials(trials)
    if adversary not in ("linkability-correlator", "keyless-mac-checker", "random-guess"):
        raise UsageError(f"unknown tracking adversary {adversary!r}")
    name = "tracking1" if variant == "exp1" else "tracking2"
    tally = _Tally()
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(n_tags, s, scheme, hasher, mutant)
        if variant == "exp1":
            b, guess = _tracking1_trial(ctx, adversary)
        else:
            b, guess = _tracking2_trial(ctx, adversary)
        tally.add(b, guess)
    return _advantage_report(name, tally, scheme, adversary, seed, mutant)


def _keyless(ctx, views) -> bool:
    return any(ctx.hasher(cat(r.R_t, h.R_r), 0) == r.H_id for h, r in views)


def _tracking1_trial(ctx: OracleContext, adversary: str) -> tuple[int, int]:
    ids = list(ctx.world.tags)
    i0, i1 = ids[0], ids[1]
    seen = {i0: set(), i1: set()}
    for _ in range(2):
        for i in (i0, i1):
            seen[i] |= _fields(ctx.execute(i).response)
    b = ctx.coin()
    ib = (i0, i1)[b]
    w = ctx.world
    # withdraw both from D_S and re-add the chosen one under a fresh handle
    w.tags["challenge"] = w.tags[ib]
    w.db.records["challenge"] = w.db.records[ib]
    for i in (i0, i1):
        del w.tags[i], w.db.records[i]
    views = [ctx.execute("challenge") for _ in range(2)]
    for i in ids[2:]:
        ctx.execute(i)
    if adversary == "random-guess":
        return b, ctx.rng.getrandbits(1)
    if adversary == "keyless-mac-checker":
        # learns nothing about which tag; can only tell real MACs from noise
        return b, ctx.rng.getrandbits(1)
    g = _correlate(ctx, [v.response for v in views], seen[i0], seen[i1])
    return b, ctx.rng.getrandbits(1) if g is None else g


def _tracking2_trial(ctx: OracleContext, adversary: str) -> tuple[int, int]:
    ids = list(ctx.world.tags)
    ic, others = ids[0], ids[1:]
    for i in others:
        ctx.execute(i)
    seen = set()
    for _ in range(2):
        seen |= _fields(ctx.execute(ic).response)
    pi = ctx.execute(ic)                            # instance j
    b = ctx.coin()
    resp = pi.response if b else ctx.random_response()
    if adversary == "random-guess":
        return b, ctx.rng.getrandbits(1)
    if adversary == "keyless-mac-checker":
        return b, int(_keyless(ctx, [(pi.hello, resp)]))
    return b, int(bool(_fields(resp) & seen))


# cloning / replay --------------------------------------------------------------

CLONING_ADVERSARIES = ("transcript-replayer", "random-forger", "guess-key-forger")


def run_cloning(trials: int, adversary: str = "random-forger", mode: str = "passive", *,
                seed: int = 0, scheme=Scheme.S1, mutant: Optional[Mutant] = None,
                hasher: KeyedHash = REFERENCE) -> ExperimentReport:
    """Try to get an uncorrupted tag accepted without its key.

    In active mode the adversary first corrupts a different tag and uses its
    secrets as the forging key.
    """
    _check_trials(trials)
    if adversary not in CLONING_ADVERSARIES:
        raise UsageError(f"unknown cloning adversary {adversary!r}")
    if mode not in ("active", "passive"):
        raise UsageError("mode must be active or passive")
    _floor_for("cloning", mutant)
    wins = 0
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(2, s, scheme, hasher, mutant)
        victim, other = list(ctx.world.tags)
        guess_key, guess_tmax = ctx.rng.getrandbits(64), ctx.rng.getrandbits(64)
        if mode == "active":
            leaked = ctx.corrupt(other)
            guess_key, guess_tmax = leaked["key"], leaked["t_max"]
        recorded = ctx.execute(victim).response
        pi = ctx.launch(victim)
        if adversary == "transcript-replayer":
            forged = recorded
        elif adversary == "random-forger":
            forged = ctx.random_response()
        else:
            rt = ctx.rng.getrandbits(64)
            h = ctx.hasher
            forged = TagResponse(h(cat(rt, pi.hello.R_r), guess_key), rt,
                                 h(cat(guess_tmax), guess_key) if scheme == Scheme.S2 else None)
        ctx.send_reader(forged, pi)
        wins += ctx.return_(pi)
    return _winrate_report("cloning", wins, trials, scheme, adversary, seed, mutant,
                           {"mode": mode})


def run_replay(trials: int, *, seed: int = 0, scheme=Scheme.S1, mutant: Optional[Mutant] = None,
               hasher: KeyedHash = REFERENCE, adversary: str = "transcript-replayer") -> ExperimentReport:
    """Replay session-j messages at a later session, in both directions."""
    _check_trials(trials)
    if adversary != "transcript-replayer":
        raise UsageError(f"unknown replay adversary {adversary!r}")
    wins = 0
    resp_accepted = hello_accepted = 0
    reasons: dict = {}
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(1, s, scheme, hasher, mutant)
        (tag_id,) = ctx.world.tags
        tag = ctx.world.tags[tag_id]
        old = ctx.execute(tag_id)                   # session j, recorded
        # reader -> tag: the session-j hello again, right after j and after j+1
        h_ok = 0
        for _ in range(2):
            before = tag.epoch
            tag_process(tag, old.hello)
            h_ok |= int(tag.epoch != before)
            ctx.execute(tag_id)
        # tag -> reader: the session-j response into a fresh instance
        pi = ctx.launch(tag_id)
        reason = ctx.send_reader(old.response, pi)
        key = "MARKED" if reason is None else reason.value
        reasons[key] = reasons.get(key, 0) + 1
        r_ok = ctx.return_(pi)
        resp_accepted += r_ok
        hello_accepted += h_ok
        wins += int(r_ok or h_ok)
    return _winrate_report("replay", wins, trials, scheme, adversary, seed, mutant,
                           {"response_replays_accepted": resp_accepted,
                            "hello_replays_accepted": hello_accepted,
                            "response_replay_outcomes": reasons},
                           threshold=0.0)


# timing ------------------------------------------------------------------------

def run_timing(trials: int, *, seed: int = 0, scheme=Scheme.S1, mutant: Optional[Mutant] = None,
               hasher: KeyedHash = REFERENCE, adversary: str = "time-splitter") -> ExperimentReport:
    """Tell a success session from a failure by the tag's simulated response time."""
    _check_trials(trials)
    if adversary != "time-splitter":
        raise UsageError(f"unknown timing adversary {adversary!r}")
    tally = _Tally()
    ops_seen = {"S": set(), "F": set()}
    for s in _trial_seeds(seed, trials):
        ctx = OracleContext.fresh(1, s, scheme, hasher, mutant)
        (i,) = ctx.world.tags
        _, ts = ctx.timed("S", i)
        _, tf = ctx.timed("F", i)
        ops_seen["S"].add(ts)
        ops_seen["F"].add(tf)
        b = ctx.coin()
        _, t = ctx.timed("S" if b else "F", i)
        _, ts2 = ctx.timed("S", i)
        guess = 1 if ts == tf else int(t == ts)
        tally.add(b, guess)
    return _advantage_report("timing", tally, scheme, adversary, seed, mutant,
                             {"times_ms": {k: sorted(v) for k, v in ops_seen.items()}})


# desynchronization ---------------------------------------------------------------

@dataclass
class DesyncReport:
    scheme: str
    desync_s: int
    desync_t: int
    resync_s: int
    resync_t: int
    detail: dict = field(default_factory=dict)

    @property
    def values(self) -> tuple[int, int, int, int]:
        return (self.desync_s, self.desync_t, self.resync_s, self.resync_t)

    @property
    def synchronizable(self) -> bool:
        return self.desync_s <= self.resync_s and self.desync_t <= self.resync_t

    @property
    def verdict(self) -> str:
        return "synchronizable" if self.synchronizable else "desynchronizable"

    def to_json(self) -> str:
        d = asdict(self)
        d.update(values=list(self.values), verdict=self.verdict)
        return json.dumps(d, sort_keys=True)


def update_tag(world: World, i: Hashable) -> None:
    """UpdateTag: the tag accepts an honest challenge whose answer never arrives."""
    tag_process(world.tags[i], issue_challenge(world.db, i))


def update_server(world: World, i: Hashable) -> None:
    force_update(world.db, i)


def _accepts(world: World, i: Hashable) -> bool:
    try:
        return run_session(world, [i]).msg is MSG.TAG_VALID
    except EmptyBatchError:
        return False


def _resync(scheme, seed, update, cap: int) -> int:
    world = make_world(1, seed=seed, scheme=scheme)
    (i,) = world.tags
    ct = 1
    while ct <= cap:
        for _ in range(ct):
            update(world, i)
        if not _accepts(world, i):
            return ct - 1
        ct += 1
    return cap


SINGLE_FLOW_ATTACKS = {
    "drop": lambda: HookAction(Action.DROP),
    "flip-top": None,   # built per message length
    "flip-low": lambda: HookAction(Action.MODIFY, 1),
}


def _single_flow_hook(attack: str):
    def hook(link, index, bits, history):
        if index != 0:
            return HookAction()
        if attack == "flip-top":
            return HookAction(Action.MODIFY, 1 << (bits.length - 1))
        return SINGLE_FLOW_ATTACKS[attack]()
    return hook


def measure_desync(scheme=Scheme.S1, *, seed: int = 0, cap: int = 8) -> DesyncReport:
    """(Desync_S, Desync_T, Resync_S, Resync_T) for a fresh synchronized tag.

    Desync values come from the strongest single-flow attack (drop or bit flip
    of one message in one session); positive epoch difference means the tag's
    key is ahead of the server's.
    """
    outcomes = {}
    ahead_tag = ahead_server = 0
    for link in Link:
        for attack in SINGLE_FLOW_ATTACKS:
            world = make_world(1, seed=seed, scheme=scheme)
            (i,) = world.tags
            world.set_hook(link, _single_flow_hook(attack))
            try:
                run_session(world, [i])
            except EmptyBatchError:
                pass
            d = world.tags[i].epoch - world.db.records[i].epoch
            outcomes[f"{attack}:{link.value}"] = d
            ahead_tag = max(ahead_tag, d)
            ahead_server = max(ahead_server, -d)
    resync_s = _resync(scheme, seed, update_tag, cap)
    resync_t = _resync(scheme, seed, update_server, cap)
    return DesyncReport(Scheme(scheme).value, ahead_tag, ahead_server, resync_s, resync_t,
                        {"epoch_gap_by_attack": outcomes})


# dispatch --------------------------------------------------------------------------

DEFAULT_ADVERSARY = {
    "forward": "key-chain-extender", "backward": "key-chain-extender",
    "tracking1": "linkability-correlator", "tracking2": "linkability-correlator",
    "cloning": "random-forger", "replay": "transcript-replayer", "timing": "time-splitter",
}


def run_experiment(name: str, trials: int, *, seed: int = 0, scheme=Scheme.S1,
                   mutant: Optional[Mutant] = None, adversary: Optional[str] = None,
                   hasher: KeyedHash = REFERENCE, mode: str = "passive"):
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}")
    if name == "desync":
        return measure_desync(scheme, seed=seed)
    adversary = adversary or DEFAULT_ADVERSARY[name]
    kw = dict(seed=seed, scheme=scheme, mutant=mutant, hasher=hasher)
    if name == "forward":
        return run_forward_security(trials, adversary, **kw)
    if name == "backward":
        return run_backward_security(trials, adversary, **kw)
    if name in ("tracking1", "tracking2"):
        return run_tracking("exp1" if name == "tracking1" else "exp2", trials, adversary, **kw)
    if name == "cloning":
        return run_cloning(trials, adversary, mode, **kw)
    if name == "replay":
        return run_replay(trials, adversary=adversary, **kw)
    return run_timing(trials, adversary=adversary, **kw)
