import json

import pytest

from tagchain.crypto import KeyedHash
from tagchain.errors import UsageError
from tagchain.experiments import (EXPERIMENTS, MUTANT_FLOORS, OracleContext, measure_desync,
                                  run_backward_security, run_cloning, run_experiment,
                                  run_forward_security, run_replay, run_timing, run_tracking)
from tagchain.tag import Mutant
from tagchain.wire import Scheme

TRIALS = 300


class TestOracles:
    def test_execute_accepts(self, scheme):
        ctx = OracleContext.fresh(2, 1, scheme)
        assert ctx.execute("tag0").accepted

    def test_coin_drawn_once(self):
        ctx = OracleContext.fresh(1, 1)
        assert len({ctx.coin() for _ in range(10)}) == 1

    def test_corrupt_is_isolated(self, scheme):
        ctx = OracleContext.fresh(3, 4, scheme)
        ctx.corrupt("tag1")
        assert ctx.execute("tag0").accepted
        assert ctx.execute("tag2").accepted
        assert "tag1" in ctx.corrupted
        # a corrupted tag's session still verifies but no longer counts as a win
        assert not ctx.execute("tag1").accepted

    def test_create_tag(self):
        ctx = OracleContext.fresh(1, 1)
        ctx.create_tag("new")
        assert ctx.execute("new").accepted

    def test_timed_paths_equal(self, scheme):
        ctx = OracleContext.fresh(1, 1, scheme)
        assert ctx.timed("S", "tag0")[1] == ctx.timed("F", "tag0")[1]


class TestRealProtocol:
    @pytest.mark.parametrize("name", ["forward", "backward", "tracking1", "tracking2", "timing"])
    def test_advantage_small(self, name, scheme):
        r = run_experiment(name, TRIALS, seed=1, scheme=scheme)
        assert r.verdict == "PASS"
        assert 0 <= r.advantage <= 0.5

    def test_timing_exactly_zero(self, scheme):
        assert run_timing(TRIALS, scheme=scheme).advantage == 0

    def test_replay_never_wins(self, scheme):
        r = run_replay(TRIALS, scheme=scheme)
        assert r.wins == 0
        assert r.detail["response_replay_outcomes"] == {"DUPLICATE_RT": TRIALS}

    @pytest.mark.parametrize("adversary", ["transcript-replayer", "random-forger", "guess-key-forger"])
    @pytest.mark.parametrize("mode", ["active", "passive"])
    def test_cloning(self, adversary, mode):
        assert run_cloning(TRIALS, adversary, mode).wins == 0

    def test_deterministic(self):
        a = run_tracking("EXP1", TRIALS, seed=3)
        b = run_tracking("EXP1", TRIALS, seed=3)
        assert a.to_json() == b.to_json()

    def test_report_json(self):
        d = json.loads(run_forward_security(100).to_json())
        assert d["name"] == "forward" and d["trials"] == 100


class TestControls:
    def test_backward_without_restriction_breaks(self, scheme):
        assert run_backward_security(TRIALS, scheme=scheme, lift_restriction=True).advantage > 0.45

    def test_weak_hash_is_caught(self):
        r = run_tracking("EXP2", TRIALS, "keyless-mac-checker", hasher=KeyedHash("test-weak"))
        assert r.advantage > 0.45
        assert r.verdict == "FAIL"

    def test_pluggable_strategy(self):
        def always_one(ctx, view, keys, t_max):
            return 1
        r = run_forward_security(100, always_one)
        assert r.adversary == "always_one" and r.advantage == 0


class TestMutants:
    @pytest.mark.parametrize("name,mutant", list(MUTANT_FLOORS))
    def test_detected(self, name, mutant, scheme):
        r = run_experiment(name, TRIALS, seed=2, scheme=scheme, mutant=mutant)
        assert r.mutant_detected, r.to_json()

    def test_inapplicable_pair(self):
        with pytest.raises(UsageError):
            run_experiment("timing", 10, mutant=Mutant.STATIC_ID)


class TestDesync:
    def test_values(self, scheme):
        r = measure_desync(scheme)
        assert r.values == (1, 0, 1, 0)
        assert r.synchronizable and r.verdict == "synchronizable"

    def test_single_flow_breakdown(self):
        gaps = measure_desync(Scheme.S1).detail["epoch_gap_by_attack"]
        assert gaps["drop:T->R"] == 1 and gaps["drop:R->T"] == 0


class TestUsage:
    def test_zero_trials(self):
        with pytest.raises(UsageError):
            run_forward_security(0)
        with pytest.raises(UsageError):
            run_replay(0)

    def test_key_games_need_100_trials(self):
        with pytest.raises(UsageError):
            run_backward_security(99)

    def test_unknown_experiment(self):
        with pytest.raises(UsageError):
            run_experiment("nope", 10)

    def test_unknown_adversary(self):
        with pytest.raises(UsageError):
            run_forward_security(100, "psychic")

    def test_unknown_variant(self):
        with pytest.raises(UsageError):
            run_tracking("EXP3", 10)

    def test_names(self):
        assert set(EXPERIMENTS) == {"forward", "backward", "tracking1", "tracking2", "cloning",
                                    "replay", "timing", "desync"}
