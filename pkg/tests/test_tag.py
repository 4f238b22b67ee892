from hypothesis import given, settings, strategies as st

from tagchain.crypto import MASK64, cat
from tagchain.server import issue_challenge, issue_renewal, setup_tag
from tagchain.tag import Mutant, Path, TagState, ops_per_session, tag_process, tag_reject
from tagchain.wire import ReaderHello, Scheme


class TestGenuinePath:
    def test_response_and_key_update(self, tag_and_db):
        tag, db = tag_and_db
        k0, h = tag.key, tag.hasher
        hello = issue_challenge(db, "t")
        out = tag_process(tag, hello)
        assert out.path is Path.GENUINE
        r = out.response
        assert r.H_id == h(cat(r.R_t, hello.R_r), k0)
        if tag.scheme is Scheme.S2:
            assert r.at == h(cat(tag.t_max), k0)
        else:
            assert r.at is None
        assert tag.key == h(cat(k0), hello.R_r)
        assert (tag.t_prev, tag.t_cur) == (db.t0, hello.T_r)
        assert tag.epoch == 1

    def test_op_count(self, tag_and_db):
        tag, db = tag_and_db
        assert tag_process(tag, issue_challenge(db, "t")).ops_used == ops_per_session(tag.scheme)

    def test_ops_per_session(self):
        assert (ops_per_session(Scheme.S1), ops_per_session(Scheme.S2)) == (4, 5)


class TestDecoyPath:
    def test_bad_digest_freezes_state(self, tag_and_db):
        tag, db = tag_and_db
        hello = issue_challenge(db, "t")
        before = tag.snapshot()
        out = tag_process(tag, ReaderHello(hello.T_r, hello.R_r, hello.auth_digest ^ 1))
        assert out.path is Path.DECOY
        after = tag.snapshot()
        assert after.pop("prng_counter") > before.pop("prng_counter")
        assert after == before

    def test_stale_timestamp(self, tag_and_db):
        tag, db = tag_and_db
        hello = issue_challenge(db, "t")
        tag_process(tag, hello)
        assert tag_process(tag, hello).path is Path.DECOY

    def test_none_input(self, tag_and_db):
        tag, _ = tag_and_db
        out = tag_reject(tag)
        assert out.path is Path.DECOY and out.ops_used == ops_per_session(tag.scheme)

    def test_decoy_shape_matches(self, tag_and_db):
        tag, _ = tag_and_db
        r = tag_reject(tag).response
        assert (r.at is None) == (tag.scheme is Scheme.S1)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, MASK64), st.integers(0, MASK64), st.integers(0, MASK64))
    def test_random_hello_costs_the_same(self, a, b, c):
        for scheme in Scheme:
            from tagchain.server import setup_server
            tag, _ = setup_tag(setup_server(seed=1, scheme=scheme), "t")
            assert tag_process(tag, ReaderHello(a, b, c)).ops_used == ops_per_session(scheme)


class TestFallbackSlot:
    def test_lost_response_then_next_hello(self, tag_and_db):
        # the tag advanced but the server never confirmed; the next hello is
        # authenticated over t_confirmed, which the tag keeps in t_prev
        tag, db = tag_and_db
        tag_process(tag, issue_challenge(db, "t"))
        assert tag_process(tag, issue_challenge(db, "t")).path is Path.GENUINE


class TestRenewal:
    def test_renewal_session(self, tag_and_db):
        tag, db = tag_and_db
        old = tag.t_max
        key = tag.key
        hello = issue_renewal(db, "t")
        assert hello.T_r > old
        out = tag_process(tag, hello)
        assert out.path is Path.RENEWAL
        assert tag.t_max == hello.T_r ^ old > old
        assert tag.key == key
        assert out.ops_used == ops_per_session(tag.scheme)


class TestMutants:
    def test_no_timestamp_check_accepts_stale(self, db):
        tag, db = setup_tag(db, "m", mutant=Mutant.NO_TIMESTAMP_CHECK)
        hello = issue_challenge(db, "m")
        tag_process(tag, hello)
        assert tag_process(tag, hello).path is Path.GENUINE

    def test_leaky_decoy_saves_an_op(self, db):
        tag, _ = setup_tag(db, "m", mutant=Mutant.LEAKY_DECOY)
        assert tag_reject(tag).ops_used == ops_per_session(db.scheme) - 1

    def test_static_id(self, db):
        tag, db = setup_tag(db, "m", mutant=Mutant.STATIC_ID)
        a = tag_process(tag, issue_challenge(db, "m")).response
        b = tag_reject(tag).response
        assert a.H_id == b.H_id

    def test_reused_rt(self, db):
        tag, db = setup_tag(db, "m", mutant=Mutant.REUSED_RT)
        first = tag_process(tag, issue_challenge(db, "m")).response
        second = tag_process(tag, issue_challenge(db, "m")).response
        assert first.R_t == second.R_t

    def test_no_key_update(self, db):
        tag, db = setup_tag(db, "m", mutant=Mutant.NO_KEY_UPDATE)
        k = tag.key
        out = tag_process(tag, issue_challenge(db, "m"))
        assert tag.key == k and out.ops_used == ops_per_session(db.scheme)


class TestPersistence:
    def test_json_roundtrip(self, tag_and_db):
        tag, db = tag_and_db
        tag_process(tag, issue_challenge(db, "t"))
        clone = TagState.restore(tag.snapshot())
        assert clone.snapshot() == tag.snapshot()
        h = issue_challenge(db, "t")
        assert tag_process(clone, h).response == tag_process(tag, h).response

    def test_persistent_bits(self):
        assert TagState.PERSISTENT_BITS == 3 * 64
