import pytest

from tagchain.crypto import MSG
from tagchain.errors import EmptyBatchError, UsageError
from tagchain.reader import (Exclusion, ReaderState, apply_reply, close_batch, collect,
                             open_batch)
from tagchain.server import setup_tag, verify_batch
from tagchain.tag import tag_process
from tagchain.wire import Scheme, ServerReply, TagResponse


@pytest.fixture
def setup(db):
    tags = {}
    for i in ("a", "b"):
        tags[i], db = setup_tag(db, i)
    return tags, db, ReaderState(scheme=db.scheme)


def run_batch(tags, db, reader):
    for i, hello in open_batch(reader, db, list(tags)):
        collect(reader, i, tag_process(tags[i], hello).response)
    report, smap = close_batch(reader)
    reply = verify_batch(db, report, smap)
    apply_reply(reader, reply)
    return reply, report


class TestBatch:
    def test_honest_batch(self, setup):
        reply, report = run_batch(*setup)
        assert reply.msg is MSG.TAG_VALID
        assert report.n == 2

    def test_distinct_ids(self, setup):
        tags, db, reader = setup
        with pytest.raises(UsageError):
            open_batch(reader, db, ["a", "a"])

    def test_collect_without_challenge(self, setup):
        _, _, reader = setup
        with pytest.raises(UsageError):
            collect(reader, "a", TagResponse(1, 2))

    def test_empty_batch(self, setup):
        tags, db, reader = setup
        open_batch(reader, db, ["a"])
        collect(reader, "a", None)
        with pytest.raises(EmptyBatchError):
            close_batch(reader)


class TestFilters:
    def test_duplicate_rt(self, setup):
        tags, db, reader = setup
        (_, h), = open_batch(reader, db, ["a"])
        r = tag_process(tags["a"], h).response
        assert collect(reader, "a", r) is None
        open_batch(reader, db, ["a"])
        assert collect(reader, "a", r) is Exclusion.DUPLICATE_RT

    def test_malformed(self, setup):
        tags, db, reader = setup
        open_batch(reader, db, ["a"])
        assert collect(reader, "a", None) is Exclusion.MALFORMED

    def test_at_mismatch_only_in_scheme2(self, setup):
        tags, db, reader = setup
        (_, h), = open_batch(reader, db, ["a"])
        r = tag_process(tags["a"], h).response
        forged = TagResponse(r.H_id, r.R_t, None if r.at is None else r.at ^ 1)
        expected = Exclusion.AT_MISMATCH if db.scheme is Scheme.S2 else None
        assert collect(reader, "a", forged) is expected

    def test_rogue_tag_excluded_before_aggregation(self, setup):
        tags, db, reader = setup
        if db.scheme is Scheme.S1:
            pytest.skip("partial authentication is a scheme 2 feature")
        hellos = dict(open_batch(reader, db, ["a", "b"]))
        collect(reader, "a", tag_process(tags["a"], hellos["a"]).response)
        collect(reader, "b", TagResponse(1, 2, 3))
        report, smap = close_batch(reader)
        assert [i for i, _ in smap] == ["a"]
        assert verify_batch(db, report, smap).msg is MSG.TAG_VALID

    def test_tag_ahead_passes_at_filter(self, setup):
        tags, db, reader = setup
        if db.scheme is Scheme.S1:
            pytest.skip("scheme 2 only")
        (_, h), = open_batch(reader, db, ["a"])
        tag_process(tags["a"], h)                      # response lost
        (_, h), = open_batch(reader, db, ["a"])
        assert collect(reader, "a", tag_process(tags["a"], h).response) is None


class TestReply:
    def test_scheme2_updates_table(self, setup):
        tags, db, reader = setup
        reply, _ = run_batch(tags, db, reader)
        if db.scheme is Scheme.S2:
            assert reader.at_table["a"] == (db.record("a").at_expected,)
        else:
            assert reader.at_table == {}

    def test_scheme1_ignores_at(self, caplog):
        reader = ReaderState(scheme=Scheme.S1)
        apply_reply(reader, ServerReply(MSG.TAG_VALID, (1,)))
        assert reader.at_table == {}
        assert "ignored" in caplog.text

    def test_length_mismatch_ignored(self):
        reader = ReaderState(scheme=Scheme.S2, forwarded=["a"])
        apply_reply(reader, ServerReply(MSG.TAG_VALID, (1, 2)))
        assert reader.at_table == {}
