import pytest

from tagchain.costmodel import (TABLE3_OURS, CostParams, aggregation_savings, measured_tag_ops,
                                reader_server_bits, session_time, table3_rows)
from tagchain.errors import ConsistencyError, UsageError
from tagchain.wire import Scheme


def oracle_session_ms(ops, t2r_words, r2t_words=3, b=64):
    """Hand computation: ops at 0.33 ms, T->R at 640 kbps, R->T at 126 kbps."""
    return ops * 0.33, t2r_words * b / 640, r2t_words * b / 126


class TestSessionTime:
    @pytest.mark.parametrize("scheme,ops,words", [(Scheme.S1, 4, 2), (Scheme.S2, 5, 3)])
    def test_matches_hand_oracle(self, scheme, ops, words):
        st = session_time(scheme)
        assert (st.tag_compute, st.t2r, st.r2t) == pytest.approx(oracle_session_ms(ops, words))

    def test_scheme2_components(self):
        st = session_time(Scheme.S2)
        assert round(st.tag_compute, 2) == 1.65
        assert round(st.t2r, 2) == 0.30
        assert round(st.r2t, 2) == 1.52
        assert st.total == pytest.approx(3.4738, abs=1e-4)

    def test_bad_params(self):
        with pytest.raises(UsageError):
            CostParams(rate_t2r=0)


class TestReaderServer:
    def test_200_tags(self):
        agg, raw = reader_server_bits(200), reader_server_bits(200, aggregated=False)
        assert (agg.bits, raw.bits) == (12864, 25600)
        assert agg.seconds == pytest.approx(0.6432)
        assert raw.seconds == pytest.approx(1.28)
        assert aggregation_savings(200) == pytest.approx(0.4975)

    def test_single_tag(self):
        assert reader_server_bits(1).bits == 128

    def test_n_must_be_positive(self):
        with pytest.raises(UsageError):
            reader_server_bits(0)

    @pytest.mark.parametrize("n", [1, 7, 64])
    def test_formula(self, n):
        assert reader_server_bits(n).bits == (n + 1) * 64


class TestTable3:
    def test_rows_match_reference(self):
        rows = table3_rows()
        for scheme in Scheme:
            assert rows[scheme.value] == TABLE3_OURS[scheme]

    def test_measured_ops(self):
        assert measured_tag_ops(Scheme.S1) == (4, 4)
        assert measured_tag_ops(Scheme.S2) == (5, 5)

    def test_misconfigured_ops_detected(self):
        with pytest.raises(ConsistencyError):
            table3_rows(CostParams(ops_tag={Scheme.S1: 3, Scheme.S2: 5}))
