import pytest
from hypothesis import given, strategies as st

from tagchain.crypto import MASK64, MSG
from tagchain.errors import MalformedMessage
from tagchain.wire import (S2R_ACCOUNTED_WORDS, BatchReport, Bits, Kind, ReaderHello, Scheme,
                           ServerReply, TagResponse, decode, encode, expected_bits)

words = st.integers(min_value=0, max_value=MASK64)


class TestBits:
    def test_from_words_roundtrip(self):
        b = Bits.from_words([1, MASK64])
        assert b.length == 128
        assert b.words() == [1, MASK64]

    def test_hex_keeps_leading_zeros(self):
        assert Bits.from_words([1]).hex() == "0000000000000001"

    def test_value_must_fit(self):
        with pytest.raises(ValueError):
            Bits(4, 2)

    def test_flip_is_masked_to_length(self):
        assert Bits(0, 4).flip(0xFF) == Bits(0xF, 4)

    def test_partial_word(self):
        with pytest.raises(MalformedMessage):
            Bits(0, 65).words()


class TestSizes:
    @pytest.mark.parametrize("scheme,words", [(Scheme.S1, 2), (Scheme.S2, 3)])
    def test_tag_response(self, scheme, words):
        at = 3 if scheme is Scheme.S2 else None
        assert encode(TagResponse(1, 2, at)).length == words * 64 == expected_bits(Kind.TAG_RESPONSE, scheme)

    def test_hello_is_three_words(self):
        assert encode(ReaderHello(1, 2, 3)).length == 192

    @pytest.mark.parametrize("n", [1, 2, 200])
    def test_report_is_n_plus_one_words(self, n):
        assert encode(BatchReport(0, (0,) * n)).length == (n + 1) * 64

    def test_reply_physical_and_accounted(self):
        assert encode(ServerReply(MSG.TAG_VALID)).length == 64
        assert encode(ServerReply(MSG.TAG_VALID, (1, 2))).length == 192
        assert S2R_ACCOUNTED_WORDS == {Scheme.S1: 3, Scheme.S2: 4}


class TestCodec:
    @given(words, words, words)
    def test_hello_roundtrip(self, a, b, c):
        m = ReaderHello(a, b, c)
        assert decode(encode(m), Kind.READER_HELLO, Scheme.S1) == m

    @given(words, words, words)
    def test_response_roundtrip(self, a, b, c):
        assert decode(encode(TagResponse(a, b)), Kind.TAG_RESPONSE, Scheme.S1) == TagResponse(a, b)
        assert decode(encode(TagResponse(a, b, c)), Kind.TAG_RESPONSE, Scheme.S2) == TagResponse(a, b, c)

    @given(words, st.lists(words, min_size=1, max_size=10))
    def test_report_roundtrip(self, h, rts):
        m = BatchReport(h, tuple(rts))
        assert decode(encode(m), Kind.BATCH_REPORT, Scheme.S2) == m

    @pytest.mark.parametrize("msg", list(MSG))
    def test_reply_roundtrip(self, msg):
        assert decode(encode(ServerReply(msg)), Kind.SERVER_REPLY, Scheme.S1) == ServerReply(msg)
        m2 = ServerReply(msg, (5, 6))
        assert decode(encode(m2), Kind.SERVER_REPLY, Scheme.S2) == m2

    def test_wrong_scheme_length(self):
        with pytest.raises(MalformedMessage):
            decode(encode(TagResponse(1, 2)), Kind.TAG_RESPONSE, Scheme.S2)

    def test_truncated_hello(self):
        with pytest.raises(MalformedMessage):
            decode(Bits.from_words([1, 2]), Kind.READER_HELLO, Scheme.S1)

    def test_report_without_nonces(self):
        with pytest.raises(MalformedMessage):
            decode(Bits.from_words([1]), Kind.BATCH_REPORT, Scheme.S1)

    def test_unknown_msg_code(self):
        with pytest.raises(MalformedMessage):
            decode(Bits.from_words([9]), Kind.SERVER_REPLY, Scheme.S1)

    def test_encode_rejects_other_types(self):
        with pytest.raises(TypeError):
            encode("hello")
