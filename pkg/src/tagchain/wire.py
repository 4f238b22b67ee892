"""Fixed-layout codecs for the four protocol messages.

Each field is one 64-bit big-endian word; fields appear in declaration order.
Layouts (b = 64):

    ReaderHello   T_r | R_r | auth_digest                    3b
    TagResponse   H_id | R_t [| AT]                          2b (S1) / 3b (S2)
    BatchReport   H | R_t_1 | ... | R_t_n                    (n+1)b
    ServerReply   msg [| AT_1 | ... | AT_n]                  b (S1) / (n+1)b (S2)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .crypto import MASK64, MSG, WORD_BITS, word
from .errors import MalformedMessage

B = WORD_BITS


class Scheme(str, Enum):
    S1 = "s1"
    S2 = "s2"


class Kind(str, Enum):
    READER_HELLO = "reader_hello"
    TAG_RESPONSE = "tag_response"
    BATCH_REPORT = "batch_report"
    SERVER_REPLY = "server_reply"


@dataclass(frozen=True)
class Bits:
    """An immutable bit-string; ``value`` holds the bits MSB-first."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or self.value < 0 or self.value.bit_length() > self.length:
            raise ValueError("bit-string value does not fit its length")

    @property
    def bit_length(self) -> int:
        return self.length

    def __len__(self):
        return self.length

    def hex(self) -> str:
        if self.length == 0:
            return ""
        return format(self.value, f"0{(self.length + 3) // 4}x")

    def flip(self, mask: int) -> "Bits":
        return Bits(self.value ^ (mask & ((1 << self.length) - 1)), self.length)

    @classmethod
    def from_words(cls, words) -> "Bits":
        v = 0
        n = 0
        for w in words:
            v = (v << B) | word(w)
            n += 1
        return cls(v, n * B)

    def words(self) -> list[int]:
        if self.length % B:
            raise MalformedMessage(f"{self.length} bits is not a whole number of words")
        n = self.length // B
        return [(self.value >> (B * (n - 1 - i))) & MASK64 for i in range(n)]


@dataclass(frozen=True)
class ReaderHello:
    T_r: int
    R_r: int
    auth_digest: int

    kind = Kind.READER_HELLO


@dataclass(frozen=True)
class TagResponse:
    H_id: int
    R_t: int
    at: Optional[int] = None

    kind = Kind.TAG_RESPONSE

    @property
    def scheme(self) -> Scheme:
        return Scheme.S1 if self.at is None else Scheme.S2


@dataclass(frozen=True)
class BatchReport:
    H: int
    R_t_list: tuple[int, ...]

    kind = Kind.BATCH_REPORT

    @property
    def n(self) -> int:
        return len(self.R_t_list)


@dataclass(frozen=True)
class ServerReply:
    msg: MSG
    at_next: Optional[tuple[int, ...]] = None

    kind = Kind.SERVER_REPLY


Message = Union[ReaderHello, TagResponse, BatchReport, ServerReply]

_MSG_CODES = {MSG.TAG_VALID: 1, MSG.TAG_AUTH_ERROR: 2}
_CODE_MSGS = {v: k for k, v in _MSG_CODES.items()}


def encode(message: Message) -> Bits:
    if isinstance(message, ReaderHello):
        return Bits.from_words([message.T_r, message.R_r, message.auth_digest])
    if isinstance(message, TagResponse):
        ws = [message.H_id, message.R_t]
        if message.at is not None:
            ws.append(message.at)
        return Bits.from_words(ws)
    if isinstance(message, BatchReport):
        return Bits.from_words([message.H, *message.R_t_list])
    if isinstance(message, ServerReply):
        return Bits.from_words([_MSG_CODES[message.msg], *(message.at_next or ())])
    raise TypeError(f"not a wire message: {message!r}")


def expected_bits(kind: Kind, scheme: Scheme, n: int = 1) -> int:
    """Physical encoded size of a message kind."""
    if kind is Kind.READER_HELLO:
        return 3 * B
    if kind is Kind.TAG_RESPONSE:
        return (2 if scheme is Scheme.S1 else 3) * B
    if kind is Kind.BATCH_REPORT:
        return (n + 1) * B
    return B if scheme is Scheme.S1 else (n + 1) * B


def decode(bits: Bits, kind: Kind, scheme: Scheme) -> Message:
    kind = Kind(kind)
    scheme = Scheme(scheme)
    n = bits.length
    if kind in (Kind.READER_HELLO, Kind.TAG_RESPONSE):
        want = expected_bits(kind, scheme)
        if n != want:
            raise MalformedMessage(f"{kind.value} needs {want} bits, got {n}")
        ws = bits.words()
        if kind is Kind.READER_HELLO:
            return ReaderHello(*ws)
        return TagResponse(ws[0], ws[1], ws[2] if scheme is Scheme.S2 else None)
    if n % B or n < B:
        raise MalformedMessage(f"{kind.value}: {n} bits is not a positive whole number of words")
    ws = bits.words()
    if kind is Kind.BATCH_REPORT:
        if len(ws) < 2:
            raise MalformedMessage("batch report carries no R_t")
        return BatchReport(ws[0], tuple(ws[1:]))
    try:
        msg = _CODE_MSGS[ws[0]]
    except KeyError:
        raise MalformedMessage(f"unknown MSG code {ws[0]:#x}") from None
    if scheme is Scheme.S1:
        if len(ws) != 1:
            raise MalformedMessage("scheme 1 reply is a single word")
        return ServerReply(msg)
    return ServerReply(msg, tuple(ws[1:]))


# Accounting sizes from the cost table, in units of b.  S->R is a fixed
# constant per scheme rather than derived from the serialized payload.
S2R_ACCOUNTED_WORDS = {Scheme.S1: 3, Scheme.S2: 4}
