"""Low-cost RFID mutual authentication with XOR-aggregated batch verification."""

from .crypto import MSG, KeyedHash, OpMeter, Prng, aggregate, keyed_hash, prng_next, verify_aggregate, xor_pad
from .errors import (ConsistencyError, EmptyBatchError, MalformedMessage, RenewalRequired,
                     RenewalSpaceExhausted, TagchainError, UsageError)
from .wire import BatchReport, Bits, ReaderHello, Scheme, ServerReply, TagResponse, decode, encode

__version__ = "0.1.0"

__all__ = [
    "MSG", "KeyedHash", "OpMeter", "Prng", "aggregate", "keyed_hash", "prng_next",
    "verify_aggregate", "xor_pad",
    "ConsistencyError", "EmptyBatchError", "MalformedMessage", "RenewalRequired",
    "RenewalSpaceExhausted", "TagchainError", "UsageError",
    "BatchReport", "Bits", "ReaderHello", "Scheme", "ServerReply", "TagResponse", "decode", "encode",
]
