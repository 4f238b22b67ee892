"""Primitive layer: keyed hash, counter-mode PRNG, XOR aggregation, one-time pad.

Every protocol field is a 64-bit word held as a plain ``int``.  Concatenation
(``x || y``) is fixed-width big-endian, 8 bytes per word, in argument order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from functools import reduce
from operator import xor
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import UsageError

WORD_BITS = 64
WORD_BYTES = WORD_BITS // 8
MASK64 = (1 << WORD_BITS) - 1

GOLDEN_PATH = Path(__file__).with_name("golden.json")


class MSG(str, Enum):
    TAG_VALID = "TAG-VALID"
    TAG_AUTH_ERROR = "TAG-AUTH-ERROR"


def word(x: int) -> int:
    if not 0 <= x <= MASK64:
        raise UsageError(f"value {x!r} does not fit in 64 bits")
    return x


def cat(*words: int) -> bytes:
    """Concatenate 64-bit words as big-endian bytes."""
    return b"".join(word(w).to_bytes(WORD_BYTES, "big") for w in words)


class OpMeter:
    """Counts primitive operations (keyed hash and PRNG calls cost 1 each)."""

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = count

    def tick(self, n: int = 1) -> None:
        self.count += n

    def __repr__(self):
        return f"OpMeter({self.count})"


class KeyedHash:
    """Pluggable 64-bit keyed one-way function.

    ``reference-prf`` is keyed BLAKE2b truncated to 8 bytes.  ``test-weak``
    ignores the key entirely; it exists only to plant a flaw that the
    experiment distinguishers must catch.
    """

    ALGORITHMS = ("reference-prf", "test-weak")

    def __init__(self, algorithm: str = "reference-prf"):
        if algorithm not in self.ALGORITHMS:
            raise UsageError(f"unknown hash algorithm {algorithm!r}")
        self.algorithm = algorithm

    def __call__(self, message: bytes, key: int) -> int:
        if self.algorithm == "reference-prf":
            h = hashlib.blake2b(message, digest_size=WORD_BYTES,
                                key=word(key).to_bytes(WORD_BYTES, "big"))
        else:
            h = hashlib.blake2b(message, digest_size=WORD_BYTES)
        return int.from_bytes(h.digest(), "big")

    def __eq__(self, other):
        return isinstance(other, KeyedHash) and other.algorithm == self.algorithm

    def __hash__(self):
        return hash(self.algorithm)

    def __repr__(self):
        return f"KeyedHash({self.algorithm!r})"


REFERENCE = KeyedHash("reference-prf")


def keyed_hash(message: bytes, key: int, *, hasher: KeyedHash = REFERENCE,
               meter: Optional[OpMeter] = None) -> int:
    if not message:
        raise UsageError("keyed_hash needs a non-empty message")
    if meter is not None:
        meter.tick()
    return hasher(message, key)


@dataclass
class Prng:
    """Counter-mode generator over the keyed hash: output j is Hash(j, seed)."""

    seed: int
    counter: int = 0
    hasher: KeyedHash = REFERENCE

    def next(self, meter: Optional[OpMeter] = None) -> int:
        self.counter += 1
        return keyed_hash(cat(self.counter), self.seed, hasher=self.hasher, meter=meter)


def prng_next(prng: Prng, meter: Optional[OpMeter] = None) -> int:
    return prng.next(meter)


def aggregate(digests: Iterable[int]) -> int:
    digests = list(digests)
    if not digests:
        raise UsageError("aggregate of an empty list")
    return reduce(xor, digests, 0)


def xor_pad(a: int, b: int) -> int:
    return word(a) ^ word(b)


def verify_aggregate(entries: Sequence[tuple[int, int, int]], h: int, *,
                     hasher: KeyedHash = REFERENCE,
                     meter: Optional[OpMeter] = None) -> MSG:
    """Check an XOR-aggregated MAC over ``(R_t, R_r, key)`` entries."""
    if not entries:
        raise UsageError("verify_aggregate needs at least one entry")
    folded = aggregate(keyed_hash(cat(rt, rr), k, hasher=hasher, meter=meter)
                       for rt, rr, k in entries)
    return MSG.TAG_VALID if folded == h else MSG.TAG_AUTH_ERROR


# golden values -------------------------------------------------------------

# (label, message words, key); pinned per algorithm in golden.json
GOLDEN_CASES = [
    ("cat(1,2)/k=5", (0x1, 0x2), 0x5),
    ("cat(0)/k=0", (0x0,), 0x0),
    ("cat(max)/k=max", (MASK64,), MASK64),
    ("cat(T0,T1)/tmax", (0x0000_0000_0000_0001, 0x0000_0000_0000_0002), 0x0000_0100_0000_0000),
]


def compute_golden() -> dict:
    out = {}
    for algo in KeyedHash.ALGORITHMS:
        h = KeyedHash(algo)
        out[algo] = {label: f"{h(cat(*msg), key):016x}" for label, msg, key in GOLDEN_CASES}
    return out


def load_golden(path: Path = GOLDEN_PATH) -> dict:
    return json.loads(path.read_text())


def regen_golden(path: Path = GOLDEN_PATH) -> dict:
    values = compute_golden()
    path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    return values
