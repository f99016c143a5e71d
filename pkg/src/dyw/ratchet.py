"""Byte-level Megolm ratchet.

The ratchet value at index ``i`` is four 32-byte parts.  Part ``j`` ticks
once every ``256 ** (3 - j)`` indices; when part ``j`` ticks, every lower part
``k > j`` is reseeded from the value part ``j`` had just before the tick.

:func:`advance` jumps straight to a target index, spending one hash per tick
it cannot skip: the highest changed part is iterated to its new value, and
each lower part is rebuilt from the last seed it received.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

PART_SIZE = 32
SEED_SIZE = 4 * PART_SIZE
INDEX_LIMIT = 2**32
KEYS_LABEL = b"MEGOLM_KEYS"
EXPORT_SIZE = 4 + SEED_SIZE


class RatchetError(ValueError):
    pass


class MonotonicityError(RatchetError):
    """Raised when asked to move the ratchet backwards."""


class IndexRangeError(RatchetError):
    pass


def part_hash(j: int, value: bytes) -> bytes:
    """H_j: HMAC-SHA256 keyed by ``value`` over the single byte ``j``."""
    return hmac.digest(value, bytes([j]), hashlib.sha256)


@dataclass(frozen=True)
class RatchetState:
    index: int
    parts: tuple[bytes, bytes, bytes, bytes]
    hash_ops: int = field(default=0, compare=False)

    def __post_init__(self):
        if not 0 <= self.index < INDEX_LIMIT:
            raise IndexRangeError(f"index {self.index} outside [0, 2^32)")
        if len(self.parts) != 4 or any(len(p) != PART_SIZE for p in self.parts):
            raise RatchetError("ratchet needs four 32-byte parts")

    def value(self) -> bytes:
        return b"".join(self.parts)


@dataclass(frozen=True)
class MessageKeys:
    cipher_key: bytes
    mac_key: bytes
    iv: bytes


def init(seed: bytes) -> RatchetState:
    if len(seed) != SEED_SIZE:
        raise RatchetError(f"seed must be {SEED_SIZE} bytes, got {len(seed)}")
    parts = tuple(seed[j * PART_SIZE:(j + 1) * PART_SIZE] for j in range(4))
    return RatchetState(0, parts)


def _counter(index: int, level: int) -> int:
    """How many times part ``level`` has ticked by ``index``."""
    return index >> (8 * (3 - level))


def advance(state: RatchetState, target: int) -> RatchetState:
    if target >= INDEX_LIMIT:
        raise IndexRangeError(f"target {target} is not below 2^32")
    if target < state.index:
        raise MonotonicityError(f"cannot move ratchet back from {state.index} to {target}")
    if target == state.index:
        return RatchetState(state.index, state.parts, 0)

    parts = list(state.parts)
    ops = 0
    top = next(j for j in range(4) if _counter(target, j) != _counter(state.index, j))
    ticks = _counter(target, top) - _counter(state.index, top)

    seed = parts[top]
    for _ in range(ticks - 1):
        seed = part_hash(top, seed)
    parts[top] = part_hash(top, seed)
    ops += ticks

    for k in range(top + 1, 4):
        digit = _counter(target, k) & 0xFF
        value = part_hash(k, seed)
        ops += 1
        if digit:
            for _ in range(digit - 1):
                value = part_hash(k, value)
            seed = value
            value = part_hash(k, value)
            ops += digit
        parts[k] = value

    return RatchetState(target, tuple(parts), ops)


def hash_op_count(state: RatchetState) -> int:
    """Part-hash invocations spent by the :func:`advance` call that produced ``state``."""
    return state.hash_ops


def derive_message_keys(state: RatchetState) -> MessageKeys:
    okm = HKDF(algorithm=hashes.SHA256(), length=80, salt=None, info=KEYS_LABEL).derive(state.value())
    return MessageKeys(okm[:32], okm[32:64], okm[64:])


def export_state(state: RatchetState) -> bytes:
    return state.index.to_bytes(4, "big") + state.value()


def import_state(blob: bytes) -> RatchetState:
    if len(blob) != EXPORT_SIZE:
        raise RatchetError(f"exported ratchet must be {EXPORT_SIZE} bytes, got {len(blob)}")
    index = int.from_bytes(blob[:4], "big")
    return RatchetState(index, init(blob[4:]).parts)
