"""Header forgeries that evade header-only DAA, and the stress-test injector.

low_h     prepend 256 bytes of 'a'
rep_bytes tile the first 8 bytes 32 times over the first 256 bytes
com_seq   replace the first 256 bytes with a seeded run of low-entropy sequences
stress    after every m original bytes insert n copies of one random byte
"""

from __future__ import annotations

import enum
import re
import string
from dataclasses import dataclass

import numpy as np

from .entropy import BytesLike, as_array
from .errors import ParameterError

HEADER_BYTES = 256

COM_SEQ_POOL: tuple[bytes, ...] = (
    string.ascii_uppercase.encode(),
    string.ascii_lowercase.encode(),
    "".join(str(i) for i in range(23)).encode(),
    b"0" * 32,
    b"password",
    b"the",
    b"and",
    b"hello",
    b"world",
    b"file",
    b"data",
)


class AttackKind(str, enum.Enum):
    LOW_H = "low_h"
    REP_BYTES = "rep_bytes"
    COM_SEQ = "com_seq"

    @property
    def suffix(self) -> str:
        return _SUFFIXES[self]


_SUFFIXES = {
    AttackKind.LOW_H: "low-H",
    AttackKind.REP_BYTES: "rep-bytes",
    AttackKind.COM_SEQ: "com-seq",
}


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))


@dataclass(frozen=True)
class StressSpec:
    """Insert ``injection_length`` copies of one random byte every ``jump_length`` bytes."""

    injection_length: int
    jump_length: int
    seed: int = 0

    def __post_init__(self):
        n, m = self.injection_length, self.jump_length
        if n % 2 or not 0 <= n <= 64:
            raise ParameterError(f"injection length must be even in [0, 64], got {n}")
        if m % 4 or not 4 <= m <= 64:
            raise ParameterError(f"jump length must be a multiple of 4 in [4, 64], got {m}")

    @property
    def size_increase(self) -> float:
        """Asymptotic relative growth n / m."""
        return self.injection_length / self.jump_length

    @property
    def suffix(self) -> str:
        return f"stress-{self.injection_length}-{self.jump_length}"


STRESS_INJECTION_GRID = tuple(range(0, 65, 2))
STRESS_JUMP_GRID = tuple(range(4, 65, 4))

_STRESS_TAG = re.compile(r"stress\((\d+),(\d+)\)$")


def stress_tag(n: int, m: int) -> str:
    return f"stress({n},{m})"


def parse_stress_tag(tag: str) -> tuple[int, int] | None:
    match = _STRESS_TAG.match(tag)
    return (int(match.group(1)), int(match.group(2))) if match else None


def forge_low_h(file: BytesLike) -> bytes:
    return b"a" * HEADER_BYTES + bytes(file)


def forge_rep_bytes(file: BytesLike) -> bytes:
    data = bytes(file)
    if len(data) < 8:
        raise ParameterError(f"rep_bytes needs at least 8 bytes, got {len(data)}")
    return data[:8] * (HEADER_BYTES // 8) + data[HEADER_BYTES:]


def com_seq_header(seed: int, pool: tuple[bytes, ...] = COM_SEQ_POOL) -> bytes:
    """256 bytes of pool sequences: both alphabets (seeded order), then seeded draws."""
    rng = np.random.default_rng(seed)
    out = bytearray()
    for i in rng.permutation(2):
        out += pool[i]
    while len(out) < HEADER_BYTES:
        out += pool[int(rng.integers(len(pool)))]
    return bytes(out[:HEADER_BYTES])


def forge_com_seq(file: BytesLike, seed: int = 0) -> bytes:
    data = bytes(file)
    if len(data) < HEADER_BYTES:
        raise ParameterError(f"com_seq needs at least {HEADER_BYTES} bytes, got {len(data)}")
    return com_seq_header(seed) + data[HEADER_BYTES:]


def apply_attack(file: BytesLike, spec: AttackSpec) -> bytes:
    if spec.kind is AttackKind.LOW_H:
        return forge_low_h(file)
    if spec.kind is AttackKind.REP_BYTES:
        return forge_rep_bytes(file)
    return forge_com_seq(file, spec.seed)


def stress_byte(seed: int) -> int:
    return int(np.random.default_rng(seed).integers(256))


def stress_inject(file: BytesLike, spec: StressSpec) -> bytes:
    """Insert n copies of one seeded random byte after every m original bytes."""
    data = as_array(file)
    n, m = spec.injection_length, spec.jump_length
    if n == 0:
        return data.tobytes()
    blocks = data.size // m
    body = data[: blocks * m].reshape(blocks, m)
    pad = np.full((blocks, n), stress_byte(spec.seed), dtype=np.uint8)
    return np.hstack([body, pad]).tobytes() + data[blocks * m :].tobytes()
