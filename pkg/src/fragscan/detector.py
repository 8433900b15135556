"""Differential-area classifiers: header-only DAA and the N-fragment family.

A file is flagged as ransomware-encrypted when the selected differential area
is strictly below the threshold. DAA uses the header alone. 2F adds one
fragment at a random offset and keeps the header's area when the other area
falls within ``distance`` below it. 3F/4F split the file into N partitions,
draw one fragment per partition after the header, and compare the header
area minus ``distance`` with the mean of the other areas.
"""

from __future__ import annotations

import enum
import hashlib
import os
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol, Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .entropy import (
    DEFAULT_REFERENCE_SEED,
    MAX_FRAGMENT,
    STEP,
    BytesLike,
    ReferenceFragment,
    as_array,
)
from .errors import ParameterError

Source = Union[BytesLike, str, os.PathLike]

_U64 = 2**64
_WORDS8 = struct.Struct("<8Q")


@dataclass(frozen=True)
class DetectorParams:
    """Fragment length o, threshold t, distance d, fragment count N, seed."""

    length: int
    threshold: float
    distance: float = 0.0
    fragments: int = 1
    seed: int = DEFAULT_REFERENCE_SEED

    def __post_init__(self):
        if self.length % STEP or not STEP <= self.length <= MAX_FRAGMENT:
            raise ParameterError(
                f"fragment length must be a multiple of {STEP} in [{STEP}, {MAX_FRAGMENT}], "
                f"got {self.length}"
            )
        if not self.threshold >= 0:
            raise ParameterError(f"threshold must be >= 0, got {self.threshold}")
        if not self.distance >= 0:
            raise ParameterError(f"distance must be >= 0, got {self.distance}")
        if self.fragments < 1:
            raise ParameterError(f"fragment count must be >= 1, got {self.fragments}")
        if not 0 <= self.seed < _U64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def name(self) -> str:
        return "DAA" if self.fragments == 1 else f"{self.fragments}F"

    def min_size(self) -> int:
        """Smallest file that gets the full multi-fragment treatment."""
        if self.fragments == 1:
            return STEP
        return max(3, self.fragments) * self.length


# Best parameters on the attack dataset (DAA_ATTACK, 2F, 3F, 4F) and on the
# original dataset (DAA).
PRESETS = {
    "daa": DetectorParams(152, 40),
    "daa-attack": DetectorParams(48, 14),
    "2f": DetectorParams(48, 12, 54, 2),
    "3f": DetectorParams(48, 10, 48, 3),
    "4f": DetectorParams(48, 14, 56, 4),
}

DETECTOR_KINDS = {"daa": 1, "2f": 2, "3f": 3, "4f": 4}


def preset(kind: str, seed: int = DEFAULT_REFERENCE_SEED) -> DetectorParams:
    try:
        params = PRESETS[kind.lower()]
    except KeyError:
        raise ParameterError(f"unknown detector {kind!r}; choose from {sorted(PRESETS)}") from None
    return replace(params, seed=seed)


class Fallback(str, enum.Enum):
    NONE = "none"
    HEADER_ONLY = "header_only"
    TOO_SMALL = "too_small"


@dataclass(frozen=True)
class Verdict:
    encrypted: bool
    selected_area: float
    fragment_areas: Tuple[Tuple[int, float], ...]
    params_used: DetectorParams
    fallback: Fallback = Fallback.NONE
    length: int = 0  # subfragment length actually analysed

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(start for start, _ in self.fragment_areas)


class RandomSource(Protocol):
    def randint(self, a: int, b: int) -> int: ...


class FragmentRNG:
    """Offset generator keyed by the run seed and a per-file key.

    Draws come from BLAKE2b in counter mode keyed with the seed, so offsets
    are reproducible but cannot be predicted without the seed. Exposes the
    inclusive ``randint(a, b)`` of ``random.Random``.
    """

    __slots__ = ("_key", "_prefix", "_block", "_digest", "_words", "_next")

    def __init__(self, seed: int, key: Union[str, bytes] = b""):
        if not 0 <= seed < _U64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if isinstance(key, str):
            key = key.encode("utf-8", "surrogateescape")
        self._key = seed.to_bytes(8, "little")
        self._prefix = bytes(key)
        self._block = 0
        self._refill()

    def _refill(self) -> None:
        # message = file key || 8-byte block counter; the fixed-width counter keeps it unambiguous
        self._digest = hashlib.blake2b(
            self._prefix + self._block.to_bytes(8, "little"), key=self._key, digest_size=64
        ).digest()
        self._block += 1
        self._words = None  # unpacked on first scalar draw
        self._next = 0

    def _take_block(self, count: int) -> np.ndarray | None:
        """The unused first block as uint64 words, if it holds ``count`` draws; consumes them."""
        if self._block != 1 or self._next != 0 or count > 8:
            return None
        self._next = count
        return np.frombuffer(self._digest, dtype="<u8")

    def random_u64(self) -> int:
        return self.randint(0, _U64 - 1)

    def randint(self, a: int, b: int) -> int:
        if b < a:
            raise ParameterError(f"empty range [{a}, {b}]")
        i = self._next
        if i == 8:
            self._refill()
            i = 0
        if self._words is None:
            self._words = _WORDS8.unpack(self._digest)
        self._next = i + 1
        # multiply-shift mapping; bias is at most span / 2**64
        return a + ((self._words[i] * (b - a + 1)) >> 64)


def fragment_rng(seed: int, key: Union[str, bytes, os.PathLike] = b"") -> FragmentRNG:
    if not isinstance(key, (str, bytes)):
        key = os.fspath(key)
    return FragmentRNG(seed, key)


def read_source(file: Source) -> np.ndarray:
    """Bytes of ``file`` as a uint8 array; paths are read whole."""
    # concrete buffer types first: isinstance against the PathLike ABC is slow
    if isinstance(file, np.ndarray):
        return as_array(file)
    if isinstance(file, str):
        with open(file, "rb") as fh:
            return np.frombuffer(fh.read(), dtype=np.uint8)
    if isinstance(file, (bytes, bytearray, memoryview)):
        return as_array(file)
    return np.frombuffer(Path(file).read_bytes(), dtype=np.uint8)


def _floor8(n: int) -> int:
    return n - n % STEP


def _areas(data: np.ndarray, starts: Sequence[int], length: int, reference: ReferenceFragment) -> np.ndarray:
    return _kernels.fragment_areas(
        data, np.array(starts, dtype=np.int64), length // STEP, _kernels.NLOGN, reference.curve.values
    )


def _too_small(params: DetectorParams) -> Verdict:
    return Verdict(False, float("nan"), (), params, Fallback.TOO_SMALL, 0)


def _header_verdict(data: np.ndarray, params: DetectorParams, reference: ReferenceFragment, fallback: Fallback) -> Verdict:
    length = min(params.length, _floor8(data.size))
    area = float(_areas(data, (0,), length, reference)[0])
    return Verdict(area < params.threshold, area, ((0, area),), params, fallback, length)


def classify_daa(file: Source, params: DetectorParams, reference: ReferenceFragment) -> Verdict:
    """Header-only differential area analysis."""
    if params.fragments != 1:
        raise ParameterError(f"classify_daa needs fragments = 1, got {params.fragments}")
    data = read_source(file)
    if data.size < STEP:
        return _too_small(params)
    return _header_verdict(data, params, reference, Fallback.NONE)


def select_area(header_area: float, other_area: float, distance: float) -> float:
    """Keep the header's area when the other area lies within ``distance`` below it."""
    if header_area > other_area and header_area - distance < other_area:
        return header_area
    return min(header_area, other_area)


def select_mean_area(header_area: float, other_areas: Sequence[float], distance: float) -> float:
    """Header area unless it exceeds the mean of the others by at least ``distance``."""
    avg = sum(other_areas) / len(other_areas)
    if header_area - distance < avg:
        return header_area
    return min(avg, header_area)


def fragment_offsets(size: int, params: DetectorParams, rng: RandomSource) -> list[int]:
    """Start offsets of the header and the extra fragments for a file of ``size`` bytes.

    Assumes ``size >= params.min_size()``.
    """
    o, n = params.length, params.fragments
    randint = rng.randint
    if n == 2:
        return [0, randint(o, size - o - 1)]
    part = size // n
    last = size - o
    starts = [0]
    for k in range(1, n):
        start = randint(k * part, (k + 1) * part)
        starts.append(start if start < last else last)
    return starts


def classify_nf(file: Source, params: DetectorParams, reference: ReferenceFragment, rng: RandomSource) -> Verdict:
    """N-fragment classification (N >= 2)."""
    if params.fragments < 2:
        raise ParameterError(f"classify_nf needs fragments >= 2, got {params.fragments}")
    data = read_source(file)
    if data.size < STEP:
        return _too_small(params)
    if data.size < params.min_size():
        return _header_verdict(data, params, reference, Fallback.HEADER_ONLY)
    words = rng._take_block(params.fragments - 1) if type(rng) is FragmentRNG else None
    if words is not None:
        # compiled draw + areas; identical to fragment_offsets on the same words
        starts, areas = _kernels.multi_fragment_areas(
            data, words, params.fragments, params.length // STEP, _kernels.NLOGN, reference.curve.values
        )
        starts, areas = starts.tolist(), areas.tolist()
    else:
        starts = fragment_offsets(data.size, params, rng)
        areas = _areas(data, starts, params.length, reference).tolist()
    if params.fragments == 2:
        selected = select_area(areas[0], areas[1], params.distance)
    else:
        selected = select_mean_area(areas[0], areas[1:], params.distance)
    return Verdict(
        selected < params.threshold,
        selected,
        tuple(zip(starts, areas)),
        params,
        Fallback.NONE,
        params.length,
    )


def cumulative_areas(
    file: Source, reference: ReferenceFragment, offsets: Sequence[int]
) -> list[list[Tuple[int, float]]]:
    """Differential area over [8, L] for every L = 16, 24, ..., 256, per offset.

    Offsets too close to the end of the file are integrated up to the largest
    multiple of 8 that fits.
    """
    data = read_source(file)
    out = []
    for start in offsets:
        if not 0 <= start <= data.size:
            raise ParameterError(f"offset {start} outside file of size {data.size}")
        npoints = min(MAX_FRAGMENT, _floor8(data.size - start)) // STEP
        if npoints < 2:
            out.append([])
            continue
        cum = _kernels.cumulative_fragment_areas(
            data, start, npoints, _kernels.NLOGN, reference.curve.values
        )
        out.append([(STEP * (k + 1), float(cum[k])) for k in range(1, npoints)])
    return out


@dataclass(frozen=True)
class Detector:
    """Parameters bound to a reference fragment; safe to share between threads."""

    params: DetectorParams
    reference: ReferenceFragment = field(repr=False, default=None)

    def __post_init__(self):
        if self.reference is None:
            object.__setattr__(self, "reference", ReferenceFragment.from_seed(self.params.seed))

    @property
    def name(self) -> str:
        return self.params.name

    def classify(self, file: Source, key: Union[str, bytes, None] = None) -> Verdict:
        """Classify ``file``; ``key`` (default: the path) seeds fragment offsets."""
        if self.params.fragments == 1:
            return classify_daa(file, self.params, self.reference)
        if key is None:
            key = os.fspath(file) if isinstance(file, (str, os.PathLike)) else b""
        return classify_nf(file, self.params, self.reference, fragment_rng(self.params.seed, key))
