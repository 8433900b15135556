"""Byte entropy, incremental entropy curves and differential areas.

Entropy is Shannon entropy over the 256-bin byte histogram, in bits per byte
(so always in [0, 8]). Curves sample the entropy of a fragment's prefixes of
8, 16, ..., L bytes; the differential area integrates the gap between a
pseudo-random reference curve and a file's curve with the composite
trapezoidal rule, giving a signed value in bit-bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from . import _kernels
from .errors import OutOfBoundsError, ParameterError

STEP = _kernels.STEP
MAX_FRAGMENT = _kernels.MAX_CURVE_BYTES
DEFAULT_REFERENCE_SEED = 0

BytesLike = Union[bytes, bytearray, memoryview, np.ndarray]


def as_array(buffer: BytesLike) -> np.ndarray:
    """Zero-copy uint8 view of a bytes-like object."""
    if isinstance(buffer, np.ndarray):
        if buffer.dtype != np.uint8:
            raise ParameterError(f"expected a uint8 array, got {buffer.dtype}")
        return buffer.reshape(-1)
    return np.frombuffer(buffer, dtype=np.uint8)


def _check_range(size: int, offset: int, length: int) -> None:
    if offset < 0 or length < 0 or offset + length > size:
        raise OutOfBoundsError(offset, length, size)


def byte_entropy(buffer: BytesLike, offset: int = 0, length: int | None = None) -> float:
    """Shannon entropy (bits/byte) of ``buffer[offset:offset+length]``."""
    data = as_array(buffer)
    if length is None:
        length = data.size - offset
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    _check_range(data.size, offset, length)
    return float(_kernels.histogram_entropy(data, offset, length))


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    """Entropy sampled at subfragment lengths 8, 16, ..., 8 * len(values)."""

    values: np.ndarray
    step: int = STEP

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ParameterError("an entropy curve needs at least one point")
        if np.any(values < 0.0) or np.any(values > 8.0):
            raise ParameterError("entropy values must lie in [0, 8]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, EntropyCurve):
            return NotImplemented
        return self.step == other.step and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def length(self) -> int:
        """The largest subfragment length L."""
        return self.step * self.values.size

    @property
    def lengths(self) -> np.ndarray:
        return self.step * np.arange(1, self.values.size + 1)

    @property
    def points(self) -> list[Tuple[int, float]]:
        return [(int(x), float(y)) for x, y in zip(self.lengths, self.values)]

    def truncated(self, length: int) -> "EntropyCurve":
        if length % self.step or not self.step <= length <= self.length:
            raise ParameterError(
                f"cannot truncate a curve of length {self.length} to {length}"
            )
        return EntropyCurve(self.values[: length // self.step], self.step)


def _check_fragment_length(fragment_length: int) -> None:
    if fragment_length < STEP or fragment_length % STEP or fragment_length > MAX_FRAGMENT:
        raise ParameterError(
            f"fragment length must be a multiple of {STEP} in [{STEP}, {MAX_FRAGMENT}], "
            f"got {fragment_length}"
        )


def entropy_curve(buffer: BytesLike, offset: int, fragment_length: int) -> EntropyCurve:
    """Entropy of the first 8, 16, ..., fragment_length bytes starting at offset."""
    _check_fragment_length(fragment_length)
    data = as_array(buffer)
    _check_range(data.size, offset, fragment_length)
    values = _kernels.prefix_entropies(data, offset, fragment_length // STEP, _kernels.NLOGN)
    return EntropyCurve(values)


def trapezoid_area(samples: Sequence[Tuple[float, float]], step: float = STEP) -> float:
    """Composite trapezoidal rule over uniformly spaced ``(x, y)`` samples.

    Computes (h/2) * [f(a) + 2 * sum(interior) + f(b)] with h = step. The
    bracket is summed with math.fsum, so a constant y integrates to exactly
    width * y whenever step/2 is a power of two.
    """
    if len(samples) < 2:
        raise ParameterError(f"need at least 2 samples, got {len(samples)}")
    xs = [float(x) for x, _ in samples]
    for x0, x1 in zip(xs, xs[1:]):
        if not math.isclose(x1 - x0, step, rel_tol=0.0, abs_tol=1e-9 * max(1.0, abs(step))):
            raise ParameterError(f"samples must be spaced by {step}, found {x1 - x0}")
    ys = [float(y) for _, y in samples]
    bracket = math.fsum([ys[0], ys[-1]] + [2.0 * y for y in ys[1:-1]])
    return (step / 2.0) * bracket


@dataclass(frozen=True)
class DifferentialArea:
    """Signed area (bit-bytes) between two curves over [step, length]."""

    value: float
    length: int


def differential_area(reference: EntropyCurve, file_curve: EntropyCurve) -> DifferentialArea:
    """Area of (reference - file_curve); positive when the file is less random."""
    if reference.step != file_curve.step or len(reference) != len(file_curve):
        raise ParameterError(
            f"curve mismatch: reference has {len(reference)} points at step {reference.step}, "
            f"file has {len(file_curve)} points at step {file_curve.step}"
        )
    if len(reference) < 2:
        return DifferentialArea(0.0, reference.length)
    diff = reference.values - file_curve.values
    value = trapezoid_area(list(zip(reference.lengths.tolist(), diff.tolist())), reference.step)
    return DifferentialArea(value, reference.length)


@dataclass(frozen=True, eq=False)
class ReferenceFragment:
    """256 seeded pseudo-random bytes and their entropy curve.

    Built once per run and shared by every classification; regenerating with
    the same seed reproduces the bytes exactly.
    """

    seed: int
    data: bytes = field(repr=False)
    curve: EntropyCurve = field(repr=False)

    @classmethod
    def from_seed(cls, seed: int = DEFAULT_REFERENCE_SEED) -> "ReferenceFragment":
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        data = np.random.default_rng(seed).integers(0, 256, MAX_FRAGMENT, dtype=np.uint8).tobytes()
        return cls(seed, data, entropy_curve(data, 0, MAX_FRAGMENT))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ReferenceFragment):
            return NotImplemented
        return self.seed == other.seed and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.seed, self.data))
