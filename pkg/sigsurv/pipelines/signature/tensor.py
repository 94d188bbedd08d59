"""
Truncated tensor algebra over R^d.

A truncated signature is stored as one flat vector, level by level, with the words of
each level in lexicographic order: ``(), (0), ..., (d-1), (0,0), (0,1), ...``. A level-k
block is the C-order flattening of a d^k tensor, so ``np.multiply.outer(a, b).ravel()``
of two level blocks is already laid out in this order.
"""

import itertools
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Literal

import numpy as np

from sigsurv.common.exceptions import SignatureError

logger = logging.getLogger(__name__)

INT64_MAX = 2**63 - 1

TimeScale = Literal["unit_interval", "days"]


def count_coefficients(d: int, level: int) -> int:
    """
    Number of coefficients of a signature truncated at ``level``, level 0 included.

    ``(d^(L+1) - 1) / (d - 1)``, evaluated in exact integer arithmetic.

    Raises:
        ValueError: If ``d < 2`` or ``level < 1``.
        OverflowError: If the count does not fit in a signed 64-bit integer.
    """
    if d < 2 or level < 1:
        raise ValueError(f"count_coefficients needs d >= 2 and level >= 1, got d={d}, level={level}")
    count = (d ** (level + 1) - 1) // (d - 1)
    if count > INT64_MAX:
        raise OverflowError(f"{count} coefficients for d={d}, level={level} exceed the 64-bit integer range")
    return count


def level_offsets(d: int, level: int) -> list[int]:
    """Start index of each level block in the flat layout, plus the total length."""
    offsets = [0]
    for k in range(level + 1):
        offsets.append(offsets[-1] + d**k)
    return offsets


def words(d: int, level: int, include_empty: bool = True) -> Iterator[tuple[int, ...]]:
    """Index words in flat-layout order."""
    for k in range(0 if include_empty else 1, level + 1):
        yield from itertools.product(range(d), repeat=k)


@dataclass(frozen=True)
class SignatureTensor:
    """Element of the truncated tensor algebra with the flat level-major layout."""

    d: int
    level: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float)
        expected = level_offsets(self.d, self.level)[-1]
        if coeffs.shape != (expected,):
            raise SignatureError(f"coefficient vector has shape {coeffs.shape}, expected ({expected},) "
                                 f"for d={self.d}, level={self.level}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_levels(cls, d: int, levels: list[np.ndarray]) -> "SignatureTensor":
        return cls(d=d, level=len(levels) - 1, coeffs=np.concatenate([np.ravel(block) for block in levels]))

    @classmethod
    def trivial(cls, d: int, level: int) -> "SignatureTensor":
        coeffs = np.zeros(level_offsets(d, level)[-1])
        coeffs[0] = 1.0
        return cls(d=d, level=level, coeffs=coeffs)

    def levels(self) -> list[np.ndarray]:
        """Flat block of each level, level 0 first."""
        offsets = level_offsets(self.d, self.level)
        return [self.coeffs[offsets[k]:offsets[k + 1]] for k in range(self.level + 1)]

    def block(self, k: int) -> np.ndarray:
        """Level-k block reshaped to a d^k tensor."""
        return self.levels()[k].reshape((self.d,) * k)

    def __getitem__(self, word: tuple[int, ...]) -> float:
        if len(word) > self.level:
            raise KeyError(f"word {word} is beyond truncation level {self.level}")
        return float(self.block(len(word))[word]) if word else float(self.coeffs[0])


def segment_signature(delta: np.ndarray, level: int) -> SignatureTensor:
    """
    Signature of the straight segment with increment ``delta``: the truncated tensor
    exponential, whose level-k block is ``delta^(⊗k) / k!``.
    """
    delta = np.asarray(delta, dtype=float)
    blocks = [np.ones(1)]
    for k in range(1, level + 1):
        blocks.append(np.multiply.outer(blocks[-1], delta).ravel() / k)
    return SignatureTensor.from_levels(delta.shape[0], blocks)


def _product_levels(left: list[np.ndarray], right: list[np.ndarray]) -> list[np.ndarray]:
    level = len(left) - 1
    out = []
    for k in range(level + 1):
        block = left[k] * right[0][0] if k else left[0] * right[0]
        for a in range(k):
            block = block + np.multiply.outer(left[a], right[k - a]).ravel()
        out.append(block)
    return out


def chen_product(first: SignatureTensor, second: SignatureTensor) -> SignatureTensor:
    """
    Truncated tensor product; the signature of a concatenated path is the product of the
    signatures of its pieces.

    Raises:
        SignatureError: If the two tensors differ in ``d`` or ``level``.
    """
    if (first.d, first.level) != (second.d, second.level):
        raise SignatureError(f"shape mismatch: (d={first.d}, level={first.level}) vs "
                             f"(d={second.d}, level={second.level})")
    return SignatureTensor.from_levels(first.d, _product_levels(first.levels(), second.levels()))


@dataclass(frozen=True)
class AugmentedPath:
    """
    Piecewise-linear path with the time coordinate as channel 0.

    Attributes:
        times (np.ndarray): Strictly increasing knot times, shape (N,), N >= 2.
        points (np.ndarray): Knot values, shape (N, d); ``points[:, 0] == times``.
    """

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        points = np.array(self.points, dtype=float)
        if times.ndim != 1 or times.shape[0] < 2:
            raise SignatureError(f"a path needs at least 2 knots, got {times.shape[0] if times.ndim else 0}")
        if points.ndim != 2 or points.shape[0] != times.shape[0]:
            raise SignatureError(f"points must have shape ({times.shape[0]}, d), got {points.shape}")
        if np.any(np.diff(times) <= 0):
            raise SignatureError("path times must be strictly increasing")
        if not np.array_equal(points[:, 0], times):
            raise SignatureError("channel 0 must equal the path times")
        times.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @property
    def d(self) -> int:
        return int(self.points.shape[1])


def augment_path(
    times: np.ndarray,
    values: np.ndarray,
    time_scale: TimeScale = "unit_interval",
    single_report_epsilon: float = 1e-3,
) -> AugmentedPath:
    """
    Prepend a monotone time channel to a timestamped series.

    A lone report is duplicated at ``t`` and ``t + single_report_epsilon`` (in days),
    giving a path that only moves along the time channel.

    Args:
        times (np.ndarray): Strictly increasing report times in days, shape (N,).
        values (np.ndarray): Report coordinates, shape (N, p_bar).
        time_scale (str): ``unit_interval`` maps times affinely onto [0, 1]; ``days`` keeps them.
        single_report_epsilon (float): Time offset used to duplicate a lone report.

    Returns:
        AugmentedPath: Path with ``d = p_bar + 1`` channels.

    Raises:
        SignatureError: If the series is empty or shapes disagree.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != times.shape[0]:
        raise SignatureError(f"values must have shape ({times.shape[0]}, p_bar), got {values.shape}")
    if times.shape[0] == 0:
        raise SignatureError("cannot build a path from zero reports")
    if times.shape[0] == 1:
        times = np.array([times[0], times[0] + single_report_epsilon])
        values = np.vstack([values, values])

    if time_scale == "unit_interval":
        times = (times - times[0]) / (times[-1] - times[0])
    elif time_scale != "days":
        raise ValueError(f"unknown time_scale '{time_scale}'")

    return AugmentedPath(times=times, points=np.column_stack([times, values]))


def path_signature(path: AugmentedPath, level: int) -> SignatureTensor:
    """
    Truncated signature of a piecewise-linear path.

    Folds the segment exponentials of consecutive increments from the left with the tensor
    product, which is exact for piecewise-linear paths.
    """
    if level < 1:
        raise ValueError(f"level must be positive, got {level}")

    increments = np.diff(path.points, axis=0)
    levels = segment_signature(increments[0], level).levels()
    for delta in increments[1:]:
        levels = _product_levels(levels, segment_signature(delta, level).levels())
    return SignatureTensor.from_levels(path.d, levels)
