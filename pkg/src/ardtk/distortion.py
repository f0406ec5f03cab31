"""Distortion families over fixed-length binary words.

Three families are supported:

    hamming    d(x, y) = |{i : x_i != y_i}| / n, radius 0..1/2
    euclid     words read as binary fractions in [0, 1); d(x, y) = |x - y|
    list       destinations are finite sets S of words containing x;
               d(x, S) = log2 |S|

Distances are exact rationals (fractions.Fraction) whenever the value is
rational; the list family returns a float for non-power-of-two sizes,
since log2 |S| has no exact rational form there.  Mismatched lengths and
non-membership give infinite distortion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, inf, log2
from typing import Iterable, Optional, Sequence

from .bits import BitWord

HAMMING = "hamming"
EUCLID = "euclid"
LIST = "list"

_FAMILIES = (HAMMING, EUCLID, LIST)

# enumeration guard: hard cap on how many members we will materialize
MEMBER_ENUM_MAX_COUNT = 1 << 22


class SizeGuardError(ValueError):
    """Raised when a ball is too large to enumerate explicitly."""


@dataclass(frozen=True)
class DistortionSpec:
    family: str
    n: int

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise ValueError("word length must be positive")


def _check_radius(spec: DistortionSpec, delta: Fraction):
    if spec.family == HAMMING:
        if not 0 <= delta <= Fraction(1, 2):
            raise ValueError("hamming radius must lie in [0, 1/2]")
    elif spec.family == EUCLID:
        if not 0 <= delta <= 1:
            raise ValueError("euclid radius must lie in [0, 1]")
    else:
        if delta < 0:
            raise ValueError("list radius must be nonnegative")


def distance(spec: DistortionSpec, x: BitWord, y):
    """Exact distortion between x and destination y (word or word set)."""
    if spec.family == LIST:
        members = list(y)
        if x not in members:
            return inf
        size = len(members)
        if size & (size - 1) == 0:
            return Fraction(size.bit_length() - 1)
        return log2(size)
    if not isinstance(y, BitWord) or x.n != y.n or x.n != spec.n:
        return inf
    if spec.family == HAMMING:
        return Fraction(x.hamming(y), spec.n)
    return Fraction(abs(x.value - y.value), 1 << spec.n)


def ball_cardinality(spec: DistortionSpec, delta: Fraction) -> int:
    """Number of words in a ball of radius delta around an interior center.

    Hamming balls have center-independent cardinality; euclid balls match
    this count except when the interval clamps at 0 or 1.
    """
    delta = Fraction(delta)
    _check_radius(spec, delta)
    n = spec.n
    if spec.family == HAMMING:
        r = int(delta * n)  # radius floor: only whole bit flips count
        return sum(comb(n, i) for i in range(r + 1))
    if spec.family == EUCLID:
        steps = int(delta * (1 << n))
        return min(2 * steps + 1, 1 << n)
    if delta != int(delta):
        raise ValueError("list radius must be an integer log-cardinality")
    return 1 << int(delta)


def binary_entropy(p: float) -> float:
    """H(p) in bits; H(0) = H(1) = 0."""
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError("probability must lie in [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * log2(p) - (1 - p) * log2(1 - p)


def entropy_bounds(n: int, delta: Fraction) -> "tuple[float, float]":
    """Lower/upper bounds on log2 of the Hamming ball cardinality."""
    if not 0 <= delta <= Fraction(1, 2):
        raise ValueError("delta must lie in [0, 1/2]")
    h = binary_entropy(float(delta))
    upper = n * h
    lower = n * h - log2(n) / 2 - 1
    return lower, upper


def _ball_value_range(spec: DistortionSpec, center: BitWord, delta: Fraction):
    """Clamped [lo, hi] integer grid range of a euclid ball."""
    steps = int(delta * (1 << spec.n))
    lo = max(0, center.value - steps)
    hi = min((1 << spec.n) - 1, center.value + steps)
    return lo, hi


@dataclass(frozen=True)
class Ball:
    """A destination ball: center and radius, or an explicit member list.

    For the list family either an explicit (sorted) member tuple or the
    implicit full cube {0,1}^n is stored; the full cube never needs
    enumeration because its log-cardinality is exactly n.
    """

    spec: DistortionSpec
    radius: Fraction
    center: Optional[BitWord] = None
    list_members: Optional[tuple] = None
    full_cube: bool = False

    def __post_init__(self):
        _check_radius(self.spec, self.radius)
        if self.spec.family == LIST:
            if self.full_cube:
                if self.radius != self.spec.n:
                    raise ValueError("full cube radius must equal n")
            elif self.list_members is None:
                raise ValueError("list ball needs members")
        else:
            if self.center is None or self.center.n != self.spec.n:
                raise ValueError("center must match the word length")

    def cardinality(self) -> int:
        if self.spec.family == HAMMING:
            return ball_cardinality(self.spec, self.radius)
        if self.spec.family == EUCLID:
            lo, hi = _ball_value_range(self.spec, self.center, self.radius)
            return hi - lo + 1
        if self.full_cube:
            return 1 << self.spec.n
        return len(self.list_members)

    def log_cardinality(self) -> float:
        if self.spec.family == LIST and self.full_cube:
            return float(self.spec.n)
        return log2(self.cardinality())

    def contains(self, x: BitWord) -> bool:
        if self.spec.family == LIST:
            if self.full_cube:
                return x.n == self.spec.n
            return x in self.list_members
        return distance(self.spec, x, self.center) <= self.radius

    def descriptor(self) -> BitWord:
        """Canonical description of the ball as a bit word.

        hamming: center bits followed by LEB128 of the flip-count radius.
        euclid:  center bits followed by LEB128 of the grid-step radius.
        list:    concatenation of the members in lexicographic order
                 (full cube: LEB128 of n alone).
        """
        if self.spec.family == LIST:
            if self.full_cube:
                return _leb_word(self.spec.n)
            out = BitWord.zeros(0)
            for m in sorted(self.list_members):
                out = out.concat(m)
            return out
        if self.spec.family == HAMMING:
            r = int(self.radius * self.spec.n)
        else:
            r = int(self.radius * (1 << self.spec.n))
        return self.center.concat(_leb_word(r))

    def members(self) -> "list[BitWord]":
        """All members in lexicographic order (guarded against explosion)."""
        spec = self.spec
        if spec.family == LIST:
            if self.full_cube:
                if spec.n > MEMBER_ENUM_MAX_COUNT.bit_length() - 1:
                    raise SizeGuardError("cube too large to enumerate")
                return [BitWord(spec.n, v) for v in range(1 << spec.n)]
            return sorted(self.list_members)
        if self.cardinality() > MEMBER_ENUM_MAX_COUNT:
            raise SizeGuardError("ball too large to enumerate")
        if spec.family == EUCLID:
            lo, hi = _ball_value_range(spec, self.center, self.radius)
            return [BitWord(spec.n, v) for v in range(lo, hi + 1)]
        n = spec.n
        r = int(self.radius * n)
        values = []
        base = self.center.value
        for k in range(r + 1):
            for flips in itertools.combinations(range(n), k):
                mask = 0
                for i in flips:
                    mask |= 1 << (n - 1 - i)
                values.append(base ^ mask)
        values.sort()
        return [BitWord(n, v) for v in values]


def _leb_word(n: int) -> BitWord:
    groups = []
    while True:
        g = n & 0x7F
        n >>= 7
        groups.append(g | (0x80 if n else 0))
        if not n:
            break
    return BitWord.from_bytes(bytes(groups), 8 * len(groups))


def hamming_ball(center: BitWord, delta: Fraction) -> Ball:
    spec = DistortionSpec(HAMMING, center.n)
    return Ball(spec, Fraction(delta), center=center)


def euclid_ball(center: BitWord, delta: Fraction) -> Ball:
    spec = DistortionSpec(EUCLID, center.n)
    return Ball(spec, Fraction(delta), center=center)


def list_ball(members: Iterable[BitWord]) -> Ball:
    members = tuple(sorted(set(members)))
    if not members:
        raise ValueError("list ball needs at least one member")
    n = members[0].n
    if any(m.n != n for m in members):
        raise ValueError("members must share one length")
    size = len(members)
    radius = (
        Fraction(size.bit_length() - 1)
        if size & (size - 1) == 0
        else Fraction(log2(size))
    )
    return Ball(DistortionSpec(LIST, n), radius, list_members=members)


def full_cube(n: int) -> Ball:
    return Ball(DistortionSpec(LIST, n), Fraction(n), full_cube=True)


def ball_members(spec: DistortionSpec, center: BitWord, delta: Fraction):
    return Ball(spec, Fraction(delta), center=center).members()


def admissible_radii(spec: DistortionSpec) -> "list[Fraction]":
    """The radius grid on which ball sizes actually change."""
    n = spec.n
    if spec.family == HAMMING:
        return [Fraction(i, n) for i in range(n // 2 + 1)]
    if spec.family == EUCLID:
        return [Fraction(i, 1 << n) for i in range((1 << n) + 1)]
    return [Fraction(l) for l in range(n + 1)]


def radius_for_log_cardinality(spec: DistortionSpec, l: int) -> Fraction:
    """Smallest admissible radius whose ball has ceil(log2 size) >= l.

    For the hamming family at odd n the largest admissible radius covers
    exactly half the cube, so l = n is unreachable; the largest radius is
    returned in that case.
    """
    if l < 0 or l > spec.n:
        raise ValueError("level must lie in [0, n]")
    if spec.family == LIST:
        return Fraction(l)
    if spec.family == EUCLID:
        if l == 0:
            return Fraction(0)
        # smallest step count i with 2i + 1 > 2^(l-1)
        i = 1 if l == 1 else 1 << (l - 2)
        return Fraction(i, 1 << spec.n)
    n = spec.n
    for i in range(n // 2 + 1):
        b = sum(comb(n, j) for j in range(i + 1))
        if (b - 1).bit_length() >= l:
            return Fraction(i, n)
    return Fraction(n // 2, n)
