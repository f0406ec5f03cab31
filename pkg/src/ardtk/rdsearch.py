"""Seeded search for individual rate-distortion curves.

Three views of the same question, all scored by codec codelength:

  search_min_rate      fewest bits for a destination within distortion delta
  distortion_rate_curve  least distortion reachable at or under a bit budget
  canonical_estimate   fewest bits for a ball (by its center) of log size l

When the feasible destination set is no larger than the evaluation
budget the search enumerates it outright, so small instances are exact
minima rather than estimates.  Otherwise a seeded pool (the input, the
constants, partial moves toward the constants, blockwise majority
smoothings) is refined by bit-flip hill climbing.  Best-so-far score
never increases during a run, and ties break toward the
lexicographically least destination, so a fixed seed fixes the result.

Staircase shapes: g drawn from the family of integer functions on 0..n
with g(n) = 0 and g(l-1) in {g(l), g(l)+1}; estimated curves are checked
against that family up to a slack of c * log2(n) bits.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .bits import BitWord
from .codec import CodecParams, codelength
from .distortion import (
    EUCLID,
    HAMMING,
    LIST,
    Ball,
    DistortionSpec,
    ball_cardinality,
    binary_entropy,
    distance,
    radius_for_log_cardinality,
)

DEFAULT_SLACK_C = 8

Destination = Union[BitWord, "tuple[BitWord, ...]"]


class MissingGridPointError(KeyError):
    """A curve transform needed a level the estimate was not computed at."""


@dataclass(frozen=True)
class Candidate:
    destination: Destination
    score: int
    distortion: Union[Fraction, float]

    def digest(self) -> str:
        w = self.destination
        if isinstance(w, tuple):
            acc = BitWord.zeros(0)
            for m in w:
                acc = acc.concat(m)
            w = acc
        return w.digest()


def make_candidate(x: BitWord, spec: DistortionSpec, destination: Destination,
                   params: Optional[CodecParams] = None) -> Candidate:
    """Score a destination and recompute its distortion from scratch."""
    if isinstance(destination, BitWord):
        score = codelength(destination, params)
        dist = distance(spec, x, destination)
    else:
        members = tuple(sorted(destination))
        score = _list_score(members, params)
        dist = distance(spec, x, members)
        destination = members
    return Candidate(destination=destination, score=score, distortion=dist)


def _list_score(members: "tuple[BitWord, ...]", params) -> int:
    acc = BitWord.zeros(0)
    for m in members:
        acc = acc.concat(m)
    return codelength(acc, params)


@dataclass(frozen=True)
class CurvePoint:
    axis_value: Union[int, Fraction]
    bits: Union[int, float]
    distortion: Union[Fraction, float]
    candidate: Optional[Candidate] = None
    entropy_scale_bits: Optional[int] = None


@dataclass
class CurveEstimate:
    axis: str                      # "rate" | "log_cardinality" | "distortion"
    points: "list[CurvePoint]"
    budget_used: int
    seed: int
    slack_bits: float = 0.0

    def value_at(self, axis_value):
        for p in self.points:
            if p.axis_value == axis_value:
                return p
        raise MissingGridPointError(axis_value)


# ---------------------------------------------------------------------------
# word-destination search (hamming / euclid)

def _project_hamming(x: BitWord, y: BitWord, max_flips: int) -> BitWord:
    """Keep only the lowest max_flips differing bits, so d(x, .) fits."""
    diff = x.value ^ y.value
    if diff.bit_count() <= max_flips:
        return y
    kept = 0
    for _ in range(max_flips):
        low = diff & -diff
        kept |= low
        diff ^= low
    return BitWord(x.n, x.value ^ kept)


def _hamming_pool(x: BitWord, max_flips: int, rng: random.Random) -> "list[BitWord]":
    n = x.n
    pool = [x, BitWord.zeros(n), BitWord.ones(n)]
    ones = [i for i in range(n) if x.bit(i)]
    zeros = [i for i in range(n) if not x.bit(i)]
    for positions in (ones, zeros):
        take = min(len(positions), max_flips)
        head = x
        for i in positions[:take]:
            head = head.flip(i)
        tail = x
        for i in positions[len(positions) - take:]:
            tail = tail.flip(i)
        pool += [head, tail]
        for _ in range(4):
            pick = rng.sample(positions, take) if take else []
            y = x
            for i in pick:
                y = y.flip(i)
            pool.append(y)
    width = 2
    while width <= n:
        v = 0
        for start in range(0, n, width):
            block = [x.bit(i) for i in range(start, min(start + width, n))]
            if sum(block) * 2 > len(block):
                for i in range(start, min(start + width, n)):
                    v |= 1 << (n - 1 - i)
        pool.append(BitWord(n, v))
        width *= 2
    return [_project_hamming(x, y, max_flips) for y in pool]


def _euclid_pool(x: BitWord, lo: int, hi: int, rng: random.Random) -> "list[BitWord]":
    n = x.n
    pool = [x.value, lo, hi]
    # coarsest dyadic grid point inside the feasible interval
    for t in range(n, -1, -1):
        step = 1 << t
        v = (lo + step - 1) // step * step
        if v <= hi:
            pool.append(v)
            break
    pool += [rng.randint(lo, hi) for _ in range(4)]
    return [BitWord(n, v) for v in pool]


def _word_search(
    x: BitWord,
    spec: DistortionSpec,
    delta: Fraction,
    budget: int,
    seed: int,
    params,
    extra_seeds: "Iterable[BitWord]",
    trace: Optional[list],
):
    n = spec.n
    ball = Ball(spec, delta, center=x)
    feasible_count = ball.cardinality()
    evals = 0

    if feasible_count <= budget:
        best = None
        for y in ball.members():
            score = codelength(y, params)
            evals += 1
            if best is None or (score, y.value) < (best.score, best.destination.value):
                best = Candidate(y, score, distance(spec, x, y))
                if trace is not None:
                    trace.append((evals, best.score))
        return best, evals

    rng = random.Random(seed)
    if spec.family == HAMMING:
        max_flips = int(delta * n)
        pool = _hamming_pool(x, max_flips, rng)

        def neighbor(y: BitWord) -> BitWord:
            return _project_hamming(x, y.flip(rng.randrange(n)), max_flips)
    else:
        steps = int(delta * (1 << n))
        lo, hi = max(0, x.value - steps), min((1 << n) - 1, x.value + steps)
        pool = _euclid_pool(x, lo, hi, rng)

        def neighbor(y: BitWord) -> BitWord:
            v = y.value + rng.choice((-1, 1)) * (1 << rng.randrange(n))
            return BitWord(n, min(hi, max(lo, v)))

    for w in extra_seeds:
        if spec.family == HAMMING:
            pool.append(_project_hamming(x, w, int(delta * n)))
        elif distance(spec, x, w) <= delta:
            pool.append(w)

    seen: "dict[int, int]" = {}
    best = None

    def consider(y: BitWord):
        nonlocal best, evals
        if distance(spec, x, y) > delta:
            return
        if y.value not in seen:
            if evals >= budget:
                return
            seen[y.value] = codelength(y, params)
            evals += 1
        score = seen[y.value]
        if best is None or (score, y.value) < (best.score, best.destination.value):
            best = Candidate(y, score, distance(spec, x, y))
            if trace is not None:
                trace.append((evals, best.score))

    for y in pool:
        consider(y)
    while evals < budget:
        before = evals
        consider(neighbor(best.destination))
        if evals == before and rng.random() < 0.05:
            # stuck on revisits; hop to a fresh random feasible point
            consider(neighbor(pool[rng.randrange(len(pool))]))
            if evals == before:
                break
    return best, evals


def _list_search(
    x: BitWord,
    spec: DistortionSpec,
    delta: Fraction,
    budget: int,
    params,
    trace: Optional[list],
):
    """Lists containing x, no larger than 2^delta, in fixed sorted order.

    Candidates are the singleton and the suffix cylinders around x (all
    words sharing a prefix with x): their sorted concatenation is highly
    regular, so codelength falls as the allowed size grows.
    """
    n = spec.n
    best = None
    evals = 0
    for t in range(0, n + 1):
        if t > delta or evals >= budget:
            break
        prefix = x.value >> t << t
        members = tuple(BitWord(n, prefix | s) for s in range(1 << t))
        cand = make_candidate(x, spec, members, params)
        evals += 1
        if best is None or (cand.score, cand.destination) < (best.score, best.destination):
            best = cand
            if trace is not None:
                trace.append((evals, best.score))
    return best, evals


def search_min_rate(
    x: BitWord,
    spec: DistortionSpec,
    delta: Fraction,
    budget: int,
    seed: int,
    params: Optional[CodecParams] = None,
    extra_seeds: "Iterable[BitWord]" = (),
    trace: Optional[list] = None,
) -> Candidate:
    """Best-found destination within distortion delta of x.

    budget counts distinct codelength evaluations.  x itself is always
    feasible, so the search is total.  When the whole feasible set fits
    in the budget the result is its exact minimum (ties to the
    lexicographically least destination).
    """
    delta = Fraction(delta)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if spec.family == LIST:
        best, _ = _list_search(x, spec, delta, budget, params, trace)
    else:
        best, _ = _word_search(x, spec, delta, budget, seed, params, extra_seeds, trace)
    return best


def _child_seed(seed: int, salt: int) -> int:
    return (seed * 1_000_003 + salt) & 0x7FFFFFFF


def _level_grid(spec: DistortionSpec) -> "list[Fraction]":
    if spec.family == HAMMING:
        return [Fraction(i, spec.n) for i in range(spec.n // 2 + 1)]
    if spec.family == EUCLID:
        return [Fraction(0)] + [Fraction(1, 1 << j) for j in range(spec.n + 1, 0, -1)]
    return [Fraction(l) for l in range(spec.n + 1)]


def distortion_rate_curve(
    x: BitWord,
    spec: DistortionSpec,
    rate_grid: "Optional[Sequence[int]]",
    budget: int,
    seed: int,
    params: Optional[CodecParams] = None,
    extra_seeds: "Iterable[BitWord]" = (),
    levels: "Optional[Sequence[Fraction]]" = None,
) -> CurveEstimate:
    """Least observed distortion at each bit budget in rate_grid.

    budget is the per-level search allowance; the candidate pool is
    shared across levels, so each rate sees every evaluation made.
    rate_grid None reports the curve's own corners instead: the distinct
    rates where the running distortion minimum improves.  levels
    restricts the searched distortion levels (default: every admissible
    radius), useful when n is large and the full sweep would be slow.
    """
    if rate_grid is not None and list(rate_grid) != sorted(rate_grid):
        raise ValueError("rate_grid must be sorted")
    if levels is None:
        search_levels = _level_grid(spec)
    else:
        search_levels = [Fraction(l) for l in levels]
    extra_seeds = tuple(extra_seeds)
    pool: "dict" = {}
    used = 0
    for i, level in enumerate(search_levels):
        trace: list = []
        cand = search_min_rate(
            x, spec, level, budget, _child_seed(seed, i), params,
            extra_seeds=extra_seeds, trace=trace,
        )
        used += trace[-1][0] if trace else 0
        key = cand.digest()
        if key not in pool or cand.score < pool[key].score:
            pool[key] = cand
    found = sorted(pool.values(), key=lambda c: (c.score, c.digest()))
    points = []
    best_d = math.inf
    best_c = None
    if rate_grid is None:
        for c in found:
            if c.distortion < best_d:
                best_d, best_c = c.distortion, c
                points.append(
                    CurvePoint(
                        axis_value=c.score, bits=c.score,
                        distortion=c.distortion, candidate=c,
                    )
                )
    else:
        idx = 0
        for r in rate_grid:
            while idx < len(found) and found[idx].score <= r:
                c = found[idx]
                if c.distortion < best_d:
                    best_d, best_c = c.distortion, c
                idx += 1
            points.append(
                CurvePoint(axis_value=r, bits=r, distortion=best_d, candidate=best_c)
            )
    return CurveEstimate(axis="rate", points=points, budget_used=used, seed=seed)


def canonical_estimate(
    x: BitWord,
    spec: DistortionSpec,
    l_grid: "Sequence[int]",
    budget: int,
    seed: int,
    params: Optional[CodecParams] = None,
    slack_c: int = DEFAULT_SLACK_C,
) -> CurveEstimate:
    """Estimated bits needed for a radius ball of log-cardinality <= l
    containing x, scored by its center's codelength, for each l in
    l_grid.  budget is per grid level."""
    n = spec.n
    if any(not 0 <= l <= n for l in l_grid):
        raise ValueError("l_grid entries must lie in 0..n")
    if list(l_grid) != sorted(l_grid):
        raise ValueError("l_grid must be sorted")
    points = []
    used = 0
    best_bits = math.inf
    best_cand = None
    for l in l_grid:
        delta = radius_for_log_cardinality(spec, l)
        trace: list = []
        cand = search_min_rate(
            x, spec, delta, budget, _child_seed(seed, l), params, trace=trace
        )
        used += trace[-1][0] if trace else 0
        if cand.score < best_bits:
            best_bits, best_cand = cand.score, cand
        points.append(
            CurvePoint(
                axis_value=l,
                bits=best_bits,
                distortion=best_cand.distortion,
                candidate=best_cand,
            )
        )
    slack = slack_c * math.log2(n) if n >= 2 else float(slack_c)
    return CurveEstimate(
        axis="log_cardinality",
        points=points,
        budget_used=used,
        seed=seed,
        slack_bits=slack,
    )


def transform_rate_distortion(
    ghat: CurveEstimate,
    spec: DistortionSpec,
    deltas: "Optional[Sequence[Fraction]]" = None,
) -> CurveEstimate:
    """Rate-distortion view of a canonical estimate: at distortion delta
    read off ghat at level ceil(log2 of the delta-ball cardinality).

    For the hamming family each point also reports the entropy-scale
    reading at level round(n * H(delta)) when that level is on the grid.
    """
    if ghat.axis != "log_cardinality":
        raise ValueError("expected a log-cardinality curve")
    n = spec.n
    table = {p.axis_value: p for p in ghat.points}
    if deltas is None:
        if spec.family == HAMMING:
            deltas = [Fraction(i, n) for i in range(n // 2 + 1)]
        elif spec.family == LIST:
            deltas = [Fraction(l) for l in range(n + 1)]
        elif n <= 8:
            deltas = [Fraction(i, 1 << n) for i in range((1 << n) // 2 + 1)]
        else:
            raise ValueError("pass explicit deltas for wide euclid words")
    points = []
    best = math.inf
    for d in sorted(deltas):
        b = ball_cardinality(spec, d)
        l = (b - 1).bit_length()
        if l not in table:
            raise MissingGridPointError(l)
        entry = table[l]
        best = min(best, entry.bits)
        extra = None
        if spec.family == HAMMING:
            lh = round(n * binary_entropy(float(d)))
            if lh in table:
                extra = table[lh].bits
        points.append(
            CurvePoint(
                axis_value=d,
                bits=best,
                distortion=d,
                candidate=entry.candidate,
                entropy_scale_bits=extra,
            )
        )
    return CurveEstimate(
        axis="distortion",
        points=points,
        budget_used=ghat.budget_used,
        seed=ghat.seed,
        slack_bits=ghat.slack_bits,
    )


# ---------------------------------------------------------------------------
# staircase shapes

@dataclass(frozen=True)
class ShapeFn:
    values: "tuple[int, ...]"      # g(0), g(1), ..., g(n)

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def __call__(self, l: int) -> int:
        return self.values[l]


def shape_generate(n: int, k: int, seed: int) -> ShapeFn:
    """Uniformly random shape with g(0) = k: pick which k of the n unit
    steps decrement."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    rng = random.Random(seed)
    drops = set(rng.sample(range(1, n + 1), k))
    values = [0] * (n + 1)
    for l in range(n, 0, -1):
        values[l - 1] = values[l] + (1 if l in drops else 0)
    return ShapeFn(tuple(values))


def shape_validate(g, n: Optional[int] = None):
    """Check membership in the shape family; returns (ok, first bad l)."""
    values = g.values if isinstance(g, ShapeFn) else tuple(g)
    if n is not None and len(values) != n + 1:
        return False, len(values) - 1
    if not values or values[-1] != 0:
        return False, len(values) - 1
    for l in range(len(values) - 1, 0, -1):
        if values[l - 1] not in (values[l], values[l] + 1):
            return False, l
    if any(v < 0 for v in values):
        return False, min(i for i, v in enumerate(values) if v < 0)
    return True, None


def nearest_staircase(values: "Sequence[float]") -> ShapeFn:
    """Round an estimated curve into the shape family, bottom up:
    g(n) = 0 and g(l-1) = g(l) + 1 exactly when g(l) falls short of the
    estimate at l-1."""
    n = len(values) - 1
    g = [0] * (n + 1)
    for l in range(n, 0, -1):
        g[l - 1] = g[l] + (1 if g[l] < values[l - 1] else 0)
    return ShapeFn(tuple(g))


@dataclass
class ShapeBoundsReport:
    ok: bool
    slack_bits: float
    violations: "list[tuple[int, int, float]]"   # (l, m, excess)
    tail_ok: bool
    staircase: ShapeFn
    max_staircase_gap: float


def shape_bounds_check(
    ghat: CurveEstimate, n: int, slack_c: int = DEFAULT_SLACK_C
) -> ShapeBoundsReport:
    """Slow-decay audit of an estimated curve: over all grid pairs l <= m
    require -s <= ghat(l) - ghat(m) <= (m - l) + s with s = c log2 n,
    plus ghat(n) <= s, plus closeness to a true staircase shape."""
    s = slack_c * math.log2(n) if n >= 2 else float(slack_c)
    pts = {p.axis_value: p.bits for p in ghat.points}
    levels = sorted(pts)
    violations = []
    for i, l in enumerate(levels):
        for m in levels[i:]:
            diff = pts[l] - pts[m]
            if diff < -s:
                violations.append((l, m, float(-s - diff)))
            elif diff > (m - l) + s:
                violations.append((l, m, float(diff - (m - l) - s)))
    tail_ok = (n not in pts) or pts[n] <= s
    dense = [pts.get(l) for l in range(n + 1)]
    if all(v is not None for v in dense):
        stair = nearest_staircase(dense)
        gap = max(abs(stair(l) - dense[l]) for l in range(n + 1))
    else:
        stair = nearest_staircase([pts[l] for l in levels])
        gap = max(
            abs(stair(i) - pts[l]) for i, l in enumerate(levels)
        )
    return ShapeBoundsReport(
        ok=not violations and tail_ok,
        slack_bits=s,
        violations=violations,
        tail_ok=tail_ok,
        staircase=stair,
        max_staircase_gap=float(gap),
    )
