"""Estimands, the topologies they induce on a model family, Kolmogorov
quotients and homeomorphism search between quotients.

Finite topologies are kept as a set of open sets over ``range(n)``. Opens are
bitmasks internally; the public views are frozensets.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvariantError, NonMeasurableEvent, SearchBoundExceeded
from .measure import ZERO, RationalMeasure, SigmaAlgebra
from .morphisms import FiniteModel

DEFAULT_SEARCH_BOUND = 8
KINDS = ("likelihood", "event_probability", "moment")


@dataclass(frozen=True)
class Estimand:
    """A permutation-symmetric evaluation of a distribution on n events.

    ``moment`` sums weight * mass over each event and adds the n results.
    """

    kind: str
    sample_length: int = 1
    weights: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimand kind {self.kind!r}")
        if self.sample_length < 1:
            raise ValueError("sample length must be at least 1")
        if self.kind == "event_probability" and self.sample_length != 1:
            raise ValueError("event_probability takes exactly one event")
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))

    @classmethod
    def likelihood(cls, n: int = 1) -> "Estimand":
        return cls("likelihood", n)

    @classmethod
    def event_probability(cls) -> "Estimand":
        return cls("event_probability", 1)

    @classmethod
    def moment(cls, weights: Sequence, n: int = 1) -> "Estimand":
        return cls("moment", n, tuple(weights))


def evaluate_estimand(
    e: Estimand, p: RationalMeasure, events: Sequence[Iterable[int]], sigma: SigmaAlgebra | None = None
) -> Fraction:
    events = [frozenset(ev) for ev in events]
    if len(events) != e.sample_length:
        raise ValueError(f"expected {e.sample_length} events, got {len(events)}")
    sigma = sigma or SigmaAlgebra.power_set(p.space)
    for ev in events:
        if not sigma.is_measurable(ev):
            raise NonMeasurableEvent(f"event {sorted(ev)} is not a union of atoms")
    if e.kind == "moment":
        if len(e.weights) != len(p.space):
            raise ValueError("moment weights must have one entry per point")
        return sum((e.weights[i] * p.mass[i] for ev in events for i in ev), ZERO)
    value = Fraction(1)
    for ev in events:
        value *= p(ev)
    return value


def estimand_pseudometric(e: Estimand, model: FiniteModel) -> tuple[tuple[Fraction, ...], ...]:
    """d(P, Q) = sum over atom n-tuples of |e_P - e_Q| times the reference
    product mass of the tuple."""
    blocks = model.sigma.blocks
    ref = model.reference
    tuples = []
    for combo in itertools.product(range(len(blocks)), repeat=e.sample_length):
        w = Fraction(1)
        for k in combo:
            w *= ref(blocks[k])
        if w:
            tuples.append(([blocks[k] for k in combo], w))
    values = [
        [evaluate_estimand(e, p, events, model.sigma) for events, _ in tuples] for p in model.family
    ]
    n = len(model)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(sum((abs(a - b) * w for a, b, (_, w) in zip(values[i], values[j], tuples)), ZERO))
        rows.append(tuple(row))
    return tuple(rows)


def _mask(s: Iterable[int]) -> int:
    m = 0
    for i in s:
        m |= 1 << i
    return m


def _members(m: int) -> frozenset[int]:
    return frozenset(i for i in range(m.bit_length()) if m >> i & 1)


@dataclass(frozen=True)
class FiniteTopology:
    n: int
    masks: frozenset[int] = field(repr=False)

    def __post_init__(self):
        masks = frozenset(self.masks)
        full = (1 << self.n) - 1
        if 0 not in masks or full not in masks:
            raise InvariantError("a topology contains the empty set and the ground set")
        for m in masks:
            if m & ~full:
                raise InvariantError("open set leaves the ground set")
        for a, b in itertools.combinations(masks, 2):
            if a | b not in masks or a & b not in masks:
                raise InvariantError("open sets are not closed under union and intersection")
        object.__setattr__(self, "masks", masks)

    @classmethod
    def from_opens(cls, n: int, opens: Iterable[Iterable[int]]) -> "FiniteTopology":
        return cls(n, frozenset(_mask(u) for u in opens))

    @classmethod
    def from_subbase(cls, n: int, subbase: Iterable[Iterable[int]]) -> "FiniteTopology":
        full = (1 << n) - 1
        sub = [_mask(s) for s in subbase]
        base = []
        for x in range(n):
            u = full
            for s in sub:
                if s >> x & 1:
                    u &= s
            base.append(u)
        return cls(n, _unions(base))

    @classmethod
    def discrete(cls, n: int) -> "FiniteTopology":
        return cls.from_subbase(n, [{i} for i in range(n)])

    @classmethod
    def indiscrete(cls, n: int) -> "FiniteTopology":
        return cls(n, frozenset({0, (1 << n) - 1}))

    @property
    def ground(self) -> frozenset[int]:
        return frozenset(range(self.n))

    @property
    def opens(self) -> tuple[frozenset[int], ...]:
        return tuple(_members(m) for m in sorted(self.masks, key=lambda m: (bin(m).count("1"), m)))

    def is_open(self, s: Iterable[int]) -> bool:
        return _mask(s) in self.masks

    def minimal_open(self, x: int) -> int:
        u = (1 << self.n) - 1
        for m in self.masks:
            if m >> x & 1:
                u &= m
        return u

    def minimal_base(self) -> tuple[frozenset[int], ...]:
        return tuple(_members(self.minimal_open(x)) for x in range(self.n))

    def indistinguishable(self, i: int, j: int) -> bool:
        return all((m >> i & 1) == (m >> j & 1) for m in self.masks)

    def is_t0(self) -> bool:
        return all(not self.indistinguishable(i, j) for i, j in itertools.combinations(range(self.n), 2))

    def __len__(self):
        return len(self.masks)


def _unions(base: Iterable[int]) -> frozenset[int]:
    opens = {0}
    for b in set(base):
        opens |= {o | b for o in opens}
    return frozenset(opens)


def _check_pseudometric(dist):
    n = len(dist)
    if any(len(row) != n for row in dist):
        raise InvariantError("distance matrix must be square")
    for i in range(n):
        if dist[i][i] != 0:
            raise InvariantError(f"diagonal entry {i} is not zero")
        for j in range(n):
            if dist[i][j] < 0:
                raise InvariantError(f"entry ({i},{j}) is negative")
            if dist[i][j] != dist[j][i]:
                raise InvariantError(f"entries ({i},{j}) and ({j},{i}) differ")
    for i, j, k in itertools.product(range(n), repeat=3):
        if dist[i][k] > dist[i][j] + dist[j][k]:
            raise InvariantError(f"triangle inequality fails at ({i},{j},{k})")


def coarsest_topology(dist: Sequence[Sequence]) -> FiniteTopology:
    """Topology generated by the balls {j : d(i,j) < r}, r ranging over the
    entries of the matrix."""
    dist = [[Fraction(v) for v in row] for row in dist]
    _check_pseudometric(dist)
    n = len(dist)
    radii = sorted({v for row in dist for v in row if v > 0})
    balls = [{j for j in range(n) if dist[i][j] < r} for i in range(n) for r in radii]
    return FiniteTopology.from_subbase(n, balls)


def canonical_topology(model: FiniteModel) -> FiniteTopology:
    return coarsest_topology(estimand_pseudometric(Estimand.likelihood(1), model))


@dataclass(frozen=True)
class QuotientMap:
    classes: tuple[tuple[int, ...], ...]
    projection: tuple[int, ...]
    quotient: FiniteTopology


def kolmogorov_quotient(t: FiniteTopology) -> QuotientMap:
    groups: dict[tuple, list[int]] = {}
    masks = sorted(t.masks)
    for i in range(t.n):
        groups.setdefault(tuple(m >> i & 1 for m in masks), []).append(i)
    classes = tuple(tuple(g) for g in groups.values())
    projection = [0] * t.n
    for c, members in enumerate(classes):
        for i in members:
            projection[i] = c
    images = frozenset(_mask(projection[i] for i in _members(m)) for m in t.masks)
    return QuotientMap(classes, tuple(projection), FiniteTopology(len(classes), images))


def search_bound() -> int:
    raw = os.environ.get("STATCAT_SEARCH_BOUND")
    if raw is None:
        return DEFAULT_SEARCH_BOUND
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"STATCAT_SEARCH_BOUND must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("STATCAT_SEARCH_BOUND must be positive")
    return value


def _profile(t: FiniteTopology):
    return len(t.masks), sorted(bin(m).count("1") for m in t.masks)


def is_homeomorphism(a: FiniteTopology, b: FiniteTopology, perm: Sequence[int]) -> bool:
    if a.n != b.n or sorted(perm) != list(range(a.n)):
        return False
    image = frozenset(_mask(perm[i] for i in _members(m)) for m in a.masks)
    return image == b.masks


def _find_homeomorphism(a: FiniteTopology, b: FiniteTopology):
    n = a.n
    ua = [a.minimal_open(x) for x in range(n)]
    ub = [b.minimal_open(y) for y in range(n)]
    # points are matched only if their minimal open sets and their "up-sets" have equal sizes
    key_a = [(bin(ua[x]).count("1"), sum(ua[z] >> x & 1 for z in range(n))) for x in range(n)]
    key_b = [(bin(ub[y]).count("1"), sum(ub[z] >> y & 1 for z in range(n))) for y in range(n)]
    if sorted(key_a) != sorted(key_b):
        return None
    perm = [-1] * n
    used = [False] * n

    def extend(x):
        if x == n:
            return True
        for y in range(n):
            if used[y] or key_a[x] != key_b[y]:
                continue
            ok = all(
                (ua[x] >> x2 & 1) == (ub[y] >> perm[x2] & 1) and (ua[x2] >> x & 1) == (ub[perm[x2]] >> y & 1)
                for x2 in range(x)
            )
            if ok:
                perm[x], used[y] = y, True
                if extend(x + 1):
                    return True
                perm[x], used[y] = -1, False
        return False

    if extend(0) and is_homeomorphism(a, b, perm):
        return tuple(perm)
    return None


def is_kolmogorov_equivalent(
    a: FiniteTopology, b: FiniteTopology, bound: int | None = None
) -> tuple[int, ...] | None:
    """A homeomorphism between the Kolmogorov quotients of `a` and `b`, as a
    tuple sending class i of KQ(a) to class perm[i] of KQ(b), or None."""
    bound = search_bound() if bound is None else bound
    qa, qb = kolmogorov_quotient(a).quotient, kolmogorov_quotient(b).quotient
    if max(qa.n, qb.n) > bound:
        raise SearchBoundExceeded(
            f"Kolmogorov quotients have {qa.n} and {qb.n} classes; the search bound is {bound}"
        )
    if qa.n != qb.n or _profile(qa) != _profile(qb):
        return None
    return _find_homeomorphism(qa, qb)


__all__ = [
    "Estimand",
    "FiniteTopology",
    "QuotientMap",
    "canonical_topology",
    "coarsest_topology",
    "estimand_pseudometric",
    "evaluate_estimand",
    "is_homeomorphism",
    "is_kolmogorov_equivalent",
    "kolmogorov_quotient",
    "search_bound",
]
