"""Finite measurable spaces, exact rational measures and the operations on them.

A sigma-algebra on a finite space is stored as its atom partition. Events are
sets of point indices; an event is measurable iff it is a union of atoms.
"Almost everywhere" statements are decided on atoms of positive reference
mass, and values on null atoms are canonicalized to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ._exact import to_fraction
from .errors import (
    AbsoluteContinuityViolated,
    InvariantError,
    NonMeasurableMap,
    NotACoarsening,
    SpaceMismatch,
)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class FiniteSpace:
    points: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise InvariantError("a finite space needs at least one point")
        if len(set(points)) != len(points):
            dup = next(p for p in points if points.count(p) > 1)
            raise InvariantError(f"duplicate point label {dup!r}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(points)})

    def __len__(self):
        return len(self.points)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown point {label!r}") from None

    def label(self, i: int) -> str:
        return self.points[i]


def _canonical_blocks(blocks) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


@dataclass(frozen=True)
class SigmaAlgebra:
    space: FiniteSpace
    blocks: tuple[tuple[int, ...], ...]
    _atom_of: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        blocks = [tuple(b) for b in self.blocks]
        if any(len(b) == 0 for b in blocks):
            raise InvariantError("partition blocks must be nonempty")
        seen = [i for b in blocks for i in b]
        n = len(self.space)
        if sorted(seen) != list(range(n)):
            raise InvariantError("partition blocks must be disjoint and cover every point")
        blocks = _canonical_blocks(blocks)
        atom_of = [0] * n
        for k, b in enumerate(blocks):
            for i in b:
                atom_of[i] = k
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_atom_of", tuple(atom_of))

    @classmethod
    def power_set(cls, space: FiniteSpace) -> "SigmaAlgebra":
        return cls(space, tuple((i,) for i in range(len(space))))

    @classmethod
    def trivial(cls, space: FiniteSpace) -> "SigmaAlgebra":
        return cls(space, (tuple(range(len(space))),))

    @classmethod
    def from_labels(cls, space: FiniteSpace, blocks: Iterable[Iterable[str]]) -> "SigmaAlgebra":
        return cls(space, tuple(tuple(space.index(p) for p in b) for b in blocks))

    def __len__(self):
        return len(self.blocks)

    @property
    def is_power_set(self) -> bool:
        return len(self.blocks) == len(self.space)

    def atom_of(self, i: int) -> int:
        return self._atom_of[i]

    def is_measurable(self, event: Iterable[int]) -> bool:
        event = set(event)
        return all(set(b) <= event or not (set(b) & event) for b in self.blocks)

    def is_coarsening_of(self, finer: "SigmaAlgebra") -> bool:
        """True iff every atom of self is a union of atoms of `finer`."""
        if finer.space != self.space:
            return False
        return all(finer.is_measurable(b) for b in self.blocks)

    def atom_label(self, k: int) -> str:
        block = self.blocks[k]
        if len(block) == 1:
            return self.space.label(block[0])
        return "{" + ",".join(self.space.label(i) for i in block) + "}"

    def atom_space(self) -> FiniteSpace:
        """Space whose points are the atoms; equals the original space for power sets."""
        if self.is_power_set:
            return self.space
        return FiniteSpace(tuple(self.atom_label(k) for k in range(len(self.blocks))))

    def atom_sigma(self) -> "SigmaAlgebra":
        return SigmaAlgebra.power_set(self.atom_space())


def atoms(sigma: SigmaAlgebra) -> list[frozenset[int]]:
    """Partition blocks in canonical (smallest-member-first) order."""
    return [frozenset(b) for b in sigma.blocks]


@dataclass(frozen=True)
class RationalMeasure:
    space: FiniteSpace
    mass: tuple[Fraction, ...]
    is_probability: bool = True

    def __post_init__(self):
        mass = tuple(to_fraction(m) for m in self.mass)
        if len(mass) != len(self.space):
            raise InvariantError(
                f"measure has {len(mass)} masses for a space of {len(self.space)} points"
            )
        if any(m < 0 for m in mass):
            raise InvariantError("measure masses must be nonnegative")
        if self.is_probability and sum(mass) != 1:
            raise InvariantError(f"probability masses sum to {sum(mass)}, not 1")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_labels(cls, space: FiniteSpace, masses: Mapping[str, object], is_probability=True):
        unknown = set(masses) - set(space.points)
        if unknown:
            raise InvariantError(f"mass given for unknown point(s) {sorted(unknown)}")
        return cls(space, tuple(to_fraction(masses.get(p, 0)) for p in space.points), is_probability)

    @classmethod
    def dirac(cls, space: FiniteSpace, label: str) -> "RationalMeasure":
        i = space.index(label)
        return cls(space, tuple(ONE if j == i else ZERO for j in range(len(space))))

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "RationalMeasure":
        n = len(space)
        return cls(space, (Fraction(1, n),) * n)

    def __call__(self, event: Iterable[int]) -> Fraction:
        return sum((self.mass[i] for i in set(event)), ZERO)

    @property
    def total(self) -> Fraction:
        return sum(self.mass, ZERO)

    def on_atoms(self, sigma: SigmaAlgebra) -> tuple[Fraction, ...]:
        _same_space(self.space, sigma.space)
        return tuple(self(b) for b in sigma.blocks)

    def atomic(self, sigma: SigmaAlgebra) -> "RationalMeasure":
        """The measure transported to the atom space of `sigma`."""
        if sigma.is_power_set:
            _same_space(self.space, sigma.space)
            return self
        return RationalMeasure(sigma.atom_space(), self.on_atoms(sigma), self.is_probability)

    def support(self) -> frozenset[int]:
        return frozenset(i for i, m in enumerate(self.mass) if m > 0)

    def as_dict(self) -> dict[str, Fraction]:
        return dict(zip(self.space.points, self.mass))


def uniform_mixture(measures: Sequence[RationalMeasure]) -> RationalMeasure:
    if not measures:
        raise InvariantError("cannot mix an empty family")
    space = measures[0].space
    for m in measures:
        _same_space(space, m.space)
    k = len(measures)
    return RationalMeasure(
        space, tuple(sum(m.mass[i] for m in measures) / k for i in range(len(space)))
    )


@dataclass(frozen=True)
class DensityVector:
    """An L1 element with respect to `reference`. Values on reference-null
    points are forced to zero so that a.e.-equal densities compare equal."""

    space: FiniteSpace
    value: tuple[Fraction, ...]
    reference: RationalMeasure

    def __post_init__(self):
        _same_space(self.space, self.reference.space)
        value = tuple(to_fraction(v) for v in self.value)
        if len(value) != len(self.space):
            raise InvariantError("density length does not match its space")
        value = tuple(v if self.reference.mass[i] > 0 else ZERO for i, v in enumerate(value))
        object.__setattr__(self, "value", value)

    def integral(self, event: Iterable[int]) -> Fraction:
        return sum((self.value[i] * self.reference.mass[i] for i in set(event)), ZERO)


def _same_space(a: FiniteSpace, b: FiniteSpace):
    if a != b:
        raise SpaceMismatch(f"space mismatch: {a.points} vs {b.points}")


def is_absolutely_continuous(p: RationalMeasure, mu: RationalMeasure, sigma: SigmaAlgebra) -> bool:
    return _first_violating_atom(p, mu, sigma) is None


def _first_violating_atom(p, mu, sigma):
    _same_space(p.space, mu.space)
    _same_space(p.space, sigma.space)
    for k, block in enumerate(sigma.blocks):
        if mu(block) == 0 and p(block) > 0:
            return k
    return None


def radon_nikodym(p: RationalMeasure, mu: RationalMeasure, sigma: SigmaAlgebra) -> DensityVector:
    bad = _first_violating_atom(p, mu, sigma)
    if bad is not None:
        raise AbsoluteContinuityViolated(
            f"p charges atom {sigma.atom_label(bad)} which is null under the reference", atom=bad
        )
    value = [ZERO] * len(p.space)
    for block in sigma.blocks:
        m = mu(block)
        if m > 0:
            ratio = p(block) / m
            for i in block:
                value[i] = ratio
    return DensityVector(p.space, tuple(value), mu)


@dataclass(frozen=True)
class MeasurableMap:
    """A point map between finite measurable spaces.

    `assignment[i]` is the codomain index of domain point i. Construction
    fails with NonMeasurableMap unless the preimage of every codomain atom is
    a union of domain atoms.
    """

    domain: SigmaAlgebra
    codomain: SigmaAlgebra
    assignment: tuple[int, ...]

    def __post_init__(self):
        assignment = tuple(int(a) for a in self.assignment)
        if len(assignment) != len(self.domain.space):
            raise InvariantError("map must assign every domain point")
        if any(not 0 <= a < len(self.codomain.space) for a in assignment):
            raise InvariantError("map assigns a point outside its codomain")
        object.__setattr__(self, "assignment", assignment)
        for k, block in enumerate(self.codomain.blocks):
            pre = [i for i, a in enumerate(assignment) if a in block]
            if not self.domain.is_measurable(pre):
                raise NonMeasurableMap(
                    f"preimage of codomain atom {self.codomain.atom_label(k)} "
                    "is not a union of domain atoms",
                    atom=k,
                )

    @classmethod
    def from_labels(cls, domain: SigmaAlgebra, codomain: SigmaAlgebra, table: Mapping[str, str]):
        missing = [p for p in domain.space.points if p not in table]
        if missing:
            raise InvariantError(f"map is not total: no image for {missing}")
        return cls(domain, codomain, tuple(codomain.space.index(table[p]) for p in domain.space.points))

    @classmethod
    def identity(cls, sigma: SigmaAlgebra) -> "MeasurableMap":
        return cls(sigma, sigma, tuple(range(len(sigma.space))))

    def __call__(self, i: int) -> int:
        return self.assignment[i]

    def then(self, other: "MeasurableMap") -> "MeasurableMap":
        """Composition `other after self`."""
        if other.domain != self.codomain:
            raise SpaceMismatch("composition requires matching intermediate spaces")
        return MeasurableMap(self.domain, other.codomain, tuple(other(a) for a in self.assignment))

    def atom_assignment(self) -> tuple[int, ...]:
        """Domain atom -> codomain atom (well defined by measurability)."""
        return tuple(self.codomain.atom_of(self.assignment[b[0]]) for b in self.domain.blocks)

    def atomic(self) -> "MeasurableMap":
        if self.domain.is_power_set and self.codomain.is_power_set:
            return self
        return MeasurableMap(self.domain.atom_sigma(), self.codomain.atom_sigma(), self.atom_assignment())

    def as_dict(self) -> dict[str, str]:
        return {
            self.domain.space.label(i): self.codomain.space.label(a)
            for i, a in enumerate(self.assignment)
        }


def pushforward(map: MeasurableMap, mu: RationalMeasure) -> RationalMeasure:
    _same_space(map.domain.space, mu.space)
    out = [ZERO] * len(map.codomain.space)
    for i, m in enumerate(mu.mass):
        out[map(i)] += m
    return RationalMeasure(map.codomain.space, tuple(out), mu.is_probability)


def l1_distance(f: DensityVector, g: DensityVector) -> Fraction:
    if f.reference != g.reference:
        raise SpaceMismatch("l1_distance needs densities against the same reference measure")
    return sum(
        (abs(a - b) * w for a, b, w in zip(f.value, g.value, f.reference.mass)), ZERO
    )


def conditional_expectation(
    rho: DensityVector,
    sub: SigmaAlgebra,
    nu: RationalMeasure,
    sigma: SigmaAlgebra | None = None,
) -> DensityVector:
    """Block-average `rho` over the atoms of `sub` with weights `nu`.

    `sigma` is the algebra `rho` is measurable for (power set if omitted);
    `sub` must coarsen it.
    """
    if rho.reference != nu:
        raise SpaceMismatch("rho must be a density with respect to nu")
    sigma = sigma or SigmaAlgebra.power_set(rho.space)
    if not sub.is_coarsening_of(sigma):
        raise NotACoarsening("conditioning algebra is not a coarsening of rho's algebra")
    value = [ZERO] * len(rho.space)
    for block in sub.blocks:
        w = nu(block)
        if w > 0:
            mean = rho.integral(block) / w
            for i in block:
                value[i] = mean
    return DensityVector(rho.space, tuple(value), nu)
