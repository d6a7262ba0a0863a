"""Seeded generators of random finite instances for property tests."""

from __future__ import annotations

import random
from fractions import Fraction

from statcat.kernels import MarkovKernel
from statcat.measure import FiniteSpace, MeasurableMap, RationalMeasure, SigmaAlgebra
from statcat.morphisms import FiniteModel, induce_morphism
from statcat.topology import FiniteTopology


def space(n: int, prefix: str = "x") -> FiniteSpace:
    return FiniteSpace(tuple(f"{prefix}{i}" for i in range(n)))


def weights(rng: random.Random, n: int, zero_prob: float = 0.3, top: int = 6) -> list[Fraction]:
    while True:
        w = [0 if rng.random() < zero_prob else rng.randint(1, top) for _ in range(n)]
        if sum(w):
            total = sum(w)
            return [Fraction(v, total) for v in w]


def measure(rng, sp: FiniteSpace, zero_prob: float = 0.3) -> RationalMeasure:
    return RationalMeasure(sp, tuple(weights(rng, len(sp), zero_prob)))


def partition(rng, sp: FiniteSpace, power_prob: float = 0.5) -> SigmaAlgebra:
    if rng.random() < power_prob:
        return SigmaAlgebra.power_set(sp)
    k = rng.randint(1, len(sp))
    labels = [rng.randrange(k) for _ in range(len(sp))]
    blocks = {}
    for i, c in enumerate(labels):
        blocks.setdefault(c, []).append(i)
    return SigmaAlgebra(sp, tuple(blocks.values()))


def model(rng, n_points: int, n_members: int, power_prob: float = 0.5, dup_prob: float = 0.2):
    sp = space(n_points)
    sigma = partition(rng, sp, power_prob)
    family = []
    for _ in range(n_members):
        if family and rng.random() < dup_prob:
            family.append(rng.choice(family))
        else:
            family.append(measure(rng, sp))
    return FiniteModel(sp, sigma, tuple(family))


def measurable_map(rng, domain: SigmaAlgebra, m: int, power_prob: float = 0.6) -> MeasurableMap:
    """Random map onto an m-point space. Each domain atom picks one codomain
    atom; its points land anywhere inside that atom."""
    cod = partition(rng, space(m, "y"), power_prob)
    assignment = [0] * len(domain.space)
    for block in domain.blocks:
        target = rng.choice(cod.blocks)
        for i in block:
            assignment[i] = rng.choice(target)
    return MeasurableMap(domain, cod, tuple(assignment))


def sufficient_model(rng, n_points: int, n_members: int, m: int):
    """A model together with a map for which the map is sufficient by
    construction: P(a) = c(a | T(a)) Q(T(a)) with c fixed across members."""
    sp = space(n_points)
    sigma = partition(rng, sp)
    t = measurable_map(rng, sigma, m)
    fibres: dict[int, list[int]] = {}
    for a, block in enumerate(sigma.blocks):
        fibres.setdefault(t.codomain.atom_of(t(block[0])), []).append(a)
    cond = {b: weights(rng, len(atoms), zero_prob=0.2) for b, atoms in fibres.items()}
    split = [weights(rng, len(block), zero_prob=0.2) for block in sigma.blocks]
    image_atoms = sorted(fibres)
    family = []
    for _ in range(n_members):
        q = dict(zip(image_atoms, weights(rng, len(image_atoms), zero_prob=0.3)))
        mass = [Fraction(0)] * n_points
        for b, atoms in fibres.items():
            for a, c in zip(atoms, cond[b]):
                for i, s in zip(sigma.blocks[a], split[a]):
                    mass[i] = s * c * q[b]
        family.append(RationalMeasure(sp, tuple(mass)))
    return FiniteModel(sp, sigma, tuple(family)), t


def equivalence_instance(rng, max_points: int = 5, max_members: int = 4):
    """(modelA, modelB, map) with modelB a shuffled pushforward family."""
    n = rng.randint(1, max_points)
    k = rng.randint(1, max_members)
    m = rng.randint(1, max_points)
    if rng.random() < 0.5:
        a, t = sufficient_model(rng, n, k, m)
    else:
        # fewer target points than source points makes collisions likely
        a = model(rng, max(n, 2), max(k, 2), power_prob=0.75, dup_prob=0.1)
        t = measurable_map(rng, a.sigma, rng.randint(1, len(a.space) - 1))
    target = induce_morphism(a, t).target
    order = list(range(len(target)))
    rng.shuffle(order)
    if rng.random() < 0.3:
        order.append(rng.choice(order))
    family = tuple(target.family[i] for i in order)
    b = FiniteModel(target.space, target.sigma, family)
    return a, b, t


def kernel(rng, domain: SigmaAlgebra, codomain: SigmaAlgebra) -> MarkovKernel:
    """Random kernel, constant on domain atoms."""
    rows = [None] * len(domain.space)
    for block in domain.blocks:
        row = tuple(weights(rng, len(codomain.space), zero_prob=0.4))
        for i in block:
            rows[i] = row
    return MarkovKernel(domain, codomain, tuple(rows))


def topology(rng, n: int) -> FiniteTopology:
    sub = []
    for _ in range(rng.randint(0, 2 * n)):
        sub.append({i for i in range(n) if rng.random() < 0.4})
    return FiniteTopology.from_subbase(n, sub)


def relabel(t: FiniteTopology, perm) -> FiniteTopology:
    return FiniteTopology.from_opens(t.n, [{perm[i] for i in u} for u in t.opens])
