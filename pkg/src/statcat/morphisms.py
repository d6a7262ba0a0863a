"""Finite statistical models, morphisms induced by measurable maps, and their
mono/epi/iso classification.

The reverse-kernel search is an exact linear feasibility problem solved by
the phase-1 simplex in :mod:`statcat.simplex`. Every answer it gives is
re-verified by direct arithmetic before it is returned: a kernel is reapplied
to every pair, and an infeasibility certificate is checked as a Farkas
functional against the pairs themselves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import (
    AbsoluteContinuityViolated,
    DimensionMismatch,
    FamilyMismatch,
    InvariantError,
    SpaceMismatch,
)
from .kernels import MarkovKernel, apply_kernel, kernel_from_map
from .measure import (
    ZERO,
    FiniteSpace,
    MeasurableMap,
    RationalMeasure,
    SigmaAlgebra,
    is_absolutely_continuous,
    pushforward,
    uniform_mixture,
)
from .simplex import solve_feasibility


@dataclass(frozen=True)
class FiniteModel:
    """A finite statistical model: space, sigma-algebra and a named family.

    Without an explicit dominating measure the uniform mixture of the family
    serves as reference.
    """

    space: FiniteSpace
    sigma: SigmaAlgebra
    family: tuple[RationalMeasure, ...]
    names: tuple[str, ...] = ()
    dominating: RationalMeasure | None = None

    def __post_init__(self):
        family = tuple(self.family)
        names = tuple(self.names) or tuple(f"P{i}" for i in range(len(family)))
        if not family:
            raise InvariantError("a model needs at least one distribution")
        if self.sigma.space != self.space:
            raise SpaceMismatch("sigma-algebra is over a different space")
        if len(names) != len(family):
            raise InvariantError("one name per family member is required")
        if len(set(names)) != len(names):
            raise InvariantError("family member names must be unique")
        for name, p in zip(names, family):
            if p.space != self.space:
                raise SpaceMismatch(f"family member {name!r} lives on another space")
            if not p.is_probability:
                raise InvariantError(f"family member {name!r} is not a probability measure")
        if self.dominating is not None:
            if self.dominating.space != self.space:
                raise SpaceMismatch("dominating measure lives on another space")
            for name, p in zip(names, family):
                if not is_absolutely_continuous(p, self.dominating, self.sigma):
                    raise AbsoluteContinuityViolated(
                        f"family member {name!r} is not dominated by the reference measure"
                    )
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "names", names)

    def __len__(self):
        return len(self.family)

    @property
    def reference(self) -> RationalMeasure:
        if self.dominating is not None:
            return self.dominating
        return uniform_mixture(self.family)

    def atoms_of(self, i: int) -> tuple[Fraction, ...]:
        return self.family[i].on_atoms(self.sigma)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no family member named {name!r}") from None

    def atomic(self) -> "FiniteModel":
        """The same model on its atom space with the power-set algebra."""
        if self.sigma.is_power_set:
            return self
        return FiniteModel(
            self.sigma.atom_space(),
            self.sigma.atom_sigma(),
            tuple(p.atomic(self.sigma) for p in self.family),
            self.names,
            self.dominating.atomic(self.sigma) if self.dominating is not None else None,
        )

    def restrict(self, indices: Sequence[int]) -> "FiniteModel":
        """Sub-model on the given members; the reference becomes their mixture."""
        return FiniteModel(
            self.space,
            self.sigma,
            tuple(self.family[i] for i in indices),
            tuple(self.names[i] for i in indices),
        )


@dataclass(frozen=True)
class L1IdentityPartition:
    model: FiniteModel
    classes: tuple[tuple[int, ...], ...]
    _class_of: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        class_of = [0] * len(self.model)
        for c, members in enumerate(self.classes):
            for i in members:
                class_of[i] = c
        object.__setattr__(self, "_class_of", tuple(class_of))

    def class_of(self, i: int) -> int:
        return self._class_of[i]

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.classes)

    def __len__(self):
        return len(self.classes)


def l1_identity_partition(model: FiniteModel) -> L1IdentityPartition:
    buckets: dict[tuple, list[int]] = {}
    for i in range(len(model)):
        buckets.setdefault(model.atoms_of(i), []).append(i)
    classes = sorted((tuple(v) for v in buckets.values()), key=lambda c: c[0])
    return L1IdentityPartition(model, tuple(classes))


def quotient_model(model: FiniteModel) -> FiniteModel:
    """One representative per L1-class (the lowest index); default reference."""
    return model.restrict(l1_identity_partition(model).representatives)


@dataclass(frozen=True)
class StatisticalMorphism:
    source: FiniteModel
    target: FiniteModel
    map: MeasurableMap
    kernel: MarkovKernel
    assignment: tuple[int, ...]

    def image(self, i: int) -> RationalMeasure:
        return apply_kernel(self.kernel, self.source.family[i])


def induce_morphism(source: FiniteModel, map: MeasurableMap) -> StatisticalMorphism:
    """Morphism onto the pushforward family T_*M (same member names)."""
    if map.domain != source.sigma:
        raise SpaceMismatch("map domain does not match the source model")
    dominating = pushforward(map, source.dominating) if source.dominating is not None else None
    target = FiniteModel(
        map.codomain.space,
        map.codomain,
        tuple(pushforward(map, p) for p in source.family),
        source.names,
        dominating,
    )
    return StatisticalMorphism(source, target, map, kernel_from_map(map), tuple(range(len(source))))


def morphism_onto(source: FiniteModel, target: FiniteModel, map: MeasurableMap) -> StatisticalMorphism:
    """Morphism into a given target family, matching images up to L1-identity.

    Each image is assigned the lowest-index target member it is L1-identical
    to; FamilyMismatch is raised if some image has no match.
    """
    if map.domain != source.sigma:
        raise SpaceMismatch("map domain does not match the source model")
    if map.codomain != target.sigma:
        raise SpaceMismatch("map codomain does not match the target model")
    lookup: dict[tuple, int] = {}
    for q in range(len(target)):
        lookup.setdefault(target.atoms_of(q), q)
    assignment = []
    for i, p in enumerate(source.family):
        image = pushforward(map, p)
        q = lookup.get(image.on_atoms(target.sigma))
        if q is None:
            raise FamilyMismatch(
                f"image of {source.names[i]!r} matches no member of the target family",
                witness=(source.names[i], image),
            )
        assignment.append(q)
    return StatisticalMorphism(source, target, map, kernel_from_map(map), tuple(assignment))


def morphism_kernel_at(f: StatisticalMorphism, q_index: int) -> set[int]:
    if not 0 <= q_index < len(f.target):
        raise IndexError(f"target index {q_index} out of range")
    wanted = f.target.atoms_of(q_index)
    return {i for i, q in enumerate(f.assignment) if f.target.atoms_of(q) == wanted}


# -- reverse kernels -------------------------------------------------------


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Farkas functional for the reverse-kernel system.

    `row_weights[j]` multiplies the row-sum constraint of target point j and
    `pair_weights[p][i]` the constraint (K Q_p)(i) = P_p(i).
    """

    row_weights: tuple[Fraction, ...]
    pair_weights: tuple[tuple[Fraction, ...], ...]

    def verify(self, pairs, support=None) -> bool:
        n_t = len(pairs[0][1].space)
        n_s = len(pairs[0][0].space)
        for j in range(n_t):
            for i in range(n_s):
                if support is not None and not support[j][i]:
                    continue
                coeff = self.row_weights[j] + sum(
                    (q.mass[j] * w[i] for (_, q), w in zip(pairs, self.pair_weights)), ZERO
                )
                if coeff > 0:
                    return False
        gap = sum(self.row_weights, ZERO) + sum(
            (p.mass[i] * w[i] for (p, _), w in zip(pairs, self.pair_weights) for i in range(n_s)),
            ZERO,
        )
        return gap > 0


@dataclass(frozen=True)
class ReverseKernelResult:
    kernel: MarkovKernel | None
    certificate: InfeasibilityCertificate | None

    @property
    def feasible(self) -> bool:
        return self.kernel is not None


def find_reverse_kernel(
    pairs: Sequence[tuple[RationalMeasure, RationalMeasure]],
    support: Sequence[Sequence[bool]] | None = None,
) -> ReverseKernelResult:
    """Search a row-stochastic K with K(target_p) = source_p for every pair.

    Kernel rows are indexed by target points, columns by source points.
    `support[j][i] == False` pins K(j, i) to zero.
    """
    if not pairs:
        raise DimensionMismatch("at least one pair is required")
    s_space = pairs[0][0].space
    t_space = pairs[0][1].space
    for p, q in pairs:
        if p.space != s_space or q.space != t_space:
            raise DimensionMismatch("all sources (targets) must share one space")
    n_s, n_t = len(s_space), len(t_space)
    if support is not None and (len(support) != n_t or any(len(r) != n_s for r in support)):
        raise DimensionMismatch("support mask must be |targets| x |sources|")
    variables = [
        (j, i) for j in range(n_t) for i in range(n_s) if support is None or support[j][i]
    ]
    A, b = [], []
    for j in range(n_t):
        A.append([Fraction(1) if v[0] == j else ZERO for v in variables])
        b.append(Fraction(1))
    for p, q in pairs:
        for i in range(n_s):
            A.append([q.mass[v[0]] if v[1] == i else ZERO for v in variables])
            b.append(p.mass[i])
    result = solve_feasibility(A, b)

    if result.feasible:
        matrix = [[ZERO] * n_s for _ in range(n_t)]
        for (j, i), value in zip(variables, result.x):
            matrix[j][i] = value
        kernel = MarkovKernel(
            SigmaAlgebra.power_set(t_space),
            SigmaAlgebra.power_set(s_space),
            tuple(tuple(r) for r in matrix),
        )
        for p, q in pairs:
            if apply_kernel(kernel, q).mass != p.mass:
                raise AssertionError("simplex returned a kernel that does not reproduce a pair")
        return ReverseKernelResult(kernel, None)

    y = result.farkas
    cert = InfeasibilityCertificate(
        tuple(y[:n_t]),
        tuple(tuple(y[n_t + k * n_s : n_t + (k + 1) * n_s]) for k in range(len(pairs))),
    )
    if not cert.verify(pairs, support):
        raise AssertionError("simplex returned an invalid infeasibility certificate")
    return ReverseKernelResult(None, cert)


def fiber_support(map: MeasurableMap) -> tuple[tuple[bool, ...], ...]:
    """Atom-level mask allowing K(y, x) only for x in the fibre of y.

    Atoms outside the image have empty fibres and are left unrestricted.
    """
    amap = map.atomic()
    n_s, n_t = len(amap.domain.space), len(amap.codomain.space)
    rows = []
    for j in range(n_t):
        fibre = tuple(amap(i) == j for i in range(n_s))
        rows.append(fibre if any(fibre) else (True,) * n_s)
    return tuple(rows)


@dataclass(frozen=True)
class MorphismClassification:
    mono: bool
    epi: bool
    iso_naive: bool
    iso_reverse_kernel: bool
    reverse_kernel: MarkovKernel | None = None
    witness: Any = None
    certificate: InfeasibilityCertificate | None = None


def classify_morphism(f: StatisticalMorphism, restrict_to_fibres: bool = True) -> MorphismClassification:
    """Mono/epi at the level of L1-classes plus the reverse-kernel iso test.

    The reverse kernel is searched on atoms and, by default, only along the
    fibres of the inducing map; this does not change feasibility but makes
    the solution coincide with the common dual conditional wherever that is
    determined.
    """
    src, tgt = f.source, f.target
    sp, tp = l1_identity_partition(src), l1_identity_partition(tgt)
    witness = None

    mono = True
    by_target_class: dict[int, int] = {}
    for i, q in enumerate(f.assignment):
        c = tp.class_of(q)
        first = by_target_class.setdefault(c, i)
        if sp.class_of(first) != sp.class_of(i):
            mono = False
            witness = {"kind": "not-mono", "members": (src.names[first], src.names[i])}
            break

    hit = {tp.class_of(q) for q in f.assignment}
    missing = [c for c in range(len(tp)) if c not in hit]
    epi = not missing
    if not epi and witness is None:
        witness = {"kind": "not-epi", "member": tgt.names[tp.classes[missing[0]][0]]}

    amap = f.map.atomic()
    src_atoms = [p.atomic(src.sigma) for p in src.family]
    pairs = [(p, pushforward(amap, p)) for p in src_atoms]
    support = fiber_support(f.map) if restrict_to_fibres else None
    result = find_reverse_kernel(pairs, support)

    iso_rk = False
    if result.feasible:
        k = result.kernel
        forward = kernel_from_map(amap)
        back_ok = all(apply_kernel(k, q).mass == p.mass for p, q in pairs)
        source_classes = {p.mass for p in src_atoms}
        forth_ok = True
        for q in (q.atomic(tgt.sigma) for q in tgt.family):
            back = apply_kernel(k, q)
            # f* must land in the source family, and f must bring it back to q
            if back.mass not in source_classes or apply_kernel(forward, back).mass != q.mass:
                forth_ok = False
                break
        iso_rk = back_ok and forth_ok
        if not iso_rk and witness is None:
            witness = {"kind": "round-trip"}
    elif witness is None:
        witness = {"kind": "no-reverse-kernel"}

    return MorphismClassification(
        mono=mono,
        epi=epi,
        iso_naive=mono and epi,
        iso_reverse_kernel=iso_rk,
        reverse_kernel=result.kernel,
        witness=witness,
        certificate=result.certificate,
    )
