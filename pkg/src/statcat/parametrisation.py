"""Finite parametrisations of model families by rational vectors."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ._exact import rank
from .errors import InvariantError, UnsupportedCategory
from .kernels import CheckReport
from .morphisms import FiniteModel, l1_identity_partition
from .topology import canonical_topology, is_kolmogorov_equivalent

CATEGORIES = ("Set", "FinTop")


@dataclass(frozen=True)
class Parametrisation:
    """Parameter vectors with the family index each one selects."""

    parameters: tuple[tuple[Fraction, ...], ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        params = tuple(tuple(Fraction(v) for v in theta) for theta in self.parameters)
        if not params:
            raise InvariantError("a parameter space needs at least one vector")
        if len({len(t) for t in params}) != 1:
            raise InvariantError("parameter vectors must share one dimension")
        seen = {}
        for k, theta in enumerate(params):
            if theta in seen:
                raise InvariantError(f"parameters {seen[theta]} and {k} are the same vector")
            seen[theta] = k
        assignment = tuple(self.assignment)
        if len(assignment) != len(params):
            raise InvariantError("one family index per parameter is required")
        object.__setattr__(self, "parameters", params)
        object.__setattr__(self, "assignment", assignment)

    @property
    def length(self) -> int:
        return len(self.parameters[0])

    def __len__(self):
        return len(self.parameters)


@dataclass(frozen=True)
class ParamReport:
    identifiable: bool
    cardinality: int
    length: int
    affine_rank: int
    witness: tuple | None = None


def affine_rank(parameters: Sequence[Sequence[Fraction]]) -> int:
    base = parameters[0]
    diffs = [[a - b for a, b in zip(theta, base)] for theta in parameters[1:]]
    return rank(diffs, len(base)) if diffs else 0


def analyze_parametrisation(theta: Parametrisation, model: FiniteModel) -> ParamReport:
    """Identifiable iff parameters map bijectively onto the L1-classes.

    On a collision the witness is the first pair of parameter vectors that
    land in one class; on a coverage gap it is ``(None, class members)``.
    """
    for idx in theta.assignment:
        if not 0 <= idx < len(model):
            raise InvariantError(f"assignment index {idx} is not a family member")
    part = l1_identity_partition(model)
    hit: dict[int, int] = {}
    witness = None
    for k, idx in enumerate(theta.assignment):
        c = part.class_of(idx)
        if c in hit and witness is None:
            witness = (theta.parameters[hit[c]], theta.parameters[k])
        hit.setdefault(c, k)
    if witness is None and len(hit) < len(part):
        missing = next(c for c in range(len(part)) if c not in hit)
        witness = (None, part.classes[missing])
    return ParamReport(
        identifiable=witness is None,
        cardinality=len(theta),
        length=theta.length,
        affine_rank=affine_rank(theta.parameters),
        witness=witness,
    )


def minimal_length(model: FiniteModel, category: str = "Set") -> tuple[int, Parametrisation]:
    if category != "Set":
        raise UnsupportedCategory(f"minimal length is only available for Set, not {category!r}")
    reps = l1_identity_partition(model).representatives
    theta = Parametrisation(tuple((Fraction(k),) for k in range(len(reps))), reps)
    return 1, theta


def structural_equivalence(modelA: FiniteModel, modelB: FiniteModel, category: str = "Set") -> CheckReport:
    """Set: equal L1-class counts. FinTop: Kolmogorov-equivalent canonical
    topologies. The certificate maps class i of A to class cert[i] of B."""
    if category not in CATEGORIES:
        raise UnsupportedCategory(f"unsupported category {category!r}")
    if category == "Set":
        na = len(l1_identity_partition(modelA))
        nb = len(l1_identity_partition(modelB))
        if na != nb:
            return CheckReport(False, "Set", witness={"classes_a": na, "classes_b": nb})
        return CheckReport(True, "Set", certificate=tuple(range(na)))
    ta, tb = canonical_topology(modelA), canonical_topology(modelB)
    perm = is_kolmogorov_equivalent(ta, tb)
    if perm is None:
        return CheckReport(False, "FinTop", witness={"opens_a": len(ta), "opens_b": len(tb)})
    return CheckReport(True, "FinTop", certificate=perm)


__all__ = [
    "ParamReport",
    "Parametrisation",
    "affine_rank",
    "analyze_parametrisation",
    "minimal_length",
    "structural_equivalence",
]
