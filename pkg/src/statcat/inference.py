"""Sufficiency, completeness and statistical equivalence.

Equivalence of two models along a candidate map is decided by three routes
that share no decision code:

* ``iso``: an exact reverse-kernel search with two-sided round trips;
* ``detailed-balance``: one fixed pair of conditionals must balance every
  family member simultaneously;
* ``sufficiency+completeness``: sufficiency on the source quotient family
  and completeness on the target quotient family.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from ._exact import nullspace
from .errors import FamilyMismatch, NonMeasurableMap, SearchBoundExceeded, SpaceMismatch
from .kernels import (
    CheckReport,
    MarkovKernel,
    apply_kernel,
    detailed_balance_check,
    dual_conditional,
    kernel_from_map,
    regular_conditional,
)
from .measure import DensityVector, MeasurableMap, SigmaAlgebra, uniform_mixture
from .morphisms import (
    FiniteModel,
    classify_morphism,
    l1_identity_partition,
    morphism_onto,
    quotient_model,
)

ORACLE_MAX_POINTS = 4


def is_sufficient(
    model: FiniteModel, map: MeasurableMap, subfamily: Iterable[int] | None = None
) -> CheckReport:
    """Every member's dual conditional must agree with the reference dual
    wherever both are defined. The witness is the first disagreeing
    (member, x, y) in canonical order."""
    if map.domain != model.sigma:
        raise SpaceMismatch("map domain does not match the model")
    am = model.atomic()
    k = kernel_from_map(map.atomic())
    common = dual_conditional(k, am.reference)
    indices = range(len(am)) if subfamily is None else sorted(set(subfamily))
    xs, ys = common.cols, common.rows
    for idx in indices:
        dual = dual_conditional(k, am.family[idx])
        for x in range(len(xs)):
            for y in range(len(ys)):
                if dual.defined[y] and common.defined[y] and dual.p(x, y) != common.p(x, y):
                    witness = {
                        "member": am.names[idx],
                        "x": xs.label(x),
                        "y": ys.label(y),
                        "member_value": dual.p(x, y),
                        "reference_value": common.p(x, y),
                    }
                    return CheckReport(False, "sufficiency", witness=witness)
    return CheckReport(True, "sufficiency", certificate=common.kernel, checked=len(indices))


def image_sigma(map: MeasurableMap, source_sigma: SigmaAlgebra | None = None) -> SigmaAlgebra:
    """Sigma-algebra on the codomain generated by images of source atoms."""
    source_sigma = source_sigma or map.domain
    if source_sigma.space != map.domain.space:
        raise SpaceMismatch("source algebra is over a different space than the map")
    generators = [frozenset(map(i) for i in block) for block in source_sigma.blocks]
    classes: dict[tuple, list[int]] = {}
    for y in range(len(map.codomain.space)):
        classes.setdefault(tuple(y in g for g in generators), []).append(y)
    return SigmaAlgebra(map.codomain.space, tuple(tuple(c) for c in classes.values()))


def is_complete(
    target: FiniteModel, map: MeasurableMap, source_sigma: SigmaAlgebra | None = None
) -> CheckReport:
    """Trivial null space of rho -> E_nu(rho | sigma(T(A))) on nu-positive atoms.

    `source_sigma` selects the events whose images generate the conditioning
    algebra (the map's domain algebra by default). The witness is a nonzero
    density whose conditional expectation vanishes.
    """
    if map.codomain != target.sigma:
        raise SpaceMismatch("map codomain does not match the target model")
    g_sigma = image_sigma(map, source_sigma)
    nu = target.reference
    cols = [b for b in target.sigma.blocks if nu(b) > 0]
    rows = []
    for g in g_sigma.blocks:
        w = nu(g)
        if w > 0:
            rows.append([nu(set(g) & set(b)) / w for b in cols])
    basis = nullspace(rows, len(cols))
    if not basis:
        return CheckReport(True, "completeness", certificate=g_sigma, checked=len(cols))
    value = [0] * len(target.space)
    for coeff, block in zip(basis[0], cols):
        for i in block:
            value[i] = coeff
    rho = DensityVector(target.space, tuple(value), nu)
    return CheckReport(False, "completeness", witness=rho, checked=len(cols))


@dataclass(frozen=True)
class EquivalenceVerdict:
    route_iso: CheckReport
    route_detailed_balance: CheckReport
    route_suff_complete: CheckReport

    @property
    def routes(self) -> tuple[CheckReport, ...]:
        return (self.route_iso, self.route_detailed_balance, self.route_suff_complete)

    @property
    def agree(self) -> bool:
        return len({r.passed for r in self.routes}) == 1

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.routes)


def _require_family_match(modelA: FiniteModel, modelB: FiniteModel, map: MeasurableMap):
    f = morphism_onto(modelA, modelB, map)
    hit = {modelB.atoms_of(q) for q in f.assignment}
    for q in range(len(modelB)):
        if modelB.atoms_of(q) not in hit:
            raise FamilyMismatch(
                f"target member {modelB.names[q]!r} is not the image of any source member",
                witness=(modelB.names[q], modelB.family[q]),
            )
    return f


def _route_iso(f) -> CheckReport:
    c = classify_morphism(f)
    forward = kernel_from_map(f.map.atomic())
    if c.iso_reverse_kernel:
        return CheckReport(True, "iso", certificate=(forward, c.reverse_kernel))
    witness = dict(c.witness or {})
    witness.update(mono=c.mono, epi=c.epi)
    return CheckReport(False, "iso", witness=witness, certificate=c.certificate)


def _route_detailed_balance(modelA: FiniteModel, map: MeasurableMap, workers: int) -> CheckReport:
    am = modelA.atomic()
    k = kernel_from_map(map.atomic())
    ref = uniform_mixture(am.family)
    forward = regular_conditional(k, ref)
    backward = dual_conditional(k, ref)
    report = detailed_balance_check(forward, backward, am.family, workers=workers)
    if report.passed:
        return report
    idx, x, y = report.witness
    return CheckReport(
        False, report.route, witness={"member": am.names[idx], "x": x, "y": y}, checked=report.checked
    )


def _route_suff_complete(modelA: FiniteModel, modelB: FiniteModel, map: MeasurableMap) -> CheckReport:
    suff = is_sufficient(quotient_model(modelA), map)
    comp = is_complete(quotient_model(modelB), map)
    route = "sufficiency+completeness"
    if suff.passed and comp.passed:
        return CheckReport(True, route, certificate=(kernel_from_map(map.atomic()), suff.certificate))
    if not suff.passed:
        return CheckReport(False, route, witness={"sufficiency": suff.witness})
    return CheckReport(False, route, witness={"completeness": comp.witness})


def check_equivalence(
    modelA: FiniteModel, modelB: FiniteModel, map: MeasurableMap, workers: int = 1
) -> EquivalenceVerdict:
    """Decide equivalence of two models along `map` by all three routes.

    Raises FamilyMismatch unless the pushforward family and modelB's family
    have the same L1-classes.
    """
    f = _require_family_match(modelA, modelB, map)
    jobs = (
        lambda: _route_iso(f),
        lambda: _route_detailed_balance(modelA, map, workers),
        lambda: _route_suff_complete(modelA, modelB, map),
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, 3)) as pool:
            futures = [pool.submit(job) for job in jobs]
            results = [fut.result() for fut in futures]
    else:
        results = [job() for job in jobs]
    return EquivalenceVerdict(*results)


def verify_equivalence_certificate(
    modelA: FiniteModel, modelB: FiniteModel, forward: MarkovKernel, backward: MarkovKernel
) -> bool:
    """Exact re-check of a two-sided kernel certificate on atom spaces.

    Every member must travel to the other family and come back L1-identical,
    in both directions.
    """
    a, b = modelA.atomic(), modelB.atomic()
    if forward.domain.space != a.space or forward.codomain.space != b.space:
        return False
    if backward.domain.space != b.space or backward.codomain.space != a.space:
        return False
    a_classes = {p.mass for p in a.family}
    b_classes = {q.mass for q in b.family}
    for p in a.family:
        there = apply_kernel(forward, p)
        if there.mass not in b_classes or apply_kernel(backward, there).mass != p.mass:
            return False
    for q in b.family:
        back = apply_kernel(backward, q)
        if back.mass not in a_classes or apply_kernel(forward, back).mass != q.mass:
            return False
    return True


@dataclass(frozen=True)
class OracleEntry:
    assignment: dict
    verdict: EquivalenceVerdict


@dataclass(frozen=True)
class OracleResult:
    entries: tuple[OracleEntry, ...]
    maps_tried: int

    @property
    def exists(self) -> bool:
        return any(e.verdict.route_iso.passed for e in self.entries)

    def exists_by(self, route: str) -> bool:
        return any(getattr(e.verdict, route).passed for e in self.entries)


def oracle_search(modelA: FiniteModel, modelB: FiniteModel) -> OracleResult:
    """Evaluate every measurable map between two spaces of at most four points
    whose pushforward family matches modelB."""
    nx, ny = len(modelA.space), len(modelB.space)
    if max(nx, ny) > ORACLE_MAX_POINTS:
        raise SearchBoundExceeded(
            f"exhaustive map search is limited to {ORACLE_MAX_POINTS}-point spaces"
        )
    entries = []
    tried = 0
    for assignment in itertools.product(range(ny), repeat=nx):
        tried += 1
        try:
            m = MeasurableMap(modelA.sigma, modelB.sigma, assignment)
            verdict = check_equivalence(modelA, modelB, m)
        except (NonMeasurableMap, FamilyMismatch):
            continue
        entries.append(OracleEntry(m.as_dict(), verdict))
    return OracleResult(tuple(entries), tried)


__all__ = [
    "EquivalenceVerdict",
    "OracleResult",
    "check_equivalence",
    "image_sigma",
    "is_complete",
    "is_sufficient",
    "l1_identity_partition",
    "oracle_search",
    "verify_equivalence_certificate",
]
