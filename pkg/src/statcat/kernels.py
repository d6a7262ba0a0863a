"""Markov kernels, regular and dual conditional probabilities, Bayes and
detailed-balance checks.

Conditional probabilities are kept in measure form, p(y|x) = tau(delta_x)({y}),
so every conditional table is itself a Markov kernel. They are computed on
atoms: a table over coarse algebras lives on the corresponding atom spaces.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import DimensionMismatch, InvariantError, SpaceMismatch
from .measure import (
    ONE,
    ZERO,
    MeasurableMap,
    RationalMeasure,
    SigmaAlgebra,
)

__all__ = [
    "CheckReport",
    "ConditionalTable",
    "MarkovKernel",
    "MeasurableMap",
    "apply_kernel",
    "bayes_identity_check",
    "detailed_balance_check",
    "dual_conditional",
    "kernel_from_map",
    "regular_conditional",
]


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    route: str
    witness: Any = None
    certificate: Any = None
    checked: int = 0

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self):
        return self.passed


@dataclass(frozen=True)
class MarkovKernel:
    """Row-stochastic matrix from domain points to codomain points.

    Rows of points in one domain atom must put equal mass on each codomain
    atom, so the kernel is well defined on atoms.
    """

    domain: SigmaAlgebra
    codomain: SigmaAlgebra
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        matrix = tuple(tuple(Fraction(v) for v in row) for row in self.matrix)
        n, m = len(self.domain.space), len(self.codomain.space)
        if len(matrix) != n or any(len(r) != m for r in matrix):
            raise DimensionMismatch(f"kernel matrix must be {n}x{m}")
        for i, row in enumerate(matrix):
            if any(v < 0 for v in row) or sum(row) != 1:
                raise InvariantError(
                    f"kernel row {self.domain.space.label(i)!r} is not a probability vector"
                )
        object.__setattr__(self, "matrix", matrix)
        for block in self.domain.blocks:
            profiles = {self._row_on_atoms(matrix[i]) for i in block}
            if len(profiles) > 1:
                raise InvariantError("kernel rows differ within a domain atom")

    def _row_on_atoms(self, row):
        return tuple(sum((row[j] for j in b), ZERO) for b in self.codomain.blocks)

    @classmethod
    def identity(cls, sigma: SigmaAlgebra) -> "MarkovKernel":
        n = len(sigma.space)
        return cls(sigma, sigma, tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def constant(cls, domain: SigmaAlgebra, codomain: SigmaAlgebra, row) -> "MarkovKernel":
        return cls(domain, codomain, (tuple(row),) * len(domain.space))

    def __getitem__(self, ij):
        i, j = ij
        return self.matrix[i][j]

    def atomic(self) -> "MarkovKernel":
        if self.domain.is_power_set and self.codomain.is_power_set:
            return self
        rows = tuple(self._row_on_atoms(self.matrix[b[0]]) for b in self.domain.blocks)
        return MarkovKernel(self.domain.atom_sigma(), self.codomain.atom_sigma(), rows)

    def then(self, other: "MarkovKernel") -> "MarkovKernel":
        """Composite kernel: first self, then other."""
        if other.domain != self.codomain:
            raise SpaceMismatch("kernels do not compose")
        m = len(other.codomain.space)
        rows = tuple(
            tuple(sum((row[k] * other.matrix[k][j] for k in range(len(row))), ZERO) for j in range(m))
            for row in self.matrix
        )
        return MarkovKernel(self.domain, other.codomain, rows)


def kernel_from_map(map: MeasurableMap) -> MarkovKernel:
    m = len(map.codomain.space)
    rows = tuple(tuple(ONE if j == map(i) else ZERO for j in range(m)) for i in range(len(map.domain.space)))
    return MarkovKernel(map.domain, map.codomain, rows)


def apply_kernel(k: MarkovKernel, mu: RationalMeasure) -> RationalMeasure:
    if mu.space != k.domain.space:
        raise SpaceMismatch("measure does not live on the kernel's domain")
    out = [ZERO] * len(k.codomain.space)
    for i, w in enumerate(mu.mass):
        if w:
            for j, v in enumerate(k.matrix[i]):
                out[j] += w * v
    return RationalMeasure(k.codomain.space, tuple(out), mu.is_probability)


@dataclass(frozen=True)
class ConditionalTable:
    """A conditional probability p(col | row) stored as a Markov kernel.

    `defined[r]` marks rows whose conditioning atom has positive reference
    mass; other rows hold the canonical uniform row and carry no information.
    """

    kernel: MarkovKernel
    reference: RationalMeasure
    defined: tuple[bool, ...] = field(default=())

    @property
    def rows(self):
        return self.kernel.domain.space

    @property
    def cols(self):
        return self.kernel.codomain.space

    def p(self, col: int, given: int) -> Fraction:
        return self.kernel.matrix[given][col]


def _uniform_row(m: int):
    return (Fraction(1, m),) * m


def _atomic_inputs(k: MarkovKernel, mu: RationalMeasure):
    if mu.space != k.domain.space:
        raise SpaceMismatch("measure does not live on the kernel's domain")
    return k.atomic(), mu.atomic(k.domain)


def regular_conditional(k: MarkovKernel, mu: RationalMeasure) -> ConditionalTable:
    ka, mua = _atomic_inputs(k, mu)
    m = len(ka.codomain.space)
    defined = tuple(w > 0 for w in mua.mass)
    rows = tuple(row if d else _uniform_row(m) for row, d in zip(ka.matrix, defined))
    return ConditionalTable(MarkovKernel(ka.domain, ka.codomain, rows), mua, defined)


def dual_conditional(k: MarkovKernel, mu: RationalMeasure) -> ConditionalTable:
    """Bayes inversion p(x|y) = mu(x) k(x,y) / nu(y) with nu the image of mu."""
    ka, mua = _atomic_inputs(k, mu)
    nu = apply_kernel(ka, mua)
    n = len(ka.domain.space)
    rows = []
    for y, q in enumerate(nu.mass):
        if q > 0:
            rows.append(tuple(mua.mass[x] * ka.matrix[x][y] / q for x in range(n)))
        else:
            rows.append(_uniform_row(n))
    defined = tuple(q > 0 for q in nu.mass)
    return ConditionalTable(MarkovKernel(ka.codomain, ka.domain, tuple(rows)), nu, defined)


def bayes_identity_check(k: MarkovKernel, mu: RationalMeasure) -> CheckReport:
    forward = regular_conditional(k, mu)
    backward = dual_conditional(k, mu)
    mu_a, nu = forward.reference, backward.reference
    checked = 0
    for x, px in enumerate(mu_a.mass):
        if px == 0:
            continue
        for y, qy in enumerate(nu.mass):
            if qy == 0:
                continue
            checked += 1
            if backward.p(x, y) * qy != px * forward.p(y, x):
                witness = (forward.rows.label(x), forward.cols.label(y))
                return CheckReport(False, "bayes", witness=witness, checked=checked)
    return CheckReport(True, "bayes", certificate=backward, checked=checked)


def _balance_violation(forward, backward, member):
    q = apply_kernel(forward.kernel, member)
    for x, px in enumerate(member.mass):
        for y, qy in enumerate(q.mass):
            if backward.p(x, y) * qy != forward.p(y, x) * px:
                return (x, y)
    return None


def detailed_balance_check(
    forward: ConditionalTable,
    backward: ConditionalTable,
    family: Sequence[RationalMeasure],
    workers: int = 1,
) -> CheckReport:
    """p(x|y) Q(y) = p(y|x) P(x) for every P in `family`, Q the image of P.

    With workers > 1 members are checked concurrently; the reported witness is
    still the first violation in member order.
    """
    if backward.rows != forward.cols or backward.cols != forward.rows:
        raise DimensionMismatch("backward table must run from forward's codomain to its domain")
    for member in family:
        if member.space != forward.rows:
            raise DimensionMismatch("family members must live on the forward table's domain")
    family = list(family)
    if workers > 1 and len(family) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda m: _balance_violation(forward, backward, m), family))
    else:
        results = [_balance_violation(forward, backward, m) for m in family]
    for idx, hit in enumerate(results):
        if hit is not None:
            x, y = hit
            witness = (idx, forward.rows.label(x), forward.cols.label(y))
            return CheckReport(False, "detailed-balance", witness=witness, checked=len(family))
    return CheckReport(
        True, "detailed-balance", certificate=(forward.kernel, backward.kernel), checked=len(family)
    )
