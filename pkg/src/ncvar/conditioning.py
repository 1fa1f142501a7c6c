"""Tensor-factor subalgebras and conditional expectations.

A subalgebra is named by a subset of tensor factor positions; the
conditional expectation onto it is the normalized partial trace over the
omitted factors, re-embedded with identities. In this tensor setting
that map is the unique trace-preserving bimodule projection onto the
subalgebra, and subalgebras over disjoint factor sets are tensor
independent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    AlgebraShape,
    Element,
    embed_in_factors,
    l2_distance,
    l2_norm,
    normalized_trace,
    partial_trace,
    trace_product,
    variance,
)
from .reports import CheckReport, build_check_report

__all__ = [
    "FactorSet",
    "conditional_expectation",
    "module_property_check",
    "trace_preservation_check",
    "tower_identity_check",
    "martingale_decomposition",
    "martingale_sum_check",
    "martingale_orthogonality_check",
    "variance_additivity_check",
    "conditional_independence_check",
]


@dataclass(frozen=True)
class FactorSet:
    """A subset of factor positions (1-based) naming a tensor subalgebra.

    The empty set names the scalars; the full set names the whole algebra.
    """

    shape: AlgebraShape
    indices: frozenset[int]

    def __post_init__(self) -> None:
        idx = frozenset(int(i) for i in self.indices)
        for i in idx:
            self.shape.check_position(i)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, shape: AlgebraShape, indices) -> "FactorSet":
        return cls(shape, frozenset(indices))

    @classmethod
    def empty(cls, shape: AlgebraShape) -> "FactorSet":
        return cls(shape, frozenset())

    @classmethod
    def full(cls, shape: AlgebraShape) -> "FactorSet":
        return cls(shape, frozenset(range(1, shape.n_factors + 1)))

    @classmethod
    def first(cls, shape: AlgebraShape, j: int) -> "FactorSet":
        """Factors 1..j; j = 0 gives the scalars."""
        if not 0 <= j <= shape.n_factors:
            raise ValueError(f"prefix length {j} out of range 0..{shape.n_factors}")
        return cls(shape, frozenset(range(1, j + 1)))

    @classmethod
    def excluding(cls, shape: AlgebraShape, j: int) -> "FactorSet":
        """All factors except position j."""
        shape.check_position(j)
        return cls(shape, frozenset(range(1, shape.n_factors + 1)) - {j})

    @property
    def sorted_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    @property
    def is_full(self) -> bool:
        return len(self.indices) == self.shape.n_factors

    @property
    def is_empty(self) -> bool:
        return not self.indices

    def complement(self) -> "FactorSet":
        full = frozenset(range(1, self.shape.n_factors + 1))
        return FactorSet(self.shape, full - self.indices)

    def union(self, other: "FactorSet") -> "FactorSet":
        if other.shape != self.shape:
            raise ValueError("factor sets live over different shapes")
        return FactorSet(self.shape, self.indices | other.indices)


def conditional_expectation(x: Element, s: FactorSet) -> Element:
    """Project onto the subalgebra generated by the factors in ``s``.

    Normalized partial trace over the complementary factors, tensored
    back with identities. Idempotent, positive, unital, trace-preserving.
    """
    if x.shape != s.shape:
        raise ValueError(
            f"element shape {x.shape.factor_dims} does not match "
            f"factor set shape {s.shape.factor_dims}"
        )
    if s.is_full:
        return x
    local = partial_trace(x, s.sorted_indices)
    return embed_in_factors(local, s.sorted_indices, x.shape)


def _in_subalgebra(a: Element, s: FactorSet, tol: float) -> bool:
    return l2_distance(conditional_expectation(a, s), a) <= tol


def module_property_check(
    a: Element, x: Element, b: Element, s: FactorSet, tol: float = 1e-10
) -> CheckReport:
    """Check the bimodule property E(axb) = a E(x) b for a, b in the subalgebra."""
    notes = []
    applicable = True
    if not _in_subalgebra(a, s, tol):
        notes.append("precondition violated: a is not in the subalgebra")
        applicable = False
    if not _in_subalgebra(b, s, tol):
        notes.append("precondition violated: b is not in the subalgebra")
        applicable = False
    if not applicable:
        return build_check_report(
            "module_property", measured=float("inf"), threshold=tol,
            applicable=False, notes=notes,
        )
    left = conditional_expectation(a @ x @ b, s)
    right = a @ conditional_expectation(x, s) @ b
    return build_check_report(
        "module_property", measured=l2_distance(left, right), threshold=tol
    )


def trace_preservation_check(x: Element, s: FactorSet, tol: float = 1e-12) -> CheckReport:
    """Check tau(E(x)) = tau(x)."""
    gap = abs(normalized_trace(conditional_expectation(x, s)) - normalized_trace(x))
    return build_check_report("trace_preservation", measured=gap, threshold=tol)


def tower_identity_check(y: Element, j: int, tol: float = 1e-10) -> CheckReport:
    """Check the filtration identities at step j.

    With P_j the expectation onto factors 1..j and Q_j the expectation
    onto everything except factor j: P_j Q_j = P_{j-1} and
    P_j P_{j-1} = P_{j-1}.
    """
    y.require_self_adjoint("tower identity input")
    shape = y.shape
    shape.check_position(j)
    p_j = FactorSet.first(shape, j)
    p_prev = FactorSet.first(shape, j - 1)
    q_j = FactorSet.excluding(shape, j)

    via_q = conditional_expectation(conditional_expectation(y, q_j), p_j)
    prev = conditional_expectation(y, p_prev)
    via_p = conditional_expectation(prev, p_j)

    measured = max(l2_distance(via_q, prev), l2_distance(via_p, prev))
    return build_check_report(
        "tower_identity", measured=measured, threshold=tol, data={"j": j}
    )


def martingale_decomposition(y: Element) -> list[Element]:
    """Increments of y along the filtration by leading factors.

    Returns z_1..z_n with z_j the difference of the expectations onto the
    first j and first j-1 factors. They sum to y - tau(y), are
    self-adjoint, and are pairwise trace-orthogonal.
    """
    y.require_self_adjoint("martingale decomposition input")
    shape = y.shape
    increments = []
    prev = normalized_trace(y).real * Element.identity(shape)
    for j in range(1, shape.n_factors + 1):
        current = conditional_expectation(y, FactorSet.first(shape, j))
        increments.append(current - prev)
        prev = current
    return increments


def martingale_sum_check(y: Element, tol: float = 1e-10) -> CheckReport:
    """Check that the increments sum to the centered element."""
    parts = martingale_decomposition(y)
    total = Element.zeros(y.shape)
    for z in parts:
        total = total + z
    centered = y - normalized_trace(y).real * Element.identity(y.shape)
    return build_check_report(
        "martingale_sum", measured=l2_distance(total, centered), threshold=tol
    )


def martingale_orthogonality_check(y: Element, tol: float = 1e-10) -> CheckReport:
    """Check pairwise trace-orthogonality of the martingale increments."""
    parts = martingale_decomposition(y)
    worst = 0.0
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            worst = max(worst, abs(trace_product(parts[i], parts[j])))
    return build_check_report("martingale_orthogonality", measured=worst, threshold=tol)


def variance_additivity_check(y: Element, tol: float = 1e-9) -> CheckReport:
    """Check var(y) equals the sum of squared increment norms."""
    parts = martingale_decomposition(y)
    total = sum(l2_norm(z) ** 2 for z in parts)
    gap = abs(variance(y) - total)
    return build_check_report(
        "variance_additivity", measured=gap, threshold=tol,
        data={"var": variance(y), "sum_of_squares": total},
    )


def conditional_independence_check(
    x: Element, s1: FactorSet, s2: FactorSet, tol: float = 1e-10
) -> CheckReport:
    """Check E_{S1 union S2}(x) = E_{S1}(x) for x independent of S2.

    Preconditions (disjointness of S1 and S2, and x supported away from
    S2) are verified and reported, never silently assumed.
    """
    notes = []
    applicable = True
    if s1.indices & s2.indices:
        notes.append("precondition violated: S1 and S2 overlap")
        applicable = False
    if not _in_subalgebra(x, s2.complement(), tol):
        notes.append("precondition violated: x is not supported away from S2")
        applicable = False
    if not applicable:
        return build_check_report(
            "conditional_independence", measured=float("inf"), threshold=tol,
            applicable=False, notes=notes,
        )
    joint = conditional_expectation(x, s1.union(s2))
    alone = conditional_expectation(x, s1)
    return build_check_report(
        "conditional_independence",
        measured=l2_distance(joint, alone),
        threshold=tol,
        data={"s1": list(s1.sorted_indices), "s2": list(s2.sorted_indices)},
    )
