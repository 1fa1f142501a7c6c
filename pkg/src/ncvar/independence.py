"""Constructions and numerical tests for independence notions.

Boolean independence is a single-product trace condition; tensor
independence holds structurally for subalgebras over disjoint tensor
factors and is spot-checked on random words; free independence is not
realizable exactly in finite dimensions and is covered by an asymptotic
diagnostic under large Haar-random rotations.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AlgebraShape,
    Element,
    embed_in_factors,
    hermitian_part,
    normalized_trace,
    tensor_embed,
    trace_product,
    variance,
)
from .conditioning import FactorSet
from .reports import CheckReport, build_check_report

__all__ = [
    "boolean_independence_check",
    "tensor_independence_check",
    "boolean_variance_infimum_check",
    "independent_copy_extension",
    "haar_unitary",
    "asymptotic_freeness_diagnostic",
    "random_hermitian",
]


def random_hermitian(rng: np.random.Generator, dim: int, scale: float | None = None) -> np.ndarray:
    """A random Hermitian matrix; default scaling gives 2-norm around 1."""
    if scale is None:
        scale = 1.0 / np.sqrt(2.0 * dim)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitian_part(scale * g)


def boolean_independence_check(x: Element, y: Element, tol: float = 1e-12) -> CheckReport:
    """Check the single-product factorization tau(xy) = tau(x) tau(y)."""
    gap = abs(trace_product(x, y) - normalized_trace(x) * normalized_trace(y))
    return build_check_report("boolean_independence", measured=gap, threshold=tol)


def tensor_independence_check(
    factor_sets: list[FactorSet],
    max_word_len: int = 3,
    samples: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
) -> CheckReport:
    """Fuzz the mixed-moment factorization over random subalgebra elements.

    For random a_ki supported on the k-th factor set, the trace of the
    interleaved product over i of (a_1i a_2i ... a_ni) must factor into
    the per-subalgebra traces. Violations carry the witnessing word.
    """
    if not factor_sets:
        raise ValueError("need at least one factor set")
    shape = factor_sets[0].shape
    seen: set[int] = set()
    for s in factor_sets:
        if s.shape != shape:
            raise ValueError("factor sets live over different shapes")
        if seen & s.indices:
            raise ValueError(f"overlapping factor sets at positions {sorted(seen & s.indices)}")
        seen |= s.indices

    rng = np.random.default_rng((seed, 0x7E4501))
    dims = shape.factor_dims
    worst = 0.0
    witness = None
    for trial in range(samples):
        m = int(rng.integers(1, max_word_len + 1))
        draws = []
        for s in factor_sets:
            d_local = int(np.prod([dims[i - 1] for i in s.sorted_indices] or [1]))
            draws.append([
                embed_in_factors(random_hermitian(rng, d_local), s.sorted_indices, shape)
                for _ in range(m)
            ])
        interleaved = Element.identity(shape)
        per_set = []
        for k, column in enumerate(draws):
            prod_k = column[0]
            for a in column[1:]:
                prod_k = prod_k @ a
            per_set.append(normalized_trace(prod_k))
        for i in range(m):
            for column in draws:
                interleaved = interleaved @ column[i]
        lhs = normalized_trace(interleaved)
        rhs = np.prod(per_set)
        gap = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
        if gap > worst:
            worst = gap
            witness = {"trial": trial, "word_length": m}
    data = {"samples": samples}
    if witness is not None and worst > tol:
        data["witness"] = witness
    return build_check_report(
        "tensor_independence", measured=worst, threshold=tol, data=data
    )


def boolean_variance_infimum_check(
    x: Element, candidates: list[Element], tol: float = 1e-10
) -> CheckReport:
    """Check var(x) <= tau((x-y)^2) over Boolean-independent candidates y.

    Candidates failing self-adjointness or Boolean independence are
    skipped with a note. Attainment is verified at y = tau(x)*1.
    """
    x.require_self_adjoint("variance infimum input")
    var = variance(x)
    notes = []
    worst = 0.0
    admissible = 0
    for i, y in enumerate(candidates):
        if not y.is_self_adjoint():
            notes.append(f"candidate {i} skipped: not self-adjoint")
            continue
        if not boolean_independence_check(x, y).passed:
            notes.append(f"candidate {i} skipped: not Boolean independent of x")
            continue
        admissible += 1
        dist = (trace_product(x, x) - 2 * trace_product(x, y) + trace_product(y, y)).real
        worst = max(worst, var - dist)

    mean_candidate = normalized_trace(x).real * Element.identity(x.shape)
    attained = (
        trace_product(x, x)
        - 2 * trace_product(x, mean_candidate)
        + trace_product(mean_candidate, mean_candidate)
    ).real
    worst = max(worst, abs(attained - var))
    return build_check_report(
        "boolean_variance_infimum",
        measured=worst,
        threshold=tol,
        notes=notes,
        data={"var": var, "admissible": admissible, "attained_at_mean": attained},
    )


def independent_copy_extension(
    locals_: list[np.ndarray], shape: AlgebraShape
) -> tuple[AlgebraShape, list[Element], list[Element]]:
    """Adjoin one fresh tensor factor per input, carrying an identical copy.

    Given n local Hermitian matrices for an n-factor shape, returns the
    2n-factor shape together with the original embeddings (positions
    1..n) and their copies (positions n+1..2n). Copies are identically
    distributed with the originals and everything is pairwise tensor
    independent by construction.
    """
    dims = shape.factor_dims
    if len(locals_) != len(dims):
        raise ValueError(f"expected {len(dims)} local matrices, got {len(locals_)}")
    for j, (local, d) in enumerate(zip(locals_, dims)):
        m = np.asarray(local)
        if m.shape != (d, d):
            raise ValueError(
                f"local matrix {j + 1} must be {d}x{d}, got {m.shape}"
            )
    extended = shape.doubled()
    n = len(dims)
    originals = [tensor_embed(local, j + 1, extended) for j, local in enumerate(locals_)]
    copies = [tensor_embed(local, n + j + 1, extended) for j, local in enumerate(locals_)]
    return extended, originals, copies


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """A Haar-distributed unitary via QR of a Ginibre matrix with phase fix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def asymptotic_freeness_diagnostic(
    a: np.ndarray,
    b: np.ndarray,
    dim: int,
    samples: int = 100,
    seed: int = 0,
    c: float = 10.0,
) -> CheckReport:
    """Mean alternating centered mixed moment of a and a Haar rotation of b.

    With u Haar unitary, the statistic is the average over draws of
    |tau(a0 u b0 u* a0 u b0 u*)| where a0, b0 are the trace-centered
    inputs. Free independence would make it vanish; here it decays like
    1/dim, and the check passes when it is at most c/dim.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != (dim, dim) or b.shape != (dim, dim):
        raise ValueError(f"inputs must be {dim}x{dim}")
    shape = AlgebraShape((dim,))
    Element(shape, a).require_self_adjoint("first diagnostic input")
    Element(shape, b).require_self_adjoint("second diagnostic input")

    a0 = a - (np.trace(a) / dim) * np.eye(dim)
    b0 = b - (np.trace(b) / dim) * np.eye(dim)
    rng = np.random.default_rng((seed, 0xF4EE))
    total = 0.0
    for _ in range(samples):
        u = haar_unitary(rng, dim)
        rotated = u @ b0 @ u.conj().T
        word = a0 @ rotated @ a0 @ rotated
        total += abs(np.trace(word) / dim)
    statistic = total / samples
    return build_check_report(
        "asymptotic_freeness",
        measured=statistic,
        threshold=c / dim,
        data={"dim": dim, "samples": samples, "c": c},
    )
