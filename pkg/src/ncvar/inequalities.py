"""One checkable operation per variance/norm inequality.

Every operation returns an InequalityReport carrying the measured
hypotheses, both sides, and the slack. Conditional statements whose
hypotheses fail are reported as not applicable rather than violated.
"""

from __future__ import annotations

import numpy as np

from .core import (
    AlgebraShape,
    Element,
    embed_in_factors,
    l2_norm,
    normalized_trace,
    partial_trace,
    schatten_norm,
    tensor_embed,
    trace_product,
    variance,
)
from .conditioning import FactorSet, conditional_expectation
from .polynomials import NcPolynomial, eval_poly
from .reports import (
    REL_TOL,
    InequalityReport,
    build_inequality_report,
    check_hypothesis,
)

__all__ = [
    "lemma_variance_bound",
    "efron_stein_check",
    "steele_check",
    "matrix_efron_stein_check",
    "kadison_step_check",
    "norm_inequality_check",
    "trace_jensen_check",
]

COPY_MODES = ("extension", "literal-reuse")
REALIZATIONS = ("coupled", "strict")


def _embedded_inputs(
    f: NcPolynomial, locals_, shape: AlgebraShape
) -> dict[str, Element]:
    if len(f.inputs) != len(locals_):
        raise ValueError(
            f"polynomial declares {len(f.inputs)} inputs but {len(locals_)} "
            f"local matrices were given"
        )
    if len(locals_) != shape.n_factors:
        raise ValueError(
            f"expected one local matrix per factor of {shape.factor_dims}, "
            f"got {len(locals_)}"
        )
    return {
        name: tensor_embed(local, j + 1, shape)
        for j, (name, local) in enumerate(zip(f.inputs, locals_))
    }


def lemma_variance_bound(
    f: NcPolynomial, locals_, shape: AlgebraShape, rel_tol: float = REL_TOL
) -> InequalityReport:
    """var(f(x)) <= sum_j tau((f(x) - E_j f(x))^2), E_j omitting factor j.

    The inputs are embedded in disjoint tensor factors, so the
    independence hypothesis holds structurally.
    """
    bindings = _embedded_inputs(f, locals_, shape)
    y = eval_poly(f, bindings, shape=shape)
    lhs = variance(y)
    rhs = 0.0
    for j in range(1, shape.n_factors + 1):
        e_j = conditional_expectation(y, FactorSet.excluding(shape, j))
        rhs += l2_norm(y - e_j) ** 2
    return build_inequality_report(
        "lemma_variance_bound", lhs, rhs, rel_tol=rel_tol,
        tags={"shape": list(shape.factor_dims)},
    )


def _copy_ambiguity_tag(copy_mode: str) -> str:
    if copy_mode == "extension":
        return "resampled inputs live in fresh tensor factors"
    return "resampled input reused from the other inputs (wording ambiguous)"


def efron_stein_check(
    f: NcPolynomial,
    locals_,
    shape: AlgebraShape,
    copy_mode: str = "extension",
    rel_tol: float = REL_TOL,
) -> InequalityReport:
    """var(y) <= (1/2) sum_j tau((y - y'_j)^2) under the two trace hypotheses.

    Per j the hypotheses tau(y y'_j) <= |E_j(y)|_2^2 and
    tau((y'_j)^2) >= tau(y^2) are measured and recorded; if any fails the
    conclusion is reported as not applicable. In extension mode the j-th
    resampled input is an identical copy embedded in a fresh tensor
    factor (evaluated in the algebra extended by that one factor, which
    leaves every trace unchanged); in literal-reuse mode it is the next
    input, cyclically.
    """
    if copy_mode not in COPY_MODES:
        raise ValueError(f"copy_mode must be one of {COPY_MODES}")
    n = shape.n_factors
    if copy_mode == "literal-reuse" and n < 2:
        raise ValueError("literal-reuse mode needs at least two inputs")

    bindings = _embedded_inputs(f, locals_, shape)
    names = f.inputs
    y = eval_poly(f, bindings, shape=shape)
    lhs = variance(y)

    hypotheses = []
    rhs = 0.0
    for j in range(1, n + 1):
        if copy_mode == "extension":
            d_j = shape.factor_dims[j - 1]
            ext = shape.appended(d_j)
            ext_bind = {
                name: tensor_embed(local, k + 1, ext)
                for k, (name, local) in enumerate(zip(names, locals_))
            }
            y_here = eval_poly(f, ext_bind, shape=ext)
            swapped = dict(ext_bind)
            swapped[names[j - 1]] = tensor_embed(locals_[j - 1], n + 1, ext)
            y_prime = eval_poly(f, swapped, shape=ext)
            e_j = conditional_expectation(y_here, FactorSet.excluding(ext, j))
        else:
            k = j % n + 1
            swapped = dict(bindings)
            swapped[names[j - 1]] = bindings[names[k - 1]]
            y_here = y
            y_prime = eval_poly(f, swapped, shape=shape)
            e_j = conditional_expectation(y_here, FactorSet.excluding(shape, j))

        cross = trace_product(y_here, y_prime).real
        hypotheses.append(check_hypothesis(
            f"tau(y y'_{j}) <= |E_{j}(y)|_2^2", cross, l2_norm(e_j) ** 2,
            relation="<=", tol=rel_tol,
        ))
        hypotheses.append(check_hypothesis(
            f"tau((y'_{j})^2) >= tau(y^2)", l2_norm(y_prime) ** 2, l2_norm(y_here) ** 2,
            relation=">=", tol=rel_tol,
        ))
        rhs += 0.5 * l2_norm(y_here - y_prime) ** 2

    return build_inequality_report(
        "efron_stein", lhs, rhs, hypotheses=hypotheses, rel_tol=rel_tol,
        tags={
            "copy_mode": copy_mode,
            "copy_semantics": _copy_ambiguity_tag(copy_mode),
            "shape": list(shape.factor_dims),
        },
    )


def steele_check(
    f: NcPolynomial,
    locals_,
    shape: AlgebraShape,
    f_js: list[NcPolynomial],
    rel_tol: float = REL_TOL,
) -> InequalityReport:
    """var(y) <= sum_j tau((y - y_j)^2) with y_j built without input j.

    Each omit-one polynomial is validated syntactically; referencing the
    omitted input is rejected. The per-j domination
    tau((y - E_j(y))^2) <= tau((y - y_j)^2) is recorded in the tags.
    """
    n = shape.n_factors
    if len(f_js) != n:
        raise ValueError(f"expected {n} omit-one polynomials, got {len(f_js)}")
    names = f.inputs
    for j, f_j in enumerate(f_js, start=1):
        if f_j.references(names[j - 1]):
            raise ValueError(
                f"omit-one polynomial {j} references the omitted input {names[j - 1]!r}"
            )

    bindings = _embedded_inputs(f, locals_, shape)
    y = eval_poly(f, bindings, shape=shape)
    lhs = variance(y)

    rhs = 0.0
    per_j = []
    per_j_ok = True
    for j, f_j in enumerate(f_js, start=1):
        y_j = eval_poly(f_j, bindings, shape=shape)
        term = l2_norm(y - y_j) ** 2
        e_j = conditional_expectation(y, FactorSet.excluding(shape, j))
        inner = l2_norm(y - e_j) ** 2
        ok = inner <= term + rel_tol * max(1.0, abs(term))
        per_j_ok = per_j_ok and ok
        per_j.append({"j": j, "conditioned": inner, "omit_one": term, "dominated": ok})
        rhs += term

    return build_inequality_report(
        "steele", lhs, rhs, rel_tol=rel_tol,
        tags={
            "shape": list(shape.factor_dims),
            "per_term_domination": per_j,
            "per_term_domination_ok": per_j_ok,
        },
    )


def matrix_efron_stein_check(
    f: NcPolynomial,
    d: int,
    locals_,
    inner_shape: AlgebraShape,
    copy_mode: str = "extension",
    realization: str = "coupled",
    rel_tol: float = REL_TOL,
) -> InequalityReport:
    """tau(tr((V - tau(V))^2)) <= (1/2) tau(tr(sum_j (V - V^(j))^2)).

    The ambient algebra is d x d matrices over the inner tensor algebra,
    realized by prepending a factor of dimension d; tau(V) is the
    entrywise trace over the inner factors, re-embedded. Inputs U_j are
    Hermitian and supported, per realization, either on the d-leg plus
    inner factor j ("coupled", subalgebras share the matrix leg) or on
    inner factor j alone ("strict", genuinely tensor independent); both
    readings are provided and tagged. The trace hypotheses mirror the
    scalar case, and the internal reduction step
    lhs <= d*var(V) is recorded in the tags.
    """
    if copy_mode not in COPY_MODES:
        raise ValueError(f"copy_mode must be one of {COPY_MODES}")
    if realization not in REALIZATIONS:
        raise ValueError(f"realization must be one of {REALIZATIONS}")
    d = int(d)
    if d < 1:
        raise ValueError(f"matrix leg dimension must be >= 1, got {d}")
    n = inner_shape.n_factors
    if len(f.inputs) != n or len(locals_) != n:
        raise ValueError("need one input name and one local matrix per inner factor")
    if copy_mode == "literal-reuse" and n < 2:
        raise ValueError("literal-reuse mode needs at least two inputs")

    full = inner_shape.prefixed(d)
    names = f.inputs

    def support(j: int) -> tuple[int, ...]:
        # factor positions of U_j in `full`: d-leg is position 1, inner j is 1+j
        return (1, 1 + j) if realization == "coupled" else (1 + j,)

    def expected_dim(j: int) -> int:
        inner_d = inner_shape.factor_dims[j - 1]
        return d * inner_d if realization == "coupled" else inner_d

    for j, local in enumerate(locals_, start=1):
        m = np.asarray(local)
        e = expected_dim(j)
        if m.shape != (e, e):
            raise ValueError(
                f"local matrix {j} must be {e}x{e} for realization "
                f"{realization!r}, got {m.shape}"
            )

    bindings = {
        names[j - 1]: embed_in_factors(locals_[j - 1], support(j), full)
        for j in range(1, n + 1)
    }
    v = eval_poly(f, bindings, shape=full)

    entrywise = partial_trace(v, (1,))  # d x d matrix of inner traces
    tau_v = embed_in_factors(entrywise, (1,), full)
    lhs = d * l2_norm(v - tau_v) ** 2
    mid = d * variance(v)

    hypotheses = []
    rhs = 0.0
    for j in range(1, n + 1):
        if copy_mode == "extension":
            d_j = inner_shape.factor_dims[j - 1]
            ext = full.appended(d_j)
            copy_support = (1, n + 2) if realization == "coupled" else (n + 2,)
            ext_bind = {
                names[k - 1]: embed_in_factors(
                    locals_[k - 1],
                    (1, 1 + k) if realization == "coupled" else (1 + k,),
                    ext,
                )
                for k in range(1, n + 1)
            }
            v_here = eval_poly(f, ext_bind, shape=ext)
            swapped = dict(ext_bind)
            swapped[names[j - 1]] = embed_in_factors(locals_[j - 1], copy_support, ext)
            v_prime = eval_poly(f, swapped, shape=ext)
            e_j = conditional_expectation(v_here, FactorSet.excluding(ext, 1 + j))
        else:
            k = j % n + 1
            swapped = dict(bindings)
            swapped[names[j - 1]] = bindings[names[k - 1]]
            v_here = v
            v_prime = eval_poly(f, swapped, shape=full)
            e_j = conditional_expectation(v_here, FactorSet.excluding(full, 1 + j))

        cross = trace_product(v_here, v_prime).real
        hypotheses.append(check_hypothesis(
            f"tau(V V^({j})) <= |E_{j}(V)|_2^2", cross, l2_norm(e_j) ** 2,
            relation="<=", tol=rel_tol,
        ))
        hypotheses.append(check_hypothesis(
            f"tau((V^({j}))^2) >= tau(V^2)", l2_norm(v_prime) ** 2,
            l2_norm(v_here) ** 2, relation=">=", tol=rel_tol,
        ))
        rhs += 0.5 * d * l2_norm(v_here - v_prime) ** 2

    return build_inequality_report(
        "matrix_efron_stein", lhs, rhs, hypotheses=hypotheses, rel_tol=rel_tol,
        tags={
            "d": d,
            "inner_shape": list(inner_shape.factor_dims),
            "realization": realization,
            "copy_mode": copy_mode,
            "copy_semantics": _copy_ambiguity_tag(copy_mode),
            "reduction_step_lhs": lhs,
            "reduction_step_mid": mid,
            "reduction_step_ok": lhs <= mid + rel_tol * max(1.0, abs(mid)),
        },
    )


def kadison_step_check(a: np.ndarray, rel_tol: float = REL_TOL) -> InequalityReport:
    """(tr a)^2 / d <= tr(a^2) for Hermitian a, with equality iff a is scalar."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"input must be a square matrix, got {m.shape}")
    defect = float(np.max(np.abs(m - m.conj().T)))
    if defect > 1e-12:
        raise ValueError(f"input is not Hermitian (max deviation {defect:.3e})")
    d = m.shape[0]
    tr = float(np.trace(m).real)
    lhs = tr**2 / d
    rhs = float(np.trace(m @ m).real)
    # slack equals the squared Frobenius distance to the nearest scalar matrix
    deviation = float(np.linalg.norm(m - (tr / d) * np.eye(d)) ** 2)
    pad = rel_tol * max(1.0, abs(rhs))
    equality = rhs - lhs <= pad
    scalar = deviation <= pad
    return build_inequality_report(
        "kadison_step", lhs, rhs, rel_tol=rel_tol,
        tags={
            "d": d,
            "equality": equality,
            "scalar_matrix": scalar,
            "equality_iff_scalar_ok": equality == scalar,
        },
    )


def norm_inequality_check(
    locals_, shape: AlgebraShape, rel_tol: float = REL_TOL
) -> InequalityReport:
    """|S|_2^2 <= |S|_1^2 + sum_j |x_j|_2^2 for S the sum of embedded inputs."""
    if len(locals_) != shape.n_factors:
        raise ValueError(
            f"expected one local matrix per factor of {shape.factor_dims}, "
            f"got {len(locals_)}"
        )
    xs = [tensor_embed(local, j + 1, shape) for j, local in enumerate(locals_)]
    total = Element.zeros(shape)
    for x in xs:
        x.require_self_adjoint("norm inequality input")
        total = total + x
    lhs = l2_norm(total) ** 2
    rhs = schatten_norm(total, 1) ** 2 + sum(l2_norm(x) ** 2 for x in xs)
    return build_inequality_report(
        "norm_inequality", lhs, rhs, rel_tol=rel_tol,
        tags={"shape": list(shape.factor_dims)},
    )


def trace_jensen_check(y: Element, rel_tol: float = REL_TOL) -> InequalityReport:
    """tau(y)^2 <= tau(y^2) for self-adjoint y; equality iff y is scalar."""
    y.require_self_adjoint("trace Jensen input")
    mean = normalized_trace(y).real
    lhs = mean**2
    rhs = l2_norm(y) ** 2
    pad = rel_tol * max(1.0, abs(rhs))
    centered = y - mean * Element.identity(y.shape)
    scalar = l2_norm(centered) ** 2 <= pad
    return build_inequality_report(
        "trace_jensen", lhs, rhs, rel_tol=rel_tol,
        tags={"equality": rhs - lhs <= pad, "scalar_element": scalar},
    )
