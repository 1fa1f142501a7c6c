"""Randomized scenario generation and the built-in verification suite.

A scenario is a random tensor shape with one Hermitian local matrix per
factor and a random polynomial; every unconditional inequality and every
conditioning property is checked on it. Generation is deterministic
given (seed, index), so scenario-level parallelism cannot change any
report.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import AlgebraShape, Element, embed_in_factors, normalized_trace, tensor_embed
from .conditioning import (
    FactorSet,
    conditional_independence_check,
    martingale_orthogonality_check,
    martingale_sum_check,
    module_property_check,
    tower_identity_check,
    trace_preservation_check,
    variance_additivity_check,
)
from .independence import (
    boolean_independence_check,
    boolean_variance_infimum_check,
    random_hermitian,
    tensor_independence_check,
)
from .inequalities import (
    efron_stein_check,
    kadison_step_check,
    lemma_variance_bound,
    matrix_efron_stein_check,
    norm_inequality_check,
    steele_check,
    trace_jensen_check,
)
from .polynomials import NcPolynomial, eval_poly, sum_of_inputs, variables
from .core import variance_inf_lambda_check

__all__ = [
    "Tolerances",
    "FuzzScenario",
    "CRITERION_CHECKS",
    "ALL_CHECKS",
    "build_scenario",
    "run_scenario",
    "hand_cases",
    "run_suite",
]

FUZZ_TOTAL_DIM_CAP = 256
MATRIX_ES_WORK_CAP = 2048  # on d * total_dim * max inner dim

# groups exercised per scenario; "criterion" names the unconditional core
CRITERION_CHECKS = frozenset(
    {"lemma", "steele", "norm", "jensen", "kadison", "conditioning"}
)
ALL_CHECKS = CRITERION_CHECKS | {"independence", "efron_stein", "matrix_efron_stein"}

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class Tolerances:
    """All comparison thresholds in one place; override for negative controls."""

    inequality_rel: float = 1e-9
    module_property: float = 1e-10
    trace_preservation: float = 1e-12
    tower: float = 1e-10
    martingale_sum: float = 1e-10
    orthogonality: float = 1e-10
    variance_additivity: float = 1e-9
    conditional_independence: float = 1e-10
    boolean: float = 1e-12
    boolean_variance_infimum: float = 1e-10
    tensor_independence: float = 1e-10
    variance_inf_lambda: float = 1e-9

    @classmethod
    def uniform(cls, tol: float) -> "Tolerances":
        return cls(**{name: float(tol) for name in cls.__dataclass_fields__})


@dataclass(frozen=True)
class FuzzScenario:
    index: int
    shape: AlgebraShape
    locals_: tuple[np.ndarray, ...]
    f: NcPolynomial
    f_js: tuple[NcPolynomial, ...]
    kadison_matrix: np.ndarray
    matrix_d: int
    matrix_locals: tuple[np.ndarray, ...]


def _random_general(rng: np.random.Generator, dim: int) -> np.ndarray:
    scale = 1.0 / np.sqrt(2.0 * dim)
    return scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))


def _random_polynomial(
    rng: np.random.Generator, names: tuple[str, ...], max_degree: int
) -> NcPolynomial:
    n_terms = int(rng.integers(1, 5))
    terms = []
    for _ in range(n_terms):
        length = int(rng.integers(0, max_degree + 1))
        word = tuple(
            (names[int(rng.integers(0, len(names)))], bool(rng.random() < 0.15))
            for _ in range(length)
        )
        coeff = complex(rng.standard_normal())
        if rng.random() < 0.3:
            coeff += 1j * rng.standard_normal()
        terms.append((coeff, word))
    return NcPolynomial(names, tuple(terms))


def build_scenario(
    seed: int,
    index: int,
    max_factors: int = 4,
    max_local_dim: int = 3,
    max_degree: int = 3,
) -> FuzzScenario:
    rng = np.random.default_rng((seed, index))
    n_target = int(rng.integers(1, max_factors + 1))
    dims: list[int] = []
    total = 1
    for _ in range(n_target):
        if rng.random() < 0.1:
            d = 1
        else:
            d = int(rng.integers(2, max_local_dim + 1)) if max_local_dim >= 2 else 1
        if total * d > FUZZ_TOTAL_DIM_CAP:
            break
        dims.append(d)
        total *= d
    if not dims:
        dims = [1]
    shape = AlgebraShape(tuple(dims))
    n = shape.n_factors

    locals_ = tuple(random_hermitian(rng, d) for d in dims)
    names = tuple(f"x{j + 1}" for j in range(n))
    f = _random_polynomial(rng, names, max_degree)
    f_js = tuple(f.without_input(name) for name in names)
    kadison = random_hermitian(rng, int(rng.integers(1, 7)), scale=1.0)

    matrix_d = int(rng.integers(1, 3))
    matrix_locals = tuple(random_hermitian(rng, matrix_d * d) for d in dims)
    return FuzzScenario(
        index=index,
        shape=shape,
        locals_=locals_,
        f=f,
        f_js=f_js,
        kadison_matrix=kadison,
        matrix_d=matrix_d,
        matrix_locals=matrix_locals,
    )


def _wrap(scenario_label: str, check_label: str, report) -> dict:
    record = report.to_dict()
    record["scenario"] = scenario_label
    record["check"] = check_label
    return record


def run_scenario(
    scenario: FuzzScenario,
    include: frozenset[str] = ALL_CHECKS,
    tols: Tolerances = Tolerances(),
) -> list[dict]:
    """Run the selected check groups on one scenario, one record per check."""
    shape = scenario.shape
    n = shape.n_factors
    label = f"fuzz:{scenario.index}"
    rng = np.random.default_rng((0xC0FFEE, scenario.index))
    bindings = {
        name: tensor_embed(local, j + 1, shape)
        for j, (name, local) in enumerate(zip(scenario.f.inputs, scenario.locals_))
    }
    y = eval_poly(scenario.f, bindings, shape=shape)
    rel = tols.inequality_rel
    records: list[dict] = []

    if "lemma" in include:
        records.append(_wrap(label, "lemma_variance_bound",
                             lemma_variance_bound(scenario.f, scenario.locals_, shape, rel_tol=rel)))
    if "steele" in include:
        records.append(_wrap(label, "steele",
                             steele_check(scenario.f, scenario.locals_, shape, list(scenario.f_js), rel_tol=rel)))
    if "norm" in include:
        records.append(_wrap(label, "norm_inequality",
                             norm_inequality_check(scenario.locals_, shape, rel_tol=rel)))
    if "jensen" in include:
        records.append(_wrap(label, "trace_jensen", trace_jensen_check(y, rel_tol=rel)))
    if "kadison" in include:
        records.append(_wrap(label, "kadison_step",
                             kadison_step_check(scenario.kadison_matrix, rel_tol=rel)))

    if "conditioning" in include:
        s_mask = [bool(rng.random() < 0.5) for _ in range(n)]
        s = FactorSet.of(shape, {j + 1 for j, keep in enumerate(s_mask) if keep})
        d_local = int(np.prod([shape.factor_dims[i - 1] for i in s.sorted_indices] or [1]))
        a = embed_in_factors(_random_general(rng, d_local), s.sorted_indices, shape)
        b = embed_in_factors(_random_general(rng, d_local), s.sorted_indices, shape)
        x_mid = Element(shape, random_hermitian(rng, shape.total_dim, scale=1.0 / np.sqrt(shape.total_dim)))
        records.append(_wrap(label, "module_property",
                             module_property_check(a, x_mid, b, s, tol=tols.module_property)))
        records.append(_wrap(label, "trace_preservation",
                             trace_preservation_check(y, s, tol=tols.trace_preservation)))
        for j in range(1, n + 1):
            records.append(_wrap(label, f"tower_identity_{j}",
                                 tower_identity_check(y, j, tol=tols.tower)))
        records.append(_wrap(label, "martingale_sum", martingale_sum_check(y, tol=tols.martingale_sum)))
        records.append(_wrap(label, "martingale_orthogonality",
                             martingale_orthogonality_check(y, tol=tols.orthogonality)))
        records.append(_wrap(label, "variance_additivity",
                             variance_additivity_check(y, tol=tols.variance_additivity)))
        if n >= 2:
            positions = list(rng.permutation(n) + 1)
            s2 = FactorSet.of(shape, {int(positions[0])})
            rest = [int(p) for p in positions[1:]]
            support = rest[: max(1, int(rng.integers(1, len(rest) + 1)))]
            d_sup = int(np.prod([shape.factor_dims[i - 1] for i in sorted(support)]))
            x_ind = embed_in_factors(random_hermitian(rng, d_sup), sorted(support), shape)
            s1 = FactorSet.of(shape, {p for p in rest if rng.random() < 0.5})
            records.append(_wrap(label, "conditional_independence",
                                 conditional_independence_check(x_ind, s1, s2, tol=tols.conditional_independence)))

    if "independence" in include:
        records.append(_wrap(label, "variance_inf_lambda",
                             variance_inf_lambda_check(
                                 y,
                                 [normalized_trace(y).real + off for off in (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)],
                                 tol=tols.variance_inf_lambda,
                             )))
        x1 = tensor_embed(scenario.locals_[0], 1, shape)
        candidates = [normalized_trace(x1).real * Element.identity(shape)]
        if n >= 2:
            candidates.append(tensor_embed(scenario.locals_[1], 2, shape))
            records.append(_wrap(label, "boolean_independence",
                                 boolean_independence_check(x1, candidates[1], tol=tols.boolean)))
            half = n // 2
            sets = [
                FactorSet.of(shape, range(1, half + 1)),
                FactorSet.of(shape, range(half + 1, n + 1)),
            ]
            records.append(_wrap(label, "tensor_independence",
                                 tensor_independence_check(sets, max_word_len=2, samples=4,
                                                           seed=scenario.index,
                                                           tol=tols.tensor_independence)))
        records.append(_wrap(label, "boolean_variance_infimum",
                             boolean_variance_infimum_check(x1, candidates,
                                                            tol=tols.boolean_variance_infimum)))

    if "efron_stein" in include:
        records.append(_wrap(label, "efron_stein_extension",
                             efron_stein_check(scenario.f, scenario.locals_, shape,
                                               copy_mode="extension", rel_tol=rel)))
        if n >= 2:
            records.append(_wrap(label, "efron_stein_literal",
                                 efron_stein_check(scenario.f, scenario.locals_, shape,
                                                   copy_mode="literal-reuse", rel_tol=rel)))

    if "matrix_efron_stein" in include:
        work = scenario.matrix_d * shape.total_dim * max(shape.factor_dims)
        if work <= MATRIX_ES_WORK_CAP:
            records.append(_wrap(label, "matrix_efron_stein_coupled",
                                 matrix_efron_stein_check(scenario.f, scenario.matrix_d,
                                                          scenario.matrix_locals, shape,
                                                          realization="coupled", rel_tol=rel)))
            records.append(_wrap(label, "matrix_efron_stein_strict",
                                 matrix_efron_stein_check(scenario.f, scenario.matrix_d,
                                                          scenario.locals_, shape,
                                                          realization="strict", rel_tol=rel)))
    return records


# ---------------------------------------------------------------------------
# Hand-derived cases: fixed inputs with known two-sided values
# ---------------------------------------------------------------------------

def hand_cases(tols: Tolerances = Tolerances()) -> list[dict]:
    rel = tols.inequality_rel
    two = AlgebraShape((2, 2))
    one = AlgebraShape((2,))
    x1, x2 = variables("x1", "x2")
    f_sum = x1 + x2
    f_prod = x1 * x2
    f_one = NcPolynomial.one(("x1", "x2"))
    pauli = (PAULI_Z, PAULI_X)
    z_embedded = tensor_embed(PAULI_Z, 1, two)
    x_embedded = tensor_embed(PAULI_X, 2, two)
    y_sum = z_embedded + x_embedded
    diag13 = Element(one, np.diag([1.0, 3.0]))

    out: list[dict] = []

    def add(check: str, report) -> None:
        out.append(_wrap(f"hand:{check}", check, report))

    add("lemma_pauli_sum", lemma_variance_bound(f_sum, pauli, two, rel_tol=rel))
    add("lemma_pauli_product", lemma_variance_bound(f_prod, pauli, two, rel_tol=rel))
    add("lemma_constant", lemma_variance_bound(f_one, pauli, two, rel_tol=rel))

    omit = [f_sum.without_input("x1"), f_sum.without_input("x2")]
    add("steele_pauli_sum", steele_check(f_sum, pauli, two, omit, rel_tol=rel))
    zero2 = NcPolynomial.zero(("x1", "x2"))
    add("steele_pauli_product", steele_check(f_prod, pauli, two, [zero2, zero2], rel_tol=rel))

    add("efron_stein_pauli_sum", efron_stein_check(f_sum, pauli, two, rel_tol=rel))
    add("efron_stein_pauli_product", efron_stein_check(f_prod, pauli, two, rel_tol=rel))
    add("efron_stein_constant", efron_stein_check(f_one, pauli, two, rel_tol=rel))

    add("norm_pauli_pair", norm_inequality_check(pauli, two, rel_tol=rel))
    add("norm_single_z", norm_inequality_check((PAULI_Z,), one, rel_tol=rel))
    add("norm_zeros", norm_inequality_check((np.zeros((2, 2)), np.zeros((2, 2))), two, rel_tol=rel))

    add("jensen_identity", trace_jensen_check(Element.identity(one), rel_tol=rel))
    add("jensen_pauli_z", trace_jensen_check(Element(one, PAULI_Z), rel_tol=rel))
    add("jensen_diag_1_3", trace_jensen_check(diag13, rel_tol=rel))

    add("kadison_identity", kadison_step_check(np.eye(2), rel_tol=rel))
    add("kadison_diag_1_3", kadison_step_check(np.diag([1.0, 3.0]), rel_tol=rel))
    add("kadison_traceless", kadison_step_check(np.diag([1.0, -1.0]), rel_tol=rel))

    add("matrix_es_strict_pauli", matrix_efron_stein_check(
        f_sum, 2, pauli, two, realization="strict", rel_tol=rel))
    add("matrix_es_d1_pauli", matrix_efron_stein_check(
        f_sum, 1, pauli, two, realization="coupled", rel_tol=rel))

    add("variance_inf_lambda_z", variance_inf_lambda_check(
        Element(one, PAULI_Z), [-1.0, 0.0, 1.0], tol=tols.variance_inf_lambda))
    add("variance_inf_lambda_diag", variance_inf_lambda_check(
        diag13, [0.0, 1.0, 2.0, 3.0], tol=tols.variance_inf_lambda))

    add("boolean_variance_infimum_pauli", boolean_variance_infimum_check(
        z_embedded, [x_embedded], tol=tols.boolean_variance_infimum))
    add("boolean_disjoint_pair", boolean_independence_check(
        z_embedded, x_embedded, tol=tols.boolean))
    add("tensor_independence_pair", tensor_independence_check(
        [FactorSet.of(two, {1}), FactorSet.of(two, {2})],
        max_word_len=2, samples=6, seed=3, tol=tols.tensor_independence))

    add("trace_preservation_pauli", trace_preservation_check(
        y_sum, FactorSet.of(two, {1}), tol=tols.trace_preservation))
    add("tower_identity_pauli", tower_identity_check(y_sum, 2, tol=tols.tower))
    add("martingale_sum_pauli", martingale_sum_check(y_sum, tol=tols.martingale_sum))
    add("martingale_orthogonality_pauli", martingale_orthogonality_check(
        y_sum, tol=tols.orthogonality))
    add("variance_additivity_pauli", variance_additivity_check(
        y_sum, tol=tols.variance_additivity))

    three = AlgebraShape((2, 2, 2))
    zx_embedded = embed_in_factors(np.kron(PAULI_Z, PAULI_X), (1, 2), three)
    add("conditional_independence_pauli", conditional_independence_check(
        zx_embedded, FactorSet.of(three, {1}), FactorSet.of(three, {3}),
        tol=tols.conditional_independence))
    add("module_property_pauli", module_property_check(
        z_embedded, Element(two, np.kron(PAULI_Z, PAULI_X)), Element.identity(two),
        FactorSet.of(two, {1}), tol=tols.module_property))
    return out


def run_suite(
    seed: int = 42,
    fuzz_count: int = 500,
    max_factors: int = 4,
    max_local_dim: int = 3,
    tols: Tolerances = Tolerances(),
    include: frozenset[str] = ALL_CHECKS,
    threads: int = 1,
) -> list[dict]:
    """Hand-derived cases plus a fuzz campaign; deterministic record order."""
    records = hand_cases(tols)

    def one(index: int) -> list[dict]:
        scenario = build_scenario(seed, index, max_factors=max_factors,
                                  max_local_dim=max_local_dim)
        return run_scenario(scenario, include=include, tols=tols)

    if threads > 1 and fuzz_count > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, range(fuzz_count)))
    else:
        chunks = [one(i) for i in range(fuzz_count)]
    for chunk in chunks:
        records.extend(chunk)
    for i, record in enumerate(records):
        record["index"] = i
    return records
