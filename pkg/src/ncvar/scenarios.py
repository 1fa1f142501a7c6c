"""Scenario files: JSON descriptions of algebra and Monte Carlo checks.

An algebra scenario names a tensor shape, one Hermitian local matrix per
factor (row-major [re, im] pairs), a polynomial, and the checks to run.
A Monte Carlo scenario names distributions, a scalar or matrix function,
a sample count, and a seed. Parse errors carry the offending field.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .core import AlgebraShape, Element, pairs_to_matrix, tensor_embed
from .conditioning import (
    FactorSet,
    martingale_orthogonality_check,
    martingale_sum_check,
    tower_identity_check,
    trace_preservation_check,
    variance_additivity_check,
)
from .fuzz import Tolerances, _wrap
from .inequalities import (
    efron_stein_check,
    lemma_variance_bound,
    norm_inequality_check,
    steele_check,
    trace_jensen_check,
)
from .montecarlo import (
    MatrixFunction,
    ScalarDistribution,
    ScalarFunction,
    classical_efron_stein_mc,
    matrix_efron_stein_mc,
)
from .polynomials import NcPolynomial, eval_poly

__all__ = [
    "ScenarioError",
    "BUILTIN_SCENARIOS",
    "builtin_scenario_text",
    "load_scenario",
    "run_scenario_data",
]

ALGEBRA_CHECKS = (
    "lemma_variance_bound",
    "steele",
    "efron_stein",
    "norm_inequality",
    "trace_jensen",
    "conditioning",
)

BUILTIN_SCENARIOS = (
    "pauli-sum",
    "pauli-sum-literal",
    "rademacher-sum",
    "diagonal-matrix-sum",
)


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""


def builtin_scenario_text(name: str) -> str:
    if name not in BUILTIN_SCENARIOS:
        raise ScenarioError(
            f"unknown builtin scenario {name!r}; available: {', '.join(BUILTIN_SCENARIOS)}"
        )
    fname = name.replace("-", "_") + ".json"
    return resources.files("ncvar").joinpath("data", fname).read_text()


def load_scenario(source: str | Path) -> dict:
    """Read and parse a scenario file, reporting position on parse errors."""
    text = Path(source).read_text()
    return parse_scenario_text(text, label=str(source))


def parse_scenario_text(text: str, label: str = "<scenario>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{label}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{label}: top level must be an object")
    return data


def _field(data: dict, key: str, label: str):
    if key not in data:
        raise ScenarioError(f"{label}: missing field {key!r}")
    return data[key]


def _parse_matrix(value, label: str) -> np.ndarray:
    try:
        return pairs_to_matrix(value)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{label}: {exc}") from None


def _run_algebra(data: dict, tols: Tolerances) -> list[dict]:
    name = str(data.get("name", "scenario"))
    label = f"scenario:{name}"
    shape = AlgebraShape(tuple(int(d) for d in _field(data, "shape", label)))
    raw_locals = _field(data, "locals", label)
    if len(raw_locals) != shape.n_factors:
        raise ScenarioError(
            f"{label}: field 'locals' must list {shape.n_factors} matrices"
        )
    locals_ = tuple(
        _parse_matrix(m, f"{label} field 'locals[{j}]'") for j, m in enumerate(raw_locals)
    )
    for j, (m, d) in enumerate(zip(locals_, shape.factor_dims)):
        if m.shape != (d, d):
            raise ScenarioError(f"{label}: locals[{j}] must be {d}x{d}, got {m.shape}")
    try:
        f = NcPolynomial.from_dict(_field(data, "f", label))
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(f"{label} field 'f': {exc}") from None
    if len(f.inputs) != shape.n_factors:
        raise ScenarioError(
            f"{label}: polynomial declares {len(f.inputs)} inputs for "
            f"{shape.n_factors} factors"
        )
    copy_mode = str(data.get("copy_mode", "extension"))
    checks = data.get("checks", list(ALGEBRA_CHECKS))
    unknown = [c for c in checks if c not in ALGEBRA_CHECKS]
    if unknown:
        raise ScenarioError(
            f"{label}: unknown checks {unknown}; available: {list(ALGEBRA_CHECKS)}"
        )

    rel = tols.inequality_rel
    bindings = {
        n_: tensor_embed(loc, j + 1, shape)
        for j, (n_, loc) in enumerate(zip(f.inputs, locals_))
    }
    y = eval_poly(f, bindings, shape=shape)

    records: list[dict] = []
    if "lemma_variance_bound" in checks:
        records.append(_wrap(label, "lemma_variance_bound",
                             lemma_variance_bound(f, locals_, shape, rel_tol=rel)))
    if "steele" in checks:
        if "steele_fjs" in data:
            try:
                f_js = [NcPolynomial.from_dict(p) for p in data["steele_fjs"]]
            except (ValueError, TypeError, KeyError) as exc:
                raise ScenarioError(f"{label} field 'steele_fjs': {exc}") from None
        else:
            f_js = [f.without_input(n_) for n_ in f.inputs]
        records.append(_wrap(label, "steele",
                             steele_check(f, locals_, shape, f_js, rel_tol=rel)))
    if "efron_stein" in checks:
        records.append(_wrap(label, "efron_stein",
                             efron_stein_check(f, locals_, shape, copy_mode=copy_mode,
                                               rel_tol=rel)))
    if "norm_inequality" in checks:
        records.append(_wrap(label, "norm_inequality",
                             norm_inequality_check(locals_, shape, rel_tol=rel)))
    if "trace_jensen" in checks:
        records.append(_wrap(label, "trace_jensen", trace_jensen_check(y, rel_tol=rel)))
    if "conditioning" in checks:
        records.append(_wrap(label, "trace_preservation",
                             trace_preservation_check(y, FactorSet.of(shape, {1}),
                                                      tol=tols.trace_preservation)))
        for j in range(1, shape.n_factors + 1):
            records.append(_wrap(label, f"tower_identity_{j}",
                                 tower_identity_check(y, j, tol=tols.tower)))
        records.append(_wrap(label, "martingale_sum",
                             martingale_sum_check(y, tol=tols.martingale_sum)))
        records.append(_wrap(label, "martingale_orthogonality",
                             martingale_orthogonality_check(y, tol=tols.orthogonality)))
        records.append(_wrap(label, "variance_additivity",
                             variance_additivity_check(y, tol=tols.variance_additivity)))
    return records


def _run_montecarlo(data: dict, overrides: dict | None) -> list[dict]:
    name = str(data.get("name", "scenario"))
    label = f"scenario:{name}"
    overrides = overrides or {}
    mode = str(_field(data, "mode", label))
    try:
        dists = [ScalarDistribution.from_dict(d) for d in _field(data, "distributions", label)]
    except (ValueError, TypeError, KeyError) as exc:
        raise ScenarioError(f"{label} field 'distributions': {exc}") from None
    n_samples = int(overrides.get("n_samples") or _field(data, "n_samples", label))
    seed = overrides.get("seed")
    seed = int(_field(data, "seed", label)) if seed is None else int(seed)

    spec = _field(data, "function", label)
    if mode == "scalar":
        try:
            func = ScalarFunction.from_dict(spec)
        except (ValueError, TypeError, KeyError) as exc:
            raise ScenarioError(f"{label} field 'function': {exc}") from None
        report = classical_efron_stein_mc(func, dists, n_samples, seed, name=name)
    elif mode == "matrix":
        try:
            func = MatrixFunction.from_dict(spec)
        except (ValueError, TypeError, KeyError) as exc:
            raise ScenarioError(f"{label} field 'function': {exc}") from None
        normalized = bool(data.get("normalized", True))
        report = matrix_efron_stein_mc(func, dists, n_samples, seed,
                                       normalized=normalized, name=name)
    else:
        raise ScenarioError(f"{label}: unknown Monte Carlo mode {mode!r}")
    return [_wrap(label, f"{mode}_efron_stein_mc", report)]


def run_scenario_data(
    data: dict,
    tols: Tolerances = Tolerances(),
    mc_overrides: dict | None = None,
) -> list[dict]:
    kind = data.get("kind")
    if kind == "algebra":
        return _run_algebra(data, tols)
    if kind == "montecarlo":
        return _run_montecarlo(data, mc_overrides)
    raise ScenarioError(f"scenario field 'kind' must be 'algebra' or 'montecarlo', got {kind!r}")
