"""Finite-dimensional tracial algebra kernel.

The ambient algebra is a tensor product of full complex matrix algebras
carrying the normalized trace (matrix trace divided by total dimension),
which plays the role of expectation. Elements are immutable dense
matrices tagged with their tensor shape; every operation in this module
is a pure function, safe to call concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .reports import CheckReport, build_check_report

__all__ = [
    "DEFAULT_DIM_CAP",
    "HERMITIAN_TOL",
    "EIG_TOL",
    "PSD_TOL",
    "AlgebraShape",
    "Element",
    "SpectralDecomposition",
    "hermitian_part",
    "normalized_trace",
    "trace_product",
    "l2_norm",
    "l2_distance",
    "schatten_norm",
    "variance",
    "variance_inf_lambda_check",
    "spectral_decomposition",
    "spectral_projection",
    "tail_probability",
    "layer_cake_norm",
    "tensor_embed",
    "embed_in_factors",
    "partial_trace",
    "matrix_to_pairs",
    "pairs_to_matrix",
    "element_to_dict",
    "element_from_dict",
    "element_to_json",
    "element_from_json",
]

DEFAULT_DIM_CAP = 4096
HERMITIAN_TOL = 1e-12  # absolute, on max |M - M*|
EIG_TOL = 1e-10        # spectral projection boundary: eigenvalues >= t - EIG_TOL included
PSD_TOL = 1e-10        # eigenvalues above -PSD_TOL count as nonnegative and are clamped


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    """(A + A*)/2; exactly Hermitian in floating point."""
    return (matrix + matrix.conj().T) / 2


@dataclass(frozen=True)
class AlgebraShape:
    """Ordered local factor dimensions of a tensor product of matrix algebras.

    The total dimension is the product of the factor dimensions and is
    capped (default 4096) so eigendecompositions stay tractable.
    """

    factor_dims: tuple[int, ...]
    cap: int = field(default=DEFAULT_DIM_CAP, compare=False, repr=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.factor_dims)
        object.__setattr__(self, "factor_dims", dims)
        if not dims:
            raise ValueError("shape needs at least one factor")
        if any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be >= 1, got {dims}")
        total = math.prod(dims)
        if total > self.cap:
            raise ValueError(f"total dimension {total} exceeds cap {self.cap}")

    @property
    def total_dim(self) -> int:
        return math.prod(self.factor_dims)

    @property
    def n_factors(self) -> int:
        return len(self.factor_dims)

    def check_position(self, position: int) -> int:
        """Validate a 1-based factor position and return it."""
        if not 1 <= int(position) <= self.n_factors:
            raise ValueError(
                f"factor position {position} out of range 1..{self.n_factors}"
            )
        return int(position)

    def appended(self, *extra_dims: int) -> "AlgebraShape":
        return AlgebraShape(self.factor_dims + tuple(extra_dims), cap=self.cap)

    def prefixed(self, dim: int) -> "AlgebraShape":
        return AlgebraShape((dim,) + self.factor_dims, cap=self.cap)

    def doubled(self) -> "AlgebraShape":
        return AlgebraShape(self.factor_dims * 2, cap=self.cap)


@dataclass(frozen=True, eq=False)
class Element:
    """A dense complex matrix living in the algebra described by ``shape``."""

    shape: AlgebraShape
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got array of shape {m.shape}")
        if m.shape[0] != self.shape.total_dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match shape "
                f"{self.shape.factor_dims} (total {self.shape.total_dim})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, shape: AlgebraShape) -> "Element":
        return cls(shape, np.eye(shape.total_dim, dtype=np.complex128))

    @classmethod
    def zeros(cls, shape: AlgebraShape) -> "Element":
        return cls(shape, np.zeros((shape.total_dim, shape.total_dim), dtype=np.complex128))

    def adjoint(self) -> "Element":
        return Element(self.shape, self.matrix.conj().T)

    def self_adjoint_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_self_adjoint(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.self_adjoint_defect() <= tol

    def require_self_adjoint(self, what: str = "element", tol: float = HERMITIAN_TOL) -> None:
        defect = self.self_adjoint_defect()
        if defect > tol:
            raise ValueError(f"{what} is not self-adjoint (max deviation {defect:.3e})")

    def allclose(self, other: "Element", tol: float = 1e-12) -> bool:
        _require_same_shape(self, other)
        return float(np.max(np.abs(self.matrix - other.matrix))) <= tol

    def __add__(self, other: "Element") -> "Element":
        _require_same_shape(self, other)
        return Element(self.shape, self.matrix + other.matrix)

    def __sub__(self, other: "Element") -> "Element":
        _require_same_shape(self, other)
        return Element(self.shape, self.matrix - other.matrix)

    def __neg__(self) -> "Element":
        return Element(self.shape, -self.matrix)

    def __mul__(self, scalar) -> "Element":
        if isinstance(scalar, Element):
            raise TypeError("use @ for the product of two elements")
        return Element(self.shape, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Element") -> "Element":
        _require_same_shape(self, other)
        return Element(self.shape, self.matrix @ other.matrix)


def _require_same_shape(a: Element, b: Element) -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"shape mismatch: {a.shape.factor_dims} vs {b.shape.factor_dims}"
        )


# ---------------------------------------------------------------------------
# Trace and norms
# ---------------------------------------------------------------------------

def normalized_trace(x: Element) -> complex:
    """The normalized trace: matrix trace divided by total dimension."""
    return complex(np.trace(x.matrix)) / x.shape.total_dim


def trace_product(a: Element, b: Element) -> complex:
    """Normalized trace of a product, without forming the product matrix."""
    _require_same_shape(a, b)
    return complex(np.einsum("ij,ji->", a.matrix, b.matrix)) / a.shape.total_dim


def l2_norm(x: Element) -> float:
    """The 2-norm tau(x*x)^(1/2), computed from the Frobenius norm."""
    return float(np.linalg.norm(x.matrix)) / math.sqrt(x.shape.total_dim)


def l2_distance(a: Element, b: Element) -> float:
    _require_same_shape(a, b)
    return float(np.linalg.norm(a.matrix - b.matrix)) / math.sqrt(a.shape.total_dim)


def schatten_norm(x: Element, p: float) -> float:
    """The p-norm tau(|x|^p)^(1/p) with the normalized trace.

    Because the trace is normalized, the identity has norm 1 for every p.
    """
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise ValueError(f"Schatten order must satisfy 1 <= p < inf, got {p}")
    singular = np.linalg.svd(x.matrix, compute_uv=False)
    return float(np.mean(singular**p) ** (1.0 / p))


def variance(x: Element) -> float:
    """tau((x - tau(x))^2) for self-adjoint x; nonnegative by construction."""
    x.require_self_adjoint("variance input")
    mean = normalized_trace(x).real
    centered = x.matrix - mean * np.eye(x.shape.total_dim)
    return float(np.linalg.norm(centered) ** 2) / x.shape.total_dim


def variance_inf_lambda_check(
    x: Element, lambda_grid, tol: float = 1e-9
) -> CheckReport:
    """Check var(x) = inf over real lambda of tau((x - lambda)^2).

    Every grid point must sit above the variance (within ``tol`` relative
    to max(1, var)), and the infimum is attained at lambda = tau(x).
    """
    x.require_self_adjoint("variance infimum input")
    var = variance(x)
    mean = normalized_trace(x).real
    d = x.shape.total_dim
    eye = np.eye(d)
    pad = tol * max(1.0, abs(var))

    values = []
    for lam in lambda_grid:
        val = float(np.linalg.norm(x.matrix - float(lam) * eye) ** 2) / d
        values.append((float(lam), val))
    at_mean = float(np.linalg.norm(x.matrix - mean * eye) ** 2) / d

    worst = max((var - val for _, val in values), default=0.0)
    worst = max(worst, abs(at_mean - var))
    min_lambda, min_value = min(values, key=lambda t: t[1], default=(mean, at_mean))
    return build_check_report(
        "variance_inf_lambda",
        measured=worst,
        threshold=pad,
        data={
            "var": var,
            "mean": mean,
            "min_lambda": min_lambda,
            "min_value": min_value,
            "value_at_mean": at_mean,
        },
    )


# ---------------------------------------------------------------------------
# Spectral calculus (Hermitian elements, interval sets)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthogonal projections onto eigenspaces."""

    eigenvalues: tuple[float, ...]
    projections: tuple[Element, ...]

    def reconstruct(self) -> Element:
        shape = self.projections[0].shape
        acc = np.zeros((shape.total_dim, shape.total_dim), dtype=np.complex128)
        for lam, proj in zip(self.eigenvalues, self.projections):
            acc += lam * proj.matrix
        return Element(shape, acc)


def spectral_decomposition(x: Element, cluster_tol: float = EIG_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian element, grouping near-degenerate levels."""
    x.require_self_adjoint("spectral decomposition input")
    w, v = np.linalg.eigh(x.matrix)
    scale = max(1.0, float(np.max(np.abs(w))))
    gap = cluster_tol * scale

    eigenvalues: list[float] = []
    projections: list[Element] = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > gap:
            block = v[:, start:i]
            eigenvalues.append(float(np.mean(w[start:i])))
            projections.append(Element(x.shape, hermitian_part(block @ block.conj().T)))
            start = i
    return SpectralDecomposition(tuple(eigenvalues), tuple(projections))


def spectral_projection(x: Element, t: float, eig_tol: float = EIG_TOL) -> Element:
    """The projection onto eigenspaces with eigenvalue >= t.

    Eigenvalues within ``eig_tol`` of t are included (closed-interval
    convention), so tests near spectral boundaries are deterministic.
    """
    x.require_self_adjoint("spectral projection input")
    w, v = np.linalg.eigh(x.matrix)
    block = v[:, w >= t - eig_tol]
    return Element(x.shape, hermitian_part(block @ block.conj().T))


def tail_probability(x: Element, t: float, eig_tol: float = EIG_TOL) -> float:
    """tau of the spectral projection onto [t, inf); exact rational count / dim."""
    x.require_self_adjoint("tail probability input")
    w = np.linalg.eigvalsh(x.matrix)
    count = int(np.sum(w >= t - eig_tol))
    return count / x.shape.total_dim


def layer_cake_norm(x: Element, p: float, psd_tol: float = PSD_TOL) -> float:
    """tau(|x|^p) for positive x, via the layer-cake integral.

    The integrand t -> tau(chi_[t,inf)(x)) is a step function with jumps
    at the eigenvalues, so the integral of p t^(p-1) times it is a finite
    sum, evaluated here exactly. Agrees with schatten_norm(x, p)**p.
    """
    p = float(p)
    if not math.isfinite(p) or p < 1:
        raise ValueError(f"layer-cake order must satisfy 1 <= p < inf, got {p}")
    x.require_self_adjoint("layer-cake input")
    w = np.linalg.eigvalsh(x.matrix)
    if float(np.min(w)) < -psd_tol:
        raise ValueError(
            f"layer-cake input must be positive semidefinite "
            f"(smallest eigenvalue {float(np.min(w)):.3e})"
        )
    w = np.clip(w, 0.0, None)
    d = x.shape.total_dim

    total = 0.0
    prev = 0.0
    for level in np.unique(w):
        if level <= 0.0:
            continue
        count = int(np.sum(w >= level))
        total += (count / d) * (level**p - prev**p)
        prev = float(level)
    return float(total)


# ---------------------------------------------------------------------------
# Tensor-factor plumbing: embeddings and partial traces
# ---------------------------------------------------------------------------

def _permute_factors(matrix: np.ndarray, dims, perm) -> np.ndarray:
    """Reorder tensor factors so output factor k is input factor perm[k]."""
    n = len(dims)
    tensor = matrix.reshape(*dims, *dims)
    axes = list(perm) + [n + p for p in perm]
    out = tensor.transpose(axes)
    d = math.prod(dims)
    return out.reshape(d, d)


def _normalize_indices(indices, shape: AlgebraShape) -> list[int]:
    """Validate 1-based factor indices, returning the sorted 0-based list."""
    idx = sorted(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate factor indices in {idx}")
    for i in idx:
        shape.check_position(i)
    return [i - 1 for i in idx]


def embed_in_factors(local, indices, shape: AlgebraShape) -> Element:
    """Embed a matrix supported on the given factors, identity elsewhere.

    ``local`` acts on the tensor product of the named factors (sorted,
    1-based); the result carries identity on every other factor.
    """
    keep = _normalize_indices(indices, shape)
    dims = shape.factor_dims
    local_m = np.asarray(local, dtype=np.complex128)
    d_keep = math.prod(dims[i] for i in keep)
    if local_m.ndim != 2 or local_m.shape != (d_keep, d_keep):
        raise ValueError(
            f"local matrix must be {d_keep}x{d_keep} for factors "
            f"{[i + 1 for i in keep]} of shape {dims}, got {local_m.shape}"
        )
    traced = [i for i in range(len(dims)) if i not in keep]
    d_rest = math.prod(dims[i] for i in traced)
    big = np.kron(local_m, np.eye(d_rest, dtype=np.complex128))
    order = keep + traced
    current_dims = [dims[i] for i in order]
    back = list(np.argsort(order))
    return Element(shape, _permute_factors(big, current_dims, back))


def tensor_embed(local, position: int, shape: AlgebraShape) -> Element:
    """Embed a local matrix at one factor position (1-based), identity elsewhere."""
    return embed_in_factors(local, (position,), shape)


def partial_trace(x: Element, keep_indices) -> np.ndarray:
    """Normalized partial trace onto the kept factors (1-based, sorted).

    Traces out the complementary factors and divides by their total
    dimension, so the full trace of the result times the kept dimension
    reproduces the normalized trace of ``x`` scaled accordingly.
    """
    keep = _normalize_indices(keep_indices, x.shape)
    dims = x.shape.factor_dims
    traced = [i for i in range(len(dims)) if i not in keep]
    if not traced:
        return np.array(x.matrix, copy=True)
    d_keep = math.prod(dims[i] for i in keep)
    d_rest = math.prod(dims[i] for i in traced)
    order = keep + traced
    current_dims = [dims[i] for i in order]
    rearranged = _permute_factors(x.matrix, dims, order)
    tensor = rearranged.reshape(d_keep, d_rest, d_keep, d_rest)
    return np.einsum("abcb->ac", tensor) / d_rest


# ---------------------------------------------------------------------------
# Serialization: exact round-trip at full double precision
# ---------------------------------------------------------------------------

def matrix_to_pairs(matrix: np.ndarray) -> list:
    """Row-major nested lists of [re, im] pairs."""
    m = np.asarray(matrix, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def pairs_to_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ValueError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != width:
            raise ValueError(f"matrix row {i} is ragged")
        for j, pair in enumerate(row):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValueError(f"matrix entry ({i},{j}) must be a [re, im] pair")
            out[i, j] = complex(float(pair[0]), float(pair[1]))
    return out


def element_to_dict(x: Element) -> dict:
    return {"shape": list(x.shape.factor_dims), "matrix": matrix_to_pairs(x.matrix)}


def element_from_dict(data: dict) -> Element:
    shape = AlgebraShape(tuple(int(d) for d in data["shape"]))
    return Element(shape, pairs_to_matrix(data["matrix"]))


def element_to_json(x: Element) -> str:
    return json.dumps(element_to_dict(x), sort_keys=True)


def element_from_json(text: str) -> Element:
    return element_from_dict(json.loads(text))
