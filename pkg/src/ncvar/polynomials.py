"""Noncommutative *-polynomials in named inputs.

A polynomial is a finite sum of complex-weighted words; a word is a
sequence of input names, each optionally adjoint-marked, and the empty
word denotes the identity. Evaluation on elements of one algebra sums
the word products and Hermitian-symmetrizes, so the result of
``eval_poly`` is always self-adjoint. These polynomials stand in for
general functions of several self-adjoint random variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AlgebraShape, Element, hermitian_part

__all__ = ["NcPolynomial", "eval_poly", "variables", "sum_of_inputs"]

Atom = tuple[str, bool]          # (input name, adjoint flag)
Word = tuple[Atom, ...]
Term = tuple[complex, Word]


def _canonical_terms(terms) -> tuple[Term, ...]:
    acc: dict[Word, complex] = {}
    for coeff, word in terms:
        w = tuple((str(name), bool(star)) for name, star in word)
        acc[w] = acc.get(w, 0j) + complex(coeff)
    cleaned = [(c, w) for w, c in acc.items() if c != 0]
    cleaned.sort(key=lambda t: (len(t[1]), t[1]))
    return tuple(cleaned)


def _merge_inputs(left, right) -> tuple[str, ...]:
    out = list(left)
    for name in right:
        if name not in out:
            out.append(name)
    return tuple(out)


@dataclass(frozen=True)
class NcPolynomial:
    inputs: tuple[str, ...]
    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(str(n) for n in self.inputs))
        object.__setattr__(self, "terms", _canonical_terms(self.terms))
        stray = self.names_used() - set(self.inputs)
        if stray:
            raise ValueError(f"words reference undeclared inputs {sorted(stray)}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, inputs=()) -> "NcPolynomial":
        return cls(tuple(inputs), ())

    @classmethod
    def one(cls, inputs=()) -> "NcPolynomial":
        return cls(tuple(inputs), ((1.0 + 0j, ()),))

    @classmethod
    def constant(cls, value, inputs=()) -> "NcPolynomial":
        return cls(tuple(inputs), ((complex(value), ()),))

    @classmethod
    def variable(cls, name: str, inputs=None) -> "NcPolynomial":
        names = (name,) if inputs is None else tuple(inputs)
        return cls(names, ((1.0 + 0j, ((name, False),)),))

    # -- structure ----------------------------------------------------------

    def names_used(self) -> set[str]:
        return {name for _, word in self.terms for name, _ in word}

    def references(self, name: str) -> bool:
        return name in self.names_used()

    def degree(self) -> int:
        return max((len(word) for _, word in self.terms), default=0)

    def without_input(self, name: str) -> "NcPolynomial":
        """Drop every term whose word mentions ``name``."""
        kept = [t for t in self.terms if all(n != name for n, _ in t[1])]
        return NcPolynomial(self.inputs, tuple(kept))

    def with_inputs(self, inputs) -> "NcPolynomial":
        return NcPolynomial(tuple(inputs), self.terms)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "NcPolynomial") -> "NcPolynomial":
        return NcPolynomial(
            _merge_inputs(self.inputs, other.inputs), self.terms + other.terms
        )

    def __sub__(self, other: "NcPolynomial") -> "NcPolynomial":
        return self + (-other)

    def __neg__(self) -> "NcPolynomial":
        return NcPolynomial(self.inputs, tuple((-c, w) for c, w in self.terms))

    def __mul__(self, other) -> "NcPolynomial":
        if isinstance(other, NcPolynomial):
            prod = [
                (c1 * c2, w1 + w2)
                for c1, w1 in self.terms
                for c2, w2 in other.terms
            ]
            return NcPolynomial(_merge_inputs(self.inputs, other.inputs), tuple(prod))
        return NcPolynomial(
            self.inputs, tuple((c * complex(other), w) for c, w in self.terms)
        )

    def __rmul__(self, other) -> "NcPolynomial":
        return self * other

    def __pow__(self, exponent: int) -> "NcPolynomial":
        if exponent < 0:
            raise ValueError("negative powers are not defined")
        out = NcPolynomial.one(self.inputs)
        for _ in range(int(exponent)):
            out = out * self
        return out

    def adjoint(self) -> "NcPolynomial":
        flipped = tuple(
            (c.conjugate(), tuple((n, not s) for n, s in reversed(w)))
            for c, w in self.terms
        )
        return NcPolynomial(self.inputs, flipped)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "terms": [
                {
                    "coeff": [c.real, c.imag],
                    "word": [[n, s] for n, s in w],
                }
                for c, w in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NcPolynomial":
        terms = []
        for t in data.get("terms", []):
            re, im = t["coeff"]
            word = tuple((str(n), bool(s)) for n, s in t.get("word", []))
            terms.append((complex(float(re), float(im)), word))
        return cls(tuple(data.get("inputs", [])), tuple(terms))

    def __repr__(self) -> str:
        if not self.terms:
            return "NcPolynomial<0>"
        parts = []
        for c, w in self.terms:
            letters = "".join(n + ("*" if s else "") for n, s in w) or "1"
            parts.append(f"({c:g})·{letters}")
        return "NcPolynomial<" + " + ".join(parts) + ">"


def variables(*names: str) -> tuple[NcPolynomial, ...]:
    """Generators sharing one declared input list, for handy arithmetic."""
    return tuple(NcPolynomial.variable(n, inputs=names) for n in names)


def sum_of_inputs(names) -> NcPolynomial:
    names = tuple(names)
    return NcPolynomial(names, tuple((1.0 + 0j, ((n, False),)) for n in names))


def eval_poly(
    f: NcPolynomial,
    bindings: dict[str, Element],
    shape: AlgebraShape | None = None,
) -> Element:
    """Evaluate a polynomial on bound elements and Hermitian-symmetrize.

    All bound elements must share one shape; every name appearing in the
    words must be bound. For constant polynomials with no bindings, the
    target ``shape`` must be given explicitly.
    """
    used = f.names_used()
    missing = used - set(bindings)
    if missing:
        raise ValueError(f"unbound inputs {sorted(missing)}")
    for name, elem in bindings.items():
        if shape is None:
            shape = elem.shape
        elif elem.shape != shape:
            raise ValueError(
                f"binding {name!r} has shape {elem.shape.factor_dims}, "
                f"expected {shape.factor_dims}"
            )
    if shape is None:
        raise ValueError("cannot infer the algebra shape: no bindings given")

    d = shape.total_dim
    acc = np.zeros((d, d), dtype=np.complex128)
    eye = np.eye(d, dtype=np.complex128)
    for coeff, word in f.terms:
        prod = eye
        for name, star in word:
            m = bindings[name].matrix
            prod = prod @ (m.conj().T if star else m)
        acc += coeff * prod
    return Element(shape, hermitian_part(acc))
