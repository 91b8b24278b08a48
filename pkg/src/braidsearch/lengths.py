"""Garside and reduced Garside lengths."""

from __future__ import annotations

import enum
from typing import Sequence

from .braid import (
    BraidWord,
    Garside,
    NormalForm,
    _check_same,
    complement,
    conjugate,
    delta,
    left_normal_form,
    permutation_word,
    tau,
    word_inverse,
)

LengthVector = tuple[int, ...]


class LengthFunction(str, enum.Enum):
    GARSIDE = "g"
    REDUCED_GARSIDE = "rg"

    @classmethod
    def parse(cls, value: str | LengthFunction) -> LengthFunction:
        if isinstance(value, cls):
            return value
        aliases = {"g": cls.GARSIDE, "garside": cls.GARSIDE,
                   "rg": cls.REDUCED_GARSIDE, "reduced": cls.REDUCED_GARSIDE,
                   "reducedgarside": cls.REDUCED_GARSIDE}
        try:
            return aliases[str(value).lower().replace("_", "").replace("-", "")]
        except KeyError:
            raise ValueError(f"unknown length function {value!r}") from None

    @property
    def label(self) -> str:
        return "l_G" if self is LengthFunction.GARSIDE else "l_RG"


def _half(n: int) -> int:
    return n * (n - 1) // 2


def garside_length(nf: NormalForm) -> int:
    """r·C(N,2) + Σ|p_i|."""
    return nf.r * _half(nf.strands) + sum(p.length() for p in nf.factors)


def reduced_garside_length(nf: NormalForm) -> int:
    m = min(nf.r, nf.k)
    return garside_length(nf) - 2 * sum(p.length() for p in nf.factors[:m])


def mixed_form(nf: NormalForm) -> tuple[BraidWord, BraidWord]:
    """Positive words (a, b) with a⁻¹·b equal to the braid and |a|+|b| = ℓ_RG.

    Each Δ⁻¹·p_i is traded for the inverse of the complement of p_i, twisted
    by τ once for every Δ⁻¹ it has to cross; leftover Δ⁻¹ powers become Δ
    factors of ``a``, leftover factors form ``b``.
    """
    n = nf.strands
    r, k = nf.r, nf.k
    m = min(r, k)
    twisted = []
    for i, p in enumerate(nf.factors[:m], start=1):
        q = complement(p, n)
        if (r - i) % 2:
            q = tau(q, n)
        twisted.append(q)
    a_letters: list[int] = []
    a_letters.extend(permutation_word(delta(n)).letters * max(r - k, 0))
    for q in reversed(twisted):
        a_letters.extend(permutation_word(q).letters)
    b_letters: list[int] = []
    for p in nf.factors[m:]:
        b_letters.extend(permutation_word(p).letters)
    return BraidWord(n, tuple(a_letters)), BraidWord(n, tuple(b_letters))


def evaluate_length(w: BraidWord, ell: LengthFunction | str) -> int:
    ell = LengthFunction.parse(ell)
    g, rg = Garside.of(w).lengths()
    return g if ell is LengthFunction.GARSIDE else rg


def length_vector(
    conjugates: Sequence[BraidWord], prefix: BraidWord, ell: LengthFunction | str
) -> LengthVector:
    """Lengths of prefix⁻¹·c_i·prefix for every c_i."""
    _check_same(prefix.strands, *(c.strands for c in conjugates))
    return tuple(evaluate_length(conjugate(word_inverse(prefix), c), ell) for c in conjugates)


def lengths_of(w: BraidWord) -> tuple[int, int]:
    """(ℓ_G, ℓ_RG) of a word in one normal-form computation."""
    return Garside.of(w).lengths()


def nf_lengths(nf: NormalForm) -> tuple[int, int]:
    return garside_length(nf), reduced_garside_length(nf)


__all__ = [
    "LengthFunction",
    "LengthVector",
    "evaluate_length",
    "garside_length",
    "left_normal_form",
    "length_vector",
    "lengths_of",
    "mixed_form",
    "nf_lengths",
    "reduced_garside_length",
]
