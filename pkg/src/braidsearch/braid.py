"""Braid words, permutation braids and the Garside left normal form.

Every braid element is reduced to ``Δ^{-r} · p_1 ⋯ p_k`` with ``r >= 0``
minimal and the permutation braids ``p_i`` left-weighted.  Heavy lifting is
done by the compiled routines in :mod:`braidsearch._kernels`; this module
exposes immutable value types on top of them.

Conventions
-----------
A positive word ``σ_{i1} ⋯ σ_{ik}`` maps to the permutation
``s_{i1} ∘ ⋯ ∘ s_{ik}`` where ``s_i`` swaps ``i`` and ``i+1``.  With this
choice the starting set of a permutation braid is the descent set of the
inverse permutation and the finishing set is the descent set of the
permutation itself.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import _kernels


class StrandMismatch(ValueError):
    """Two braids on different numbers of strands were combined."""


class BraidParseError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _check_same(*strands: int) -> int:
    if len(set(strands)) > 1:
        raise StrandMismatch(f"strand counts differ: {sorted(set(strands))}")
    return strands[0]


@dataclass(frozen=True)
class BraidWord:
    """A word in the signed Artin generators of B_N.

    ``letters`` holds nonzero integers; ``i`` stands for σ_i and ``-i`` for its
    inverse.  No free reduction is ever performed on a word.
    """

    strands: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.strands < 2:
            raise ValueError(f"need at least 2 strands, got {self.strands}")
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        for x in self.letters:
            if x == 0 or abs(x) >= self.strands:
                raise ValueError(f"generator {x} out of range for B_{self.strands}")

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: BraidWord) -> BraidWord:
        return word_concat(self, other)

    def inverse(self) -> BraidWord:
        return word_inverse(self)

    def is_positive(self) -> bool:
        return all(x > 0 for x in self.letters)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.letters, dtype=np.int64)

    def __str__(self) -> str:
        return format_word(self)

    @classmethod
    def parse(cls, text: str) -> BraidWord:
        return parse_word(text)


def identity_word(strands: int) -> BraidWord:
    return BraidWord(strands, ())


def word_concat(u: BraidWord, v: BraidWord) -> BraidWord:
    n = _check_same(u.strands, v.strands)
    return BraidWord(n, u.letters + v.letters)


def word_inverse(u: BraidWord) -> BraidWord:
    return BraidWord(u.strands, tuple(-x for x in reversed(u.letters)))


def conjugate(x: BraidWord, b: BraidWord) -> BraidWord:
    """The word x·b·x⁻¹."""
    return word_concat(word_concat(x, b), word_inverse(x))


# -- text format ---------------------------------------------------------------

_HEADER = re.compile(r"N=(\d+)$")


def parse_word(text: str, line: int = 1) -> BraidWord:
    """Parse ``N=<int> i j k ...``; errors report line and column."""
    tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", text)]
    if not tokens:
        raise BraidParseError("empty input, expected header N=<int>", line, 1)
    col, head = tokens[0]
    m = _HEADER.match(head)
    if not m:
        raise BraidParseError(f"expected header N=<int>, got {head!r}", line, col)
    n = int(m.group(1))
    if n < 2:
        raise BraidParseError(f"strand count must be at least 2, got {n}", line, col)
    letters = []
    for col, tok in tokens[1:]:
        try:
            x = int(tok)
        except ValueError:
            raise BraidParseError(f"not an integer: {tok!r}", line, col) from None
        if x == 0:
            raise BraidParseError("generator index 0 is not allowed", line, col)
        if abs(x) >= n:
            raise BraidParseError(f"generator {x} out of range for B_{n}", line, col)
        letters.append(x)
    return BraidWord(n, tuple(letters))


def format_word(w: BraidWord) -> str:
    return " ".join([f"N={w.strands}", *map(str, w.letters)])


# -- permutations --------------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..N} in one-line notation."""

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(x) for x in self.images))
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(self.images)}: {self.images}")

    @property
    def strands(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_zero_based(cls, arr: Iterable[int]) -> Permutation:
        return cls(tuple(int(x) + 1 for x in arr))

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.images, dtype=_kernels.DTYPE) - 1

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> Permutation:
        inv = [0] * self.strands
        for i, x in enumerate(self.images, start=1):
            inv[x - 1] = i
        return Permutation(tuple(inv))

    def compose(self, other: Permutation) -> Permutation:
        """``self ∘ other``: apply ``other`` first."""
        _check_same(self.strands, other.strands)
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def descents(self) -> frozenset[int]:
        p = self.images
        return frozenset(i for i in range(1, len(p)) if p[i - 1] > p[i])

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.images, start=1))


def inversion_count(p: Permutation) -> int:
    """Number of pairs i<j with p(i) > p(j)."""
    return int(_kernels.inversions(p.zero_based()))


@dataclass(frozen=True)
class PermutationBraid:
    """The positive braid in which strands cross at most once, as dictated by ``perm``."""

    perm: Permutation

    @property
    def strands(self) -> int:
        return self.perm.strands

    @classmethod
    def identity(cls, n: int) -> PermutationBraid:
        return cls(Permutation.identity(n))

    @classmethod
    def from_positive_word(cls, w: BraidWord) -> PermutationBraid:
        """Permutation braid of a positive word; raises if two strands cross twice."""
        p = list(range(1, w.strands + 1))
        for x in w.letters:
            if x < 0 or p[x - 1] > p[x]:
                raise ValueError(f"{format_word(w)} is not a permutation braid")
            p[x - 1], p[x] = p[x], p[x - 1]
        return cls(Permutation(tuple(p)))

    def length(self) -> int:
        return inversion_count(self.perm)

    def is_identity(self) -> bool:
        return self.perm.is_identity()

    def word(self) -> BraidWord:
        return permutation_word(self)


def delta(n: int) -> PermutationBraid:
    """The half twist Δ_N."""
    if n < 2:
        raise ValueError(f"need at least 2 strands, got {n}")
    return PermutationBraid(Permutation(tuple(range(n, 0, -1))))


def starting_set(p: PermutationBraid) -> frozenset[int]:
    """Indices i such that σ_i left-divides ``p``."""
    return p.perm.inverse().descents()


def finishing_set(p: PermutationBraid) -> frozenset[int]:
    """Indices i such that σ_i right-divides ``p``."""
    return p.perm.descents()


def tau(p: PermutationBraid, n: int | None = None) -> PermutationBraid:
    """The q' with p·Δ = Δ·q'."""
    n = p.strands if n is None else _check_same(n, p.strands)
    img = p.perm.images
    return PermutationBraid(Permutation(tuple(n + 1 - img[n - i] for i in range(1, n + 1))))


def complement(p: PermutationBraid, n: int | None = None) -> PermutationBraid:
    """The permutation braid p⁻¹Δ, so that p·complement(p) = Δ."""
    n = p.strands if n is None else _check_same(n, p.strands)
    inv = p.perm.inverse().images
    return PermutationBraid(Permutation(tuple(inv[n - i] for i in range(1, n + 1))))


def permutation_word(p: PermutationBraid) -> BraidWord:
    """Canonical positive word of a permutation braid.

    Bubble-sorts the permutation, scanning positions left to right in repeated
    passes; the recorded swaps, read backwards, spell the braid.
    """
    a = list(p.perm.images)
    n = len(a)
    swaps = []
    changed = True
    while changed:
        changed = False
        for i in range(n - 1):
            if a[i] > a[i + 1]:
                a[i], a[i + 1] = a[i + 1], a[i]
                swaps.append(i + 1)
                changed = True
    return BraidWord(n, tuple(reversed(swaps)))


# -- normal forms --------------------------------------------------------------


@dataclass(frozen=True)
class NormalForm:
    """Left normal form Δ^{-r} · p_1 ⋯ p_k."""

    strands: int
    delta_exponent: int
    factors: tuple[PermutationBraid, ...] = ()

    def __post_init__(self):
        if self.delta_exponent < 0:
            raise ValueError("delta_exponent is the nonnegative r of Δ^{-r}")

    @property
    def r(self) -> int:
        return self.delta_exponent

    @property
    def k(self) -> int:
        return len(self.factors)

    def check(self) -> None:
        """Raise ValueError unless all normal-form invariants hold."""
        d = delta(self.strands)
        if any(p.is_identity() for p in self.factors):
            raise ValueError("identity factor")
        for a, b in zip(self.factors, self.factors[1:]):
            if not finishing_set(a) >= starting_set(b):
                raise ValueError("factors are not left-weighted")
        if self.r > 0 and self.factors and self.factors[0] == d:
            raise ValueError("r is not minimal")
        n_delta = sum(1 for p in self.factors if p == d)
        if not all(p == d for p in self.factors[:n_delta]):
            raise ValueError("Δ factors must come first")

    def permutation(self) -> Permutation:
        """Image in the symmetric group."""
        n = self.strands
        acc = Permutation.identity(n)
        if self.r % 2:
            acc = delta(n).perm
        for p in self.factors:
            acc = acc.compose(p.perm)
        return acc

    def garside(self) -> Garside:
        d = delta(self.strands)
        lead = 0
        for p in self.factors:
            if p != d:
                break
            lead += 1
        rows = [p.perm.zero_based() for p in self.factors[lead:]]
        arr = np.array(rows, dtype=_kernels.DTYPE).reshape(len(rows), self.strands)
        return Garside(self.strands, lead - self.r, arr)


@dataclass(frozen=True, eq=False)
class Garside:
    """Packed normal form ``Δ^inf · rows`` used on hot paths.

    ``inf`` may be any integer and rows exclude Δ; convert with
    :meth:`normal_form` for the public ``Δ^{-r}`` presentation.
    """

    strands: int
    inf: int
    rows: np.ndarray = field(repr=False)

    @classmethod
    def of(cls, w: BraidWord) -> Garside:
        inf, rows = _kernels.nf_from_letters(w.as_array(), w.strands)
        return cls(w.strands, int(inf), rows)

    def multiply(self, left: BraidWord | None = None, right: BraidWord | None = None) -> Garside:
        """Normal form of ``left · self · right``."""
        empty = np.empty(0, dtype=np.int64)
        lw = empty if left is None else left.as_array()
        rw = empty if right is None else right.as_array()
        for w in (left, right):
            if w is not None:
                _check_same(self.strands, w.strands)
        inf, rows = _kernels.nf_multiply(self.inf, self.rows, lw, rw)
        return Garside(self.strands, int(inf), rows)

    def conjugated_by(self, g: BraidWord) -> Garside:
        """Normal form of g⁻¹·self·g."""
        return self.multiply(word_inverse(g), g)

    @cached_property
    def key(self) -> tuple[int, int, bytes]:
        return (self.strands, self.inf, self.rows.tobytes())

    def __eq__(self, other):
        if not isinstance(other, Garside):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def lengths(self) -> tuple[int, int]:
        """(Garside length, reduced Garside length)."""
        lg, lrg = _kernels.nf_lengths(self.inf, self.rows)
        return int(lg), int(lrg)

    def normal_form(self) -> NormalForm:
        factors = tuple(PermutationBraid(Permutation.from_zero_based(r)) for r in self.rows)
        if self.inf >= 0:
            return NormalForm(self.strands, 0, (delta(self.strands),) * self.inf + factors)
        return NormalForm(self.strands, -self.inf, factors)


def left_normal_form(w: BraidWord) -> NormalForm:
    return Garside.of(w).normal_form()


def braid_equal(u: BraidWord, v: BraidWord) -> bool:
    _check_same(u.strands, v.strands)
    return Garside.of(u) == Garside.of(v)


def nf_to_word(nf: NormalForm) -> BraidWord:
    """Serialize a normal form: r copies of Δ⁻¹'s canonical word, then each factor."""
    n = nf.strands
    letters: list[int] = []
    if nf.r:
        letters.extend(word_inverse(permutation_word(delta(n))).letters * nf.r)
    for p in nf.factors:
        letters.extend(permutation_word(p).letters)
    return BraidWord(n, tuple(letters))


def symmetric_image(w: BraidWord) -> Permutation:
    """Product of the transpositions (i, i+1) read off the letters of ``w``."""
    p = list(range(1, w.strands + 1))
    for x in w.letters:
        i = abs(x)
        p[i - 1], p[i] = p[i], p[i - 1]
    return Permutation(tuple(p))

