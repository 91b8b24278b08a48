"""Garside lengths, the mixed presentation and length vectors."""

import numpy as np
import pytest

from braidsearch.braid import BraidWord, NormalForm, StrandMismatch, braid_equal, delta, left_normal_form, permutation_word
from braidsearch.lengths import (
    LengthFunction,
    evaluate_length,
    garside_length,
    length_vector,
    mixed_form,
    reduced_garside_length,
)


def W(n, *letters):
    return BraidWord(n, letters)


def test_identity_lengths():
    nf = left_normal_form(W(4))
    assert garside_length(nf) == reduced_garside_length(nf) == 0
    assert mixed_form(nf) == (W(4), W(4))


def test_inverse_delta():
    nf = NormalForm(3, 1, ())
    assert garside_length(nf) == 3
    assert reduced_garside_length(nf) == 3
    a, b = mixed_form(nf)
    assert a == permutation_word(delta(3)) and b == W(3)


def test_single_inverse_generator():
    nf = left_normal_form(W(3, -1))
    assert garside_length(nf) == 5
    assert reduced_garside_length(nf) == 1


def test_positive_words_have_equal_lengths():
    rng = np.random.default_rng(0)
    for _ in range(50):
        w = W(6, *(int(x) for x in rng.integers(1, 6, size=12)))
        nf = left_normal_form(w)
        assert garside_length(nf) == reduced_garside_length(nf) == 12


def test_mixed_form_example():
    w = W(3, 1, -2)
    a, b = mixed_form(left_normal_form(w))
    assert len(a) + len(b) == 4
    assert braid_equal(a.inverse() * b, w)


def test_mixed_form_extra_deltas():
    # Δ⁻³·σ1: two Δ factors left over in a
    w = permutation_word(delta(4)).inverse() * permutation_word(delta(4)).inverse() \
        * permutation_word(delta(4)).inverse() * W(4, 1)
    nf = left_normal_form(w)
    assert (nf.r, nf.k) == (3, 1)
    a, b = mixed_form(nf)
    assert len(a) == reduced_garside_length(nf) == 2 * 6 + 5
    assert braid_equal(a.inverse() * b, w)


def test_evaluate_length():
    assert evaluate_length(W(3), "g") == evaluate_length(W(3), "rg") == 0
    assert evaluate_length(W(3, 1, 2, 1), LengthFunction.GARSIDE) == 3
    assert evaluate_length(W(3, -1), LengthFunction.REDUCED_GARSIDE) == 1


def test_length_function_parse():
    assert LengthFunction.parse("garside") is LengthFunction.GARSIDE
    assert LengthFunction.parse("reduced_garside") is LengthFunction.REDUCED_GARSIDE
    with pytest.raises(ValueError):
        LengthFunction.parse("geodesic")


def test_length_vector():
    cs = [W(4, 1, -2), W(4, 3, 3)]
    assert length_vector(cs, W(4), "rg") == tuple(evaluate_length(c, "rg") for c in cs)
    assert length_vector([], W(4), "g") == ()
    # prefix σ1: σ1⁻¹·(σ1 σ3 σ1⁻¹)·σ1 = σ3
    assert length_vector([W(4, 1, 3, -1)], W(4, 1), "rg") == (1,)
    with pytest.raises(StrandMismatch):
        length_vector([W(4, 1)], W(3, 1), "g")
