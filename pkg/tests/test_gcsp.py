"""Instances, candidate generation and the peel-off attack."""

import numpy as np
import pytest

from braidsearch.braid import BraidWord, Garside, StrandMismatch, braid_equal, conjugate
from braidsearch.gcsp import (
    AttackConfig,
    ConjugateSet,
    GcspInstance,
    InstanceFormatError,
    InstanceParams,
    SymbolTable,
    attack_step,
    build_instance,
    candidate_prefixes,
    correct_generator_rank,
    dump_instance,
    invert_spelling,
    load_instance,
    run_attack,
    sample_artin_word,
    sample_secret,
    score_prefixes,
    spelling_word,
)
from braidsearch.lengths import evaluate_length


def small(**kw):
    base = dict(strands=8, m=4, n=5, gen_len_a=6, gen_len_b=6, secret_len=3, seed=1)
    base.update(kw)
    return InstanceParams(**base)


class TestSampling:
    def test_artin_words(self):
        rng = np.random.default_rng(0)
        assert sample_artin_word(5, 0, rng).letters == ()
        w = sample_artin_word(2, 3, rng)
        assert len(w) == 3 and set(w.letters) <= {1, -1}
        a = sample_artin_word(9, 20, np.random.default_rng(42))
        b = sample_artin_word(9, 20, np.random.default_rng(42))
        assert a == b

    def test_artin_words_cover_alphabet(self):
        w = sample_artin_word(4, 600, np.random.default_rng(1))
        assert set(w.letters) == {1, 2, 3, -1, -2, -3}

    def test_secret(self):
        rng = np.random.default_rng(0)
        gens = [sample_artin_word(6, 10, rng) for _ in range(3)]
        x, sp = sample_secret(gens, 0, rng)
        assert x.letters == () and sp == ()
        x, sp = sample_secret(gens, 5, rng)
        assert len(x) == 50 and len(sp) == 5
        assert x == spelling_word(gens, sp)

    def test_single_generator_secret_is_balanced(self):
        rng = np.random.default_rng(7)
        gens = [BraidWord(3, (1, 2))]
        signs = [sample_secret(gens, 1, rng)[1][0] for _ in range(2000)]
        assert set(signs) == {1, -1}
        assert abs(signs.count(1) - 1000) < 150

    def test_build_instance(self):
        inst = build_instance(InstanceParams())
        assert inst.strands == 81
        assert len(inst.generators) == len(inst.bases) == len(inst.conjugates) == 20
        assert all(len(g) == 10 for g in inst.generators)
        assert inst.verify()
        assert build_instance(InstanceParams()) == inst

    def test_empty_secret_conjugates_equal_bases(self):
        inst = build_instance(small(secret_len=0))
        assert all(braid_equal(b, c) for b, c in zip(inst.bases, inst.conjugates))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            InstanceParams(strands=1)
        with pytest.raises(ValueError):
            InstanceParams(m=0)


class TestCandidates:
    def test_counts(self):
        assert len(candidate_prefixes(1, 1)) == 2
        assert len(candidate_prefixes(20, 1)) == 40
        assert len(candidate_prefixes(20, 2)) == 1560
        assert len(candidate_prefixes(20, 2, prune=False)) == 1600
        with pytest.raises(ValueError):
            candidate_prefixes(3, 0)

    def test_contains_secret_prefix(self):
        inst = build_instance(small(seed=4))
        assert inst.spelling[:1] in candidate_prefixes(4, 1)

    def test_score_prefixes_matches_word_level(self):
        inst = build_instance(small(seed=9, n=3))
        table = SymbolTable(inst.generators)
        prefixes, lg, lrg = score_prefixes(ConjugateSet.from_words(inst.conjugates), table, 2)
        assert prefixes == candidate_prefixes(4, 2)
        for row in (0, 7, len(prefixes) - 1):
            g = spelling_word(inst.generators, prefixes[row])
            for j, c in enumerate(inst.conjugates):
                conj = conjugate(g.inverse(), c)
                assert lg[row, j] == evaluate_length(conj, "g")
                assert lrg[row, j] == evaluate_length(conj, "rg")


class TestAttack:
    def test_empty_secret_succeeds_immediately(self):
        inst = build_instance(small(secret_len=0))
        res = run_attack(inst, AttackConfig())
        assert res.success and res.spelling == () and res.steps == 0

    def test_success_is_verified_independently(self):
        wins = 0
        for seed in range(10):
            inst = build_instance(small(seed=seed, secret_len=2))
            res = run_attack(inst, AttackConfig())
            if res.success:
                wins += 1
                assert all(braid_equal(conjugate(res.word, b), c) for b, c in zip(inst.bases, inst.conjugates))
        assert wins > 0

    def test_determinism(self):
        inst = build_instance(small(seed=3))
        a = run_attack(inst, AttackConfig(seed=5, loop_policy="restart"))
        b = run_attack(inst, AttackConfig(seed=5, loop_policy="restart"))
        assert (a.success, a.spelling, a.steps, a.restarts) == (b.success, b.spelling, b.steps, b.restarts)

    def test_peeling_identity(self):
        inst = build_instance(small(seed=2))
        first = inst.spelling[0]
        peeled = ConjugateSet.from_words(inst.conjugates).conjugated_by(SymbolTable(inst.generators).runs((first,)))
        rest = spelling_word(inst.generators, inst.spelling[1:])
        expected = [Garside.of(conjugate(rest, b)) for b in inst.bases]
        assert peeled.matches(expected)

    def test_first_letter_peel_consumes_one_symbol(self):
        inst = build_instance(small(seed=6, secret_len=4))
        res = run_attack(inst, AttackConfig(peel="first-letter", lookahead=2))
        assert all(len(s.peeled) == 1 for s in res.trace)
        assert all(len(s.prefix) == 2 for s in res.trace[:-1])
        assert res.steps == 4

    def test_whole_peel_consumes_prefix(self):
        inst = build_instance(small(seed=6, secret_len=4))
        res = run_attack(inst, AttackConfig(lookahead=2))
        assert [len(s.peeled) for s in res.trace] == [2, 2]

    def test_attack_step_on_unconjugated_base(self):
        gens = [BraidWord(4, (1, 2, -3))]
        b = BraidWord(4, (2, 2, 1))
        chosen, ranking, prefixes = attack_step([b], gens, AttackConfig())
        assert prefixes == [(1,), (-1,)]
        again = attack_step([b], gens, AttackConfig())
        assert chosen == again[0] and ranking.order.tolist() == again[1].order.tolist()

    def test_strand_mismatch(self):
        with pytest.raises(StrandMismatch):
            attack_step([BraidWord(4, (1,))], [BraidWord(5, (1,))], AttackConfig())

    def test_restart_is_recorded_and_unwound(self):
        # a single generator that commutes with b makes every conjugate state repeat
        gens = [BraidWord(5, (1,)), BraidWord(5, (3, 4))]
        b = BraidWord(5, (3,))
        inst = GcspInstance(small(strands=5, m=2, n=1, secret_len=3), tuple(gens), (b,), (b,), None, None)
        res = run_attack(inst, AttackConfig(loop_policy="restart", max_steps=6, seed=1))
        restarts = [s.restart for s in res.trace if s.restart is not None]
        assert res.restarts == len(restarts) > 0
        for y in restarts:
            assert invert_spelling(y) == tuple(-s for s in reversed(y))
        if res.success:
            assert braid_equal(conjugate(res.word, b), b)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AttackConfig(lookahead=0)
        with pytest.raises(ValueError):
            AttackConfig(ordering="median")
        assert AttackConfig(length_fn="g", peel="first-letter").peel.value == "first-letter"

    def test_correct_generator_rank(self):
        inst = build_instance(small(strands=4, m=1, n=4, secret_len=1))
        assert correct_generator_rank(inst, AttackConfig()) in (1, 2)
        with pytest.raises(ValueError):
            correct_generator_rank(inst.without_secret(), AttackConfig())


class TestInstanceFiles:
    def test_round_trip(self):
        inst = build_instance(small(seed=11))
        text = dump_instance(inst)
        back = load_instance(text)
        assert back == inst
        assert dump_instance(back) == text

    def test_challenge_file(self):
        inst = build_instance(small(seed=11))
        text = dump_instance(inst, include_secret=False)
        assert "[secret]" not in text
        back = load_instance(text)
        assert back.secret is None and back.params.secret_len == 3
        assert back.conjugates == inst.conjugates

    @pytest.mark.parametrize("text,needle", [
        ("[generators]\nN=3 1\n[bases]\nN=3 1\n", "conjugates"),
        ("[oops]\n", "unknown section"),
        ("N=3 1\n", "before the first section"),
        ("[generators]\nN=3 1\n[bases]\nN=3 1\n[conjugates]\nN=3 1\nN=3 2\n", "conjugates"),
    ])
    def test_format_errors(self, text, needle):
        with pytest.raises(InstanceFormatError, match=needle):
            load_instance(text)

    def test_word_errors_report_line(self):
        with pytest.raises(ValueError, match="line 4"):
            load_instance("[generators]\nN=3 1\n[bases]\nN=3 0\n[conjugates]\nN=3 1\n")

    def test_strand_mismatch_in_file(self):
        with pytest.raises(StrandMismatch):
            load_instance("[generators]\nN=3 1\n[bases]\nN=4 1\n[conjugates]\nN=4 1\n")
