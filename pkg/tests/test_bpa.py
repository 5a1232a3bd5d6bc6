import random

import numpy as np
import pytest
from scipy.spatial import cKDTree

from conftest import random_primitive_substitution, shuffled_images_copy, tribonacci
from rauzykit import (
    Alphabet,
    BalancedPair,
    BpaLimits,
    IntPolynomial,
    MatrixMismatch,
    NonTermination,
    NotBalanced,
    NotFound,
    NotPrimitive,
    PairSubstitution,
    Substitution,
    Word,
    check_incidence_homomorphism,
    first_minimal_balanced_pair,
    hausdorff_distance,
    incidence_matrix,
    intersection_cloud,
    is_balanced,
    minimal_split,
    pair_incidence,
    pair_letter_name,
    projection_operator,
    reciprocal_factor_report,
    reflect_cloud,
    reverse_substitution,
    run_bpa,
    spectral_split,
    stream_for,
    substitution_from_dict,
    verify_common_points,
)
from rauzykit.bpa import corrupt_rule
from rauzykit.selfcheck import (
    flipped_tribonacci,
    interval_pair,
    no_balanced_prefix_substitution,
    nonpalindromic_pair,
)

AB = Alphabet(("a", "b"))


def w(text, alphabet=AB):
    return Word.from_string(alphabet, text)


class TestBalancedPairs:
    def test_is_balanced_examples(self):
        assert is_balanced(w("ab"), w("ba"))
        assert is_balanced(w("a"), w("a"))
        assert not is_balanced(w("ab"), w("aa"))

    def test_constructor_rejects_unbalanced(self):
        with pytest.raises(NotBalanced):
            BalancedPair(w("ab"), w("aa"))
        with pytest.raises(NotBalanced):
            BalancedPair(w("ab"), w("aba"))
        with pytest.raises(NotBalanced):
            BalancedPair(w(""), w(""))

    def test_minimal_split_interval_image(self):
        factors = minimal_split(BalancedPair(w("abaab"), w("baaba")))
        assert [(str(f.top), str(f.bottom)) for f in factors] == [
            ("ab", "ba"),
            ("a", "a"),
            ("ab", "ba"),
        ]

    def test_minimal_split_already_minimal(self):
        factors = minimal_split(BalancedPair(w("a"), w("a")))
        assert len(factors) == 1 and factors[0].length == 1

    def test_identical_words_split_to_singletons(self):
        word = w("abaabab")
        factors = minimal_split(BalancedPair(word, word))
        assert len(factors) == 7
        assert all(f.length == 1 for f in factors)

    def test_split_reconstructs_input(self):
        rng = random.Random(17)
        for _ in range(100):
            n = rng.randint(1, 12)
            top = [rng.randrange(2) for _ in range(n)]
            bottom = top[:]
            rng.shuffle(bottom)
            pair = BalancedPair(Word(AB, tuple(top)), Word(AB, tuple(bottom)))
            factors = minimal_split(pair)
            rebuilt_top = sum((list(f.top.indices) for f in factors), [])
            rebuilt_bottom = sum((list(f.bottom.indices) for f in factors), [])
            assert rebuilt_top == top and rebuilt_bottom == bottom
            for f in factors:
                # strict prefix counts differ inside a minimal pair
                for m in range(1, f.length):
                    top_prefix = Word(AB, f.top.indices[:m])
                    bottom_prefix = Word(AB, f.bottom.indices[:m])
                    assert not is_balanced(top_prefix, bottom_prefix)


class TestFirstMinimalPair:
    def test_interval_pair_starts_at_one(self):
        first, second = interval_pair()
        pair = first_minimal_balanced_pair(stream_for(first), stream_for(second), 100)
        assert (str(pair.top), str(pair.bottom)) == ("a", "a")

    def test_identical_streams(self):
        sub = tribonacci()
        pair = first_minimal_balanced_pair(stream_for(sub), stream_for(sub), 100)
        assert pair.length == 1

    def test_not_found_reports_cutoff(self):
        sub = no_balanced_prefix_substitution()
        rev = reverse_substitution(sub)
        result = first_minimal_balanced_pair(stream_for(sub), stream_for(rev), 10 ** 4)
        assert result == NotFound(10 ** 4)


class TestRunBpa:
    def test_interval_pair_exact(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        assert isinstance(ps, PairSubstitution)
        assert ps.pair_alphabet.letters == ("A", "B", "C")
        assert [(str(p.top), str(p.bottom)) for p in ps.pairs] == [
            ("a", "a"),
            ("b", "b"),
            ("ab", "ba"),
        ]
        assert ps.rule_table() == {"A": "ABA", "B": "C", "C": "CAC"}

    def test_matrix_mismatch(self):
        first, _ = interval_pair()
        other = Substitution.from_rules(["a", "b"], {"a": "ab", "b": "a"})
        with pytest.raises(MatrixMismatch):
            run_bpa(first, other)

    def test_not_primitive_rejected(self):
        stuck = Substitution.from_rules(["a", "b"], {"a": "ab", "b": "b"})
        with pytest.raises(NotPrimitive):
            run_bpa(stuck, stuck)

    def test_max_pairs_limit(self):
        sub = flipped_tribonacci()
        result = run_bpa(sub, reverse_substitution(sub), BpaLimits(max_pairs=5))
        assert isinstance(result, NonTermination)
        assert result.limit == "max_pairs" and result.limit_value == 5
        assert 0 < len(result.pairs) <= 5

    def test_max_pair_length_limit(self):
        first, second = nonpalindromic_pair()
        result = run_bpa(first, second, BpaLimits(max_pair_length=3))
        assert isinstance(result, NonTermination)
        assert result.limit == "max_pair_length"

    def test_content_reconstruction(self):
        first, second = nonpalindromic_pair()
        ps = run_bpa(first, second)
        for i, pair in enumerate(ps.pairs):
            image_top = first.apply(pair.top).indices
            image_bottom = second.apply(pair.bottom).indices
            rebuilt_top = sum((list(ps.pairs[j].top.indices) for j in ps.rules[i]), [])
            rebuilt_bottom = sum((list(ps.pairs[j].bottom.indices) for j in ps.rules[i]), [])
            assert tuple(rebuilt_top) == image_top
            assert tuple(rebuilt_bottom) == image_bottom

    def test_determinism(self):
        first, second = nonpalindromic_pair()
        a = run_bpa(first, second)
        b = run_bpa(first, second)
        assert a == b

    def test_pair_letter_names_extend_past_z(self):
        assert pair_letter_name(0) == "A"
        assert pair_letter_name(25) == "Z"
        assert pair_letter_name(26) == "AA"
        assert pair_letter_name(27) == "AB"


class TestPairIncidence:
    def test_interval_char_poly(self):
        first, second = interval_pair()
        inc = pair_incidence(run_bpa(first, second))
        assert inc.char_polynomial == IntPolynomial((-1, 4, -4, 1))

    def test_homomorphism_exact(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        assert check_incidence_homomorphism(ps, first)

    def test_factor_report_self_reciprocal(self):
        first, second = interval_pair()
        rep = reciprocal_factor_report(first, run_bpa(first, second))
        assert rep.p == IntPolynomial((1, -3, 1))
        assert rep.p_equals_q and rep.p_divides and rep.q_divides


class TestIntersectionCloud:
    def setup_method(self):
        self.first = tribonacci()
        self.second = reverse_substitution(self.first)
        self.ps = run_bpa(self.first, self.second)
        self.op = projection_operator(spectral_split(incidence_matrix(self.first)))

    def test_single_point(self):
        cloud = intersection_cloud(self.ps, self.op, 1)
        stream = stream_for(self.ps.as_substitution())
        first_letter = int(stream.prefix_indices(1)[0])
        expected = self.op.project(self.ps.letter_image(first_letter))
        assert np.allclose(cloud.coords[0], expected)
        assert cloud.labels[0] == self.ps.name(first_letter)

    def test_symmetry_at_grid_scale(self):
        cloud = intersection_cloud(self.ps, self.op, 10 ** 5)
        eps = 0.02 * cloud.diameter()
        assert hausdorff_distance(cloud, reflect_cloud(cloud), eps) < 3 * eps

    def test_points_lie_on_both_parent_clouds(self):
        from rauzykit import rauzy_cloud

        n = 4 * 10 ** 4
        cloud = intersection_cloud(self.ps, self.op, 10 ** 3)
        for sub in (self.first, self.second):
            parent = rauzy_cloud(sub, n, self.op)
            dists, _ = cKDTree(parent.coords).query(cloud.coords)
            assert dists.max() < 0.02 * parent.diameter()

    def test_thread_count_invariance(self):
        one = intersection_cloud(self.ps, self.op, 4000, threads=1)
        four = intersection_cloud(self.ps, self.op, 4000, threads=4)
        assert np.array_equal(one.coords, four.coords)


class TestVerifyCommonPoints:
    def test_interval_pair_passes(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        result = verify_common_points(ps, first, second, 1000)
        assert result.ok and result.first_failure is None

    def test_single_prefix_letter(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        assert verify_common_points(ps, first, second, 1).ok

    def test_corrupted_rules_fail_with_index(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        bad = corrupt_rule(ps, rule_index=2, position=1, new_letter=1)  # C -> CBC
        result = verify_common_points(bad, first, second, 1000)
        assert not result.ok
        assert result.first_failure is not None and result.first_failure >= 0


class TestSelfRun:
    def test_reproduces_substitution_up_to_relabeling(self):
        sub = tribonacci()
        ps = run_bpa(sub, sub)
        assert ps.size == sub.alphabet.size
        assert all(pair.length == 1 for pair in ps.pairs)
        to_letter = {i: ps.pairs[i].top.indices[0] for i in range(ps.size)}
        for i in range(ps.size):
            image = tuple(to_letter[j] for j in ps.rules[i])
            assert image == sub.images[to_letter[i]].indices


class TestSerialization:
    def test_pair_json_has_pairs_section(self):
        first, second = interval_pair()
        ps = run_bpa(first, second)
        data = ps.to_dict()
        assert data["pairs"]["C"] == {"top": "ab", "bottom": "ba"}
        assert data["rules"]["A"] == "ABA"
        # the base substitution format still parses, ignoring the extra key
        again = substitution_from_dict(data)
        assert again == ps.as_substitution()


class TestRandomizedRuns:
    def test_shuffled_copies_terminate_and_intertwine(self):
        rng = random.Random(71)
        limits = BpaLimits(prefix_cutoff=20000, max_pairs=80, max_pair_length=20000)
        successes = 0
        attempts = 0
        while successes < 25 and attempts < 400:
            attempts += 1
            first = random_primitive_substitution(rng)
            second = shuffled_images_copy(rng, first)
            result = run_bpa(first, second, limits)
            if not isinstance(result, PairSubstitution):
                continue
            assert check_incidence_homomorphism(result, first)
            successes += 1
        assert successes >= 25
