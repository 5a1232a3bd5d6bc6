import math
import random

import pytest

from conftest import fibonacci, random_substitution, tribonacci
from rauzykit import (
    DegreeTooLarge,
    DivideByZeroPoly,
    IntMatrix,
    IntPolynomial,
    NegativeEntry,
    Substitution,
    all_roots,
    char_poly,
    char_poly_via_cofactors,
    classify_pisot,
    determinant,
    dominant_real_root,
    evaluate_at_matrix,
    incidence_matrix,
    is_irreducible_over_q,
    is_primitive,
    is_unimodular,
    minimal_polynomial_of_dominant_root,
    poly_divides,
    poly_exact_div,
    poly_mul,
    positive_leading,
    reciprocal_poly,
)

TRIB_POLY = IntPolynomial((-1, -1, -1, 1))  # x^3 - x^2 - x - 1


def random_matrix(rng, k, lo=-5, hi=5):
    return IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(k)] for _ in range(k)])


class TestCharPoly:
    def test_tribonacci(self):
        assert char_poly(incidence_matrix(tribonacci())) == TRIB_POLY

    def test_identity_2x2(self):
        assert char_poly(IntMatrix.identity(2)) == IntPolynomial((1, -2, 1))

    def test_interval_pair_matrix(self):
        m = IntMatrix.from_rows([[2, 0, 1], [1, 0, 0], [0, 1, 2]])
        expected = char_poly_via_cofactors(m)
        assert expected == IntPolynomial((-1, 4, -4, 1))
        assert char_poly(m) == expected

    def test_agrees_with_cofactor_oracle(self):
        rng = random.Random(21)
        for _ in range(120):
            k = rng.randint(1, 5)
            m = random_matrix(rng, k)
            assert char_poly(m) == char_poly_via_cofactors(m)

    def test_cayley_hamilton(self):
        rng = random.Random(22)
        for _ in range(60):
            k = rng.randint(1, 5)
            m = random_matrix(rng, k)
            image = evaluate_at_matrix(char_poly(m), m)
            assert all(e == 0 for row in image.rows for e in row)

    def test_string_form(self):
        assert str(TRIB_POLY) == "x^3 - x^2 - x - 1"
        assert str(IntPolynomial((-1, 4, -4, 1))) == "x^3 - 4x^2 + 4x - 1"
        assert str(IntPolynomial.zero()) == "0"


class TestDeterminant:
    def test_interval_matrix(self):
        m = IntMatrix.from_rows([[2, 1], [1, 1]])
        assert determinant(m) == 1 and is_unimodular(m)

    def test_zero_matrix(self):
        m = IntMatrix.from_rows([[0, 0], [0, 0]])
        assert determinant(m) == 0 and not is_unimodular(m)

    def test_family_always_unimodular(self):
        for i in range(1, 7):
            m = IntMatrix.from_rows([[i, i, 1], [1, 0, 0], [0, 1, 0]])
            assert abs(determinant(m)) == 1

    def test_matches_charpoly_constant(self):
        rng = random.Random(23)
        for _ in range(80):
            k = rng.randint(1, 5)
            m = random_matrix(rng, k)
            p = char_poly(m)
            const = p.coeffs[0] if p.coeffs else 0
            assert determinant(m) == (-1) ** k * const

    def test_unimodular_constant_term(self):
        # random products of integer shears have determinant +-1
        rng = random.Random(24)
        for _ in range(50):
            k = rng.randint(2, 4)
            m = IntMatrix.identity(k)
            for _ in range(6):
                i, j = rng.randrange(k), rng.randrange(k)
                if i == j:
                    continue
                shear = IntMatrix.identity(k).rows
                shear = [list(r) for r in shear]
                shear[i][j] = rng.randint(-2, 2)
                m = m @ IntMatrix.from_rows(shear)
            p = char_poly(m)
            assert abs(p.coeffs[0]) == 1


class TestPrimitivity:
    def test_tribonacci(self):
        assert is_primitive(incidence_matrix(tribonacci()))

    def test_identity_not_primitive(self):
        assert not is_primitive(IntMatrix.identity(2))

    def test_permutation_not_primitive(self):
        assert not is_primitive(IntMatrix.from_rows([[0, 1], [1, 0]]))

    def test_negative_entry_rejected(self):
        with pytest.raises(NegativeEntry):
            is_primitive(IntMatrix.from_rows([[1, -1], [1, 1]]))


class TestPolynomialOps:
    def test_product_example(self):
        assert poly_mul(IntPolynomial((1, -3, 1)), IntPolynomial((-1, 1))) == IntPolynomial(
            (-1, 4, -4, 1)
        )

    def test_reciprocal_with_normalization(self):
        raw = reciprocal_poly(TRIB_POLY)
        assert raw == IntPolynomial((1, -1, -1, -1))  # -x^3 - x^2 - x + 1 flipped low-first
        assert positive_leading(raw) == IntPolynomial((-1, 1, 1, 1))  # x^3 + x^2 + x - 1

    def test_reciprocal_drops_degree_at_zero_constant(self):
        assert reciprocal_poly(IntPolynomial((0, 1, 1))) == IntPolynomial((1, 1))

    def test_divides(self):
        assert poly_divides(IntPolynomial((-1, 1)), IntPolynomial((-1, 0, 1)))
        assert not poly_divides(IntPolynomial((1, 1)), IntPolynomial((1, 0, 1)))

    def test_divide_by_zero(self):
        with pytest.raises(DivideByZeroPoly):
            poly_divides(IntPolynomial.zero(), TRIB_POLY)

    def test_divides_products(self):
        rng = random.Random(31)
        for _ in range(200):
            d = IntPolynomial(tuple(rng.randint(-4, 4) for _ in range(rng.randint(1, 4))))
            q = IntPolynomial(tuple(rng.randint(-4, 4) for _ in range(rng.randint(1, 4))))
            if d.is_zero:
                continue
            assert poly_divides(d, poly_mul(d, q))

    def test_exact_div_recovers_cofactor(self):
        prod = poly_mul(TRIB_POLY, IntPolynomial((-1, 1, 1, 1)))
        assert poly_exact_div(prod, TRIB_POLY) == IntPolynomial((-1, 1, 1, 1))


class TestIrreducibility:
    def test_tribonacci_irreducible(self):
        assert is_irreducible_over_q(TRIB_POLY)

    def test_difference_of_squares(self):
        assert not is_irreducible_over_q(IntPolynomial((-1, 0, 1)))

    def test_quadratic_with_irrational_roots(self):
        assert is_irreducible_over_q(IntPolynomial((1, -6, 1)))

    def test_quartic_without_rational_roots(self):
        # (x^2 + x + 1)(x^2 + 2) has no rational roots but factors
        p = poly_mul(IntPolynomial((1, 1, 1)), IntPolynomial((2, 0, 1)))
        assert not is_irreducible_over_q(p)

    def test_irreducible_quartic(self):
        assert is_irreducible_over_q(IntPolynomial((1, 0, 0, 0, 1)))  # x^4 + 1

    def test_degree_cap(self):
        with pytest.raises(DegreeTooLarge):
            is_irreducible_over_q(IntPolynomial((1,) + (0,) * 12 + (1,)))

    def test_minimal_polynomial_extraction(self):
        p = IntPolynomial((-1, 4, -4, 1))  # (x^2 - 3x + 1)(x - 1)
        assert minimal_polynomial_of_dominant_root(p) == IntPolynomial((1, -3, 1))


class TestRoots:
    def test_golden_quadratic(self):
        roots = sorted(r.value.real for r in all_roots(IntPolynomial((1, -3, 1))))
        assert roots[1] == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-12)
        assert roots[0] == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)

    def test_linear(self):
        (root,) = all_roots(IntPolynomial((-1, 1)))
        assert root.value == pytest.approx(1.0, abs=1e-14)

    def test_tribonacci_roots(self):
        roots = all_roots(TRIB_POLY)
        lam = max(r.value.real for r in roots)
        assert lam == pytest.approx(1.839286755214161, abs=1e-12)
        pair = [r.value for r in roots if abs(r.value.imag) > 1e-9]
        # |conjugate pair product| = 1/lambda because |det| = 1
        assert abs(pair[0] * pair[1]) == pytest.approx(1 / lam, abs=1e-12)
        assert abs(pair[0]) == pytest.approx(0.7373527, abs=1e-6)

    def test_residuals_below_tolerance(self):
        for r in all_roots(IntPolynomial((-1, 4, -4, 1)), tol=1e-12):
            assert r.residual < 1e-12

    def test_root_sum_and_product(self):
        rng = random.Random(41)
        for _ in range(60):
            deg = rng.randint(1, 5)
            coeffs = [rng.randint(-5, 5) for _ in range(deg)] + [rng.choice([1, -1, 2])]
            p = IntPolynomial(tuple(coeffs))
            if p.degree < 1:
                continue
            roots = [r.value for r in all_roots(p)]
            total = sum(roots)
            prod = 1
            for z in roots:
                prod *= z
            assert abs(total - (-p.coeffs[-2] / p.leading)) < 1e-6
            assert abs(prod - (-1) ** p.degree * p.coeffs[0] / p.leading) < 1e-6

    def test_dominant_root_bracket(self):
        dom = dominant_real_root(TRIB_POLY)
        assert dom.verified
        assert float(dom.upper - dom.lower) < 1e-20
        # the float value is the midpoint of the exact bracket, to rounding
        assert dom.value == pytest.approx(float(dom.lower), abs=1e-15)
        assert TRIB_POLY.evaluate(dom.lower) * TRIB_POLY.evaluate(dom.upper) < 0


class TestClassification:
    def test_tribonacci_all_flags(self):
        rep = classify_pisot(tribonacci())
        assert rep.is_primitive and rep.is_pisot and rep.is_irreducible and rep.is_unimodular
        assert rep.margin > 1e-9

    def test_fibonacci(self):
        rep = classify_pisot(fibonacci())
        assert rep.is_pisot and rep.is_irreducible and rep.is_unimodular
        assert rep.perron_root == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)

    def test_thue_morse_like(self):
        # a -> ab, b -> ba: primitive, reducible char poly x(x-2), determinant 0
        sub = Substitution.from_rules(["a", "b"], {"a": "ab", "b": "ba"})
        rep = classify_pisot(sub)
        assert rep.is_primitive
        assert not rep.is_irreducible
        assert not rep.is_unimodular
        assert rep.perron_root == pytest.approx(2.0, abs=1e-12)
        # dominant root is a rational integer: no conjugates, Pisot by the
        # strict definition, with infinite margin
        assert rep.is_pisot and rep.margin == math.inf

    def test_identity_substitution(self):
        sub = Substitution.from_rules(["a", "b"], {"a": "a", "b": "b"})
        rep = classify_pisot(sub)
        assert not rep.is_primitive and not rep.is_pisot and rep.is_unimodular

    def test_reverse_has_same_char_poly(self):
        rng = random.Random(51)
        from rauzykit import reverse_substitution

        for _ in range(60):
            sub = random_substitution(rng)
            assert char_poly(incidence_matrix(sub)) == char_poly(
                incidence_matrix(reverse_substitution(sub))
            )
