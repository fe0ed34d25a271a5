import math

import numpy as np
import pytest

from sostransport.moments import (
    Explicit,
    GaussianFull,
    GaussianOrthant,
    GradedGaussian,
    PointEval,
    Riesz,
    functional_apply,
    functional_from_dict,
    gamma_half,
    gaussian_moment_full,
    gaussian_moment_orthant,
    riesz_apply,
)
from sostransport.polynomials import Polynomial, monomial_basis, motzkin

import oracles

SQRT_PI = math.sqrt(math.pi)


class TestGammaHalf:
    def test_anchors(self):
        assert gamma_half(1) == SQRT_PI
        assert gamma_half(2) == 1.0
        assert gamma_half(3) == pytest.approx(SQRT_PI / 2, rel=1e-15)
        assert gamma_half(4) == 1.0

    def test_recurrence(self):
        for m in range(1, 30):
            assert gamma_half(m + 2) == pytest.approx((m / 2) * gamma_half(m), rel=1e-15)


class TestClosedFormMoments:
    def test_full_constant(self):
        assert gaussian_moment_full((0,)) == pytest.approx(1.7724538509055159, abs=1e-12)
        assert gaussian_moment_full((0,)) == pytest.approx(oracles.quad_moment((0,)), abs=1e-10)

    def test_full_odd_is_exactly_zero(self):
        for k in (1, 3, 5, 11):
            assert gaussian_moment_full((k,)) == 0.0
        assert gaussian_moment_full((2, 1)) == 0.0

    def test_full_2d_against_true_2d_quadrature(self):
        # genuine two-dimensional adaptive quadrature, not a product shortcut
        assert gaussian_moment_full((2, 0)) == pytest.approx(math.pi / 2, abs=1e-12)
        assert gaussian_moment_full((2, 0)) == pytest.approx(
            oracles.nquad_moment((2, 0)), abs=1e-8
        )
        assert gaussian_moment_full((2, 2)) == pytest.approx(
            oracles.nquad_moment((2, 2)), abs=1e-8
        )

    def test_orthant_values(self):
        assert gaussian_moment_orthant((0,)) == pytest.approx(0.8862269254527580, abs=1e-12)
        assert gaussian_moment_orthant((1,)) == pytest.approx(0.5, abs=1e-15)
        assert gaussian_moment_orthant((2,)) == pytest.approx(0.4431134627263790, abs=1e-12)
        for k in range(6):
            assert gaussian_moment_orthant((k,)) == pytest.approx(
                oracles.quad_moment((k,), orthant=True), abs=1e-10
            )

    def test_orthant_2d_against_true_2d_quadrature(self):
        assert gaussian_moment_orthant((3, 1)) == pytest.approx(
            oracles.nquad_moment((3, 1), orthant=True), abs=1e-8
        )

    @pytest.mark.parametrize("k", range(13))
    def test_univariate_agreement(self, k):
        assert gaussian_moment_full((k,)) == pytest.approx(
            oracles.quad_moment((k,)), abs=1e-8
        )
        assert gaussian_moment_orthant((k,)) == pytest.approx(
            oracles.quad_moment((k,), orthant=True), abs=1e-8
        )

    def test_factorization_exact(self, rng):
        for _ in range(50):
            alpha = tuple(int(e) for e in rng.integers(0, 8, size=3))
            prod = 1.0
            for e in alpha:
                prod *= gaussian_moment_full((e,))
            assert gaussian_moment_full(alpha) == prod

    def test_orthant_strictly_positive(self, rng):
        for _ in range(50):
            alpha = tuple(int(e) for e in rng.integers(0, 10, size=2))
            assert gaussian_moment_orthant(alpha) > 0.0


class TestFunctionals:
    def test_graded_on_one_plus_x_squared(self):
        l1 = GradedGaussian(1, 1, "even", "full")
        p = Polynomial(1, {(0,): 1.0, (2,): 1.0})
        assert l1(p) == pytest.approx(SQRT_PI / 2, rel=1e-14)
        assert l1(p) == pytest.approx(oracles.quad_moment((2,)), abs=1e-10)

    def test_graded_annihilates_low_degree(self, rng):
        basis = monomial_basis(2, 5)
        l3 = GradedGaussian(2, 3, "even", "full")
        for _ in range(20):
            p = basis.polynomial(rng.normal(size=len(basis)))  # degree < 6
            assert l3(p) == 0.0

    def test_graded_annihilation_on_monomials_exact(self):
        l2 = GradedGaussian(1, 2, "even", "full")
        for k in range(10):
            v = l2(Polynomial.monomial(1, (k,)))
            assert v == (gaussian_moment_full((k,)) if k == 4 else 0.0)

    def test_graded_odd_orthant(self):
        lt1 = GradedGaussian(1, 1, "odd", "orthant")
        p = Polynomial(1, {(1,): 2.0, (2,): 7.0})
        assert lt1(p) == pytest.approx(2 * 0.5, rel=1e-14)

    def test_point_eval_motzkin(self):
        ly = PointEval(2, (1.0, 1.0))
        assert ly(motzkin()) == 0.0

    def test_linearity(self, rng):
        basis = monomial_basis(2, 4)
        fs = [
            GaussianFull(2),
            GaussianOrthant(2),
            GradedGaussian(2, 2, "even", "full"),
            PointEval(2, (0.3, -1.2)),
        ]
        for F in fs:
            for _ in range(10):
                p = basis.polynomial(rng.normal(size=len(basis)))
                q = basis.polynomial(rng.normal(size=len(basis)))
                a, b = rng.normal(), rng.normal()
                lhs = F(a * p + b * q)
                rhs = a * F(p) + b * F(q)
                assert abs(lhs - rhs) <= 1e-10 * (1.0 + abs(rhs))

    def test_positive_on_constructed_sos(self, rng):
        basis = monomial_basis(2, 2)
        F = GaussianFull(2)
        for _ in range(25):
            q = basis.polynomial(rng.normal(size=len(basis)))
            assert F(q * q) > 0.0

    def test_variable_count_mismatch(self):
        with pytest.raises(ValueError):
            GaussianFull(2)(Polynomial.constant(1, 1.0))


class TestRiesz:
    def test_all_ones_sequence(self):
        p = Polynomial(1, {(2,): 1.0, (1,): -2.0, (0,): 1.0})
        table = {(0,): 1.0, (1,): 1.0, (2,): 1.0}
        assert riesz_apply(table, p) == 0.0

    def test_matches_gaussian_full(self, rng):
        basis = monomial_basis(2, 3)
        table = {a: gaussian_moment_full(a) for a in basis.order}
        for _ in range(10):
            p = basis.polynomial(rng.normal(size=len(basis)))
            assert riesz_apply(table, p) == pytest.approx(GaussianFull(2)(p), rel=1e-14)

    def test_zero_sequence(self, rng):
        basis = monomial_basis(1, 4)
        table = {a: 0.0 for a in basis.order}
        p = basis.polynomial(rng.normal(size=len(basis)))
        assert riesz_apply(table, p) == 0.0

    def test_missing_entry_is_error(self):
        with pytest.raises(KeyError):
            riesz_apply({(0,): 1.0}, Polynomial(1, {(1,): 1.0}))

    def test_explicit_degree_bound(self):
        F = Explicit(1, {(0,): 1.0}, degree_bound=1)
        assert F(Polynomial.constant(1, 2.0)) == 2.0
        with pytest.raises(ValueError):
            F(Polynomial(1, {(2,): 1.0}))


class TestJson:
    @pytest.mark.parametrize(
        "F",
        [
            GaussianFull(2),
            GaussianOrthant(1),
            GradedGaussian(2, 3, "odd", "orthant"),
            Riesz(1, {(0,): 1.0, (2,): 0.5}),
            PointEval(2, (1.0, -2.0)),
            Explicit(1, {(1,): 2.0}, degree_bound=3),
        ],
    )
    def test_round_trip(self, F):
        G = functional_from_dict(F.to_dict())
        p = Polynomial.constant(F.n, 2.5)  # inside every table's support
        assert G(p) == F(p)
        assert G.to_dict() == F.to_dict()

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            functional_from_dict({"kind": "nope", "n": 1})
