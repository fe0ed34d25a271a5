import itertools
import math

import numpy as np
import pytest

from sostransport.certifier import (
    Certified,
    GramCertificate,
    RefutedByPoint,
    Undecided,
    build_gram_problem,
    certify_sos,
    export_sdpa,
    interior_point,
    validate_certificate,
)
from sostransport.polynomials import (
    Polynomial,
    monomial_basis,
    motzkin,
    sup_distance,
    sup_norm,
)

import oracles


def poly_1d(*coeffs):
    return Polynomial(1, {(k,): c for k, c in enumerate(coeffs)})


class TestBuildGramProblem:
    def test_one_plus_x_squared(self):
        prob = build_gram_problem(poly_1d(1.0, 0.0, 1.0), 1)
        assert prob.basis.order == [(0,), (1,)]
        assert prob.groups[(0,)] == [(0, 0)]
        assert sorted(prob.groups[(1,)]) == [(0, 1), (1, 0)]
        assert prob.groups[(2,)] == [(1, 1)]
        assert prob.targets == {(0,): 1.0, (1,): 0.0, (2,): 1.0}

    def test_bivariate_group_count(self):
        prob = build_gram_problem(Polynomial.zero(2), 1)
        assert len(prob.basis) == 3
        # enumeration oracle: all |gamma| <= 2 in two variables
        gammas = {
            g
            for g in itertools.product(range(3), repeat=2)
            if sum(g) <= 2
        }
        assert set(prob.gammas) == gammas
        assert len(prob.gammas) == 6

    def test_zero_polynomial_targets(self):
        prob = build_gram_problem(Polynomial.zero(1), 3)
        assert all(v == 0.0 for v in prob.targets.values())

    def test_groups_partition_all_positions(self):
        prob = build_gram_problem(Polynomial.zero(2), 2)
        m = len(prob.basis)
        seen = sorted(pos for group in prob.groups.values() for pos in group)
        assert seen == sorted(itertools.product(range(m), repeat=2))

    def test_degree_overflow(self):
        with pytest.raises(ValueError):
            build_gram_problem(poly_1d(0.0, 0.0, 0.0, 1.0), 1)


class TestCertify:
    def test_perfect_square(self):
        out = certify_sos(poly_1d(1.0, -2.0, 1.0), 1)
        assert isinstance(out, Certified)
        cert = out.certificate
        assert cert.min_eig >= 0.0 - 1e-12
        assert np.allclose(cert.G, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-9)
        assert validate_certificate(poly_1d(1.0, -2.0, 1.0), cert)

    def test_negative_constant_refuted_at_origin(self):
        out = certify_sos(Polynomial.constant(1, -1.0), 1)
        assert isinstance(out, RefutedByPoint)
        assert out.witness == (0.0,)
        assert out.value == -1.0

    def test_motzkin_undecided_never_certified(self):
        out = certify_sos(motzkin(), 3, max_iter=4000)
        assert isinstance(out, Undecided)
        assert out.iterations == 4000
        # independent nonnegativity: three-term AM-GM, so no witness can exist
        for pt in oracles.sample_points(2, 200, seed=5):
            assert 3.0 * oracles.motzkin_am_gm_gap(*pt) >= -1e-9
            assert motzkin().evaluate(pt) >= -1e-9

    def test_zero_polynomial_certifies(self):
        out = certify_sos(Polynomial.zero(1), 2)
        assert isinstance(out, Certified)

    def test_scaled_input_certifies(self):
        # tolerances are relative to the coefficient scale
        p = 1e9 * poly_1d(1.0, -2.0, 1.0)
        out = certify_sos(p, 1)
        assert isinstance(out, Certified)
        assert validate_certificate(p, out.certificate)

    def test_constructed_sos_certifies(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 4))
            d = int(rng.integers(1, 3))
            basis = monomial_basis(n, d)
            p = Polynomial.zero(n)
            for _ in range(int(rng.integers(1, 4))):
                q = basis.polynomial(rng.normal(size=len(basis)))
                p = p + q * q
            out = certify_sos(p, d, max_iter=20000)
            assert isinstance(out, Certified)
            assert validate_certificate(p, out.certificate)

    def test_planted_negative_never_certified(self, rng):
        for _ in range(20):
            basis = monomial_basis(2, 2)
            q = basis.polynomial(rng.normal(size=len(basis)))
            p = q * q - Polynomial.constant(2, 1.0 + float(rng.uniform(0, 3)))
            out = certify_sos(p, 2, max_iter=3000)
            assert not isinstance(out, Certified)

    def test_affine_projection_exactness(self):
        # the stored G comes from the affine step, so every group sums to its
        # target (scaled) to working precision
        p = poly_1d(2.0, 0.0, 3.0, 0.0, 1.0)
        out = certify_sos(p, 2)
        assert isinstance(out, Certified)
        prob = build_gram_problem(p, 2)
        scale = max(1.0, sup_norm(p))
        for gamma, positions in prob.groups.items():
            total = sum(out.certificate.G[i, j] for i, j in positions)
            assert abs(total - prob.targets[gamma]) <= 1e-12 * scale


class TestValidate:
    def test_tampered_matrix_rejected(self):
        p = poly_1d(1.0, -2.0, 1.0)
        out = certify_sos(p, 1)
        G = out.certificate.G.copy()
        G[0, 0] += 0.1
        bad = GramCertificate(
            basis=out.certificate.basis,
            G=G,
            scale=out.certificate.scale,
            min_eig=out.certificate.min_eig,
            coeff_residual=out.certificate.coeff_residual,
            squares=out.certificate.squares,
        )
        assert not validate_certificate(p, bad)

    def test_identity_gram_matches_interior_point(self):
        n, d = 2, 2
        basis = monomial_basis(n, d)
        m = len(basis)
        f = interior_point(n, d)
        # reconstruction oracle: sum of x^(2 alpha) via explicit convolution
        recon = {}
        for a in basis.order:
            key = tuple(2 * e for e in a)
            recon[key] = recon.get(key, 0.0) + 1.0
        assert f == Polynomial(n, recon)
        squares = [(1.0, Polynomial.monomial(n, a)) for a in basis.order]
        cert = GramCertificate(
            basis=basis,
            G=np.eye(m),
            scale=1.0,
            min_eig=1.0,
            coeff_residual=0.0,
            squares=squares,
        )
        assert validate_certificate(f, cert)

    def test_certificate_json_round_trip(self):
        p = poly_1d(1.0, 0.0, 2.0, 0.0, 1.0)
        out = certify_sos(p, 2)
        cert2 = GramCertificate.from_dict(out.certificate.to_dict())
        assert validate_certificate(p, cert2)


class TestInteriorPoint:
    def test_examples(self):
        assert interior_point(1, 1) == poly_1d(1.0, 0.0, 1.0)
        assert interior_point(1, 2) == poly_1d(1.0, 0.0, 1.0, 0.0, 1.0)
        assert interior_point(2, 1) == Polynomial(
            2, {(0, 0): 1.0, (2, 0): 1.0, (0, 2): 1.0}
        )

    @pytest.mark.parametrize("n,d", [(1, 0), (1, 3), (2, 2), (3, 2)])
    def test_degree_and_certifiability(self, n, d):
        f = interior_point(n, d)
        assert f.degree == 2 * d
        out = certify_sos(f, d)
        assert isinstance(out, Certified)


class TestExportSdpa:
    def test_structure_counts(self, tmp_path):
        prob = build_gram_problem(poly_1d(1.0, 0.0, 1.0), 1)
        path = tmp_path / "simple.dat-s"
        export_sdpa(prob, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("*")]
        assert lines[0].split()[0] == "3"      # constraints
        assert lines[1].split()[0] == "1"      # one block
        assert lines[2].split()[0] == "2"      # block size
        assert [float(v) for v in lines[3].split()] == [1.0, 0.0, 1.0]
        entries = [l.split() for l in lines[4:]]
        assert all(int(e[2]) <= int(e[3]) for e in entries)  # upper triangle

    def test_motzkin_counts(self, tmp_path):
        prob = build_gram_problem(motzkin(), 3)
        path = tmp_path / "motzkin.dat-s"
        export_sdpa(prob, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("*")]
        assert int(lines[0].split()[0]) == 28
        assert int(lines[2].split()[0]) == 10

    def test_zero_polynomial_rhs(self, tmp_path):
        prob = build_gram_problem(Polynomial.zero(1), 1)
        path = tmp_path / "zero.dat-s"
        export_sdpa(prob, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("*")]
        assert all(float(v) == 0.0 for v in lines[3].split())

    def test_deterministic_bytes(self, tmp_path):
        prob = build_gram_problem(motzkin(), 3)
        a, b = tmp_path / "a.dat-s", tmp_path / "b.dat-s"
        export_sdpa(prob, a)
        export_sdpa(prob, b)
        assert a.read_bytes() == b.read_bytes()
