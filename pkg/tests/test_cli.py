import json

import pytest

from sostransport.cli import main
from sostransport.polynomials import Polynomial, motzkin


def write_poly(path, p: Polynomial):
    path.write_text(json.dumps(p.to_dict()))
    return str(path)


@pytest.fixture
def square_file(tmp_path):
    return write_poly(tmp_path / "sq.json", Polynomial(1, {(0,): 1.0, (1,): -2.0, (2,): 1.0}))


@pytest.fixture
def neg_file(tmp_path):
    return write_poly(tmp_path / "neg.json", Polynomial.constant(1, -1.0))


@pytest.fixture
def motzkin_file(tmp_path):
    return write_poly(tmp_path / "motzkin.json", motzkin())


class TestCertify:
    def test_square_exit_zero(self, square_file, tmp_path, capsys):
        out = tmp_path / "cert.json"
        code = main(["certify", square_file, "-d", "1", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["outcome"] == "certified"
        assert "config" in payload

    def test_negative_exit_two(self, neg_file, tmp_path):
        out = tmp_path / "cert.json"
        code = main(["certify", neg_file, "-d", "1", "--out", str(out)])
        assert code == 2
        payload = json.loads(out.read_text())
        assert payload["value"] < 0

    def test_motzkin_exit_three(self, motzkin_file, tmp_path):
        code = main(
            ["certify", motzkin_file, "-d", "3", "--max-iter", "1500", "--out", str(tmp_path / "m.json")]
        )
        assert code == 3

    def test_malformed_input_exit_one(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["certify", str(bad), "-d", "1"]) == 1

    def test_bad_tolerance_exit_one(self, square_file):
        assert main(["certify", square_file, "-d", "1", "--tol-eig", "0"]) == 1


class TestTransport:
    def test_motzkin_demo(self, tmp_path):
        out = tmp_path / "plan.json"
        code = main(["transport", "rank-one", "--demo", "motzkin", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["kind"] == "rank_one"
        assert payload["tau"] > 0
        assert main(["verify", str(out)]) == 0

    def test_orthant_demo(self, tmp_path):
        out = tmp_path / "plan.json"
        code = main(["transport", "orthant", "--demo", "orthant-x", "--out", str(out)])
        assert code == 0
        assert main(["verify", str(out)]) == 0

    def test_hypothesis_violation_exit_five(self, tmp_path):
        gen = tmp_path / "x.json"
        write_poly(gen, Polynomial.variable(1, 0))
        code = main(["transport", "rank-one", "--generators", str(gen), "-d", "1"])
        assert code == 5

    def test_graded_from_files(self, tmp_path):
        samples = {
            "polys": [
                Polynomial.constant(1, 1.0).to_dict(),
                Polynomial(1, {(2,): 1.0}).to_dict(),
            ]
        }
        sf = tmp_path / "samples.json"
        sf.write_text(json.dumps(samples))
        out = tmp_path / "plan.json"
        code = main(["transport", "graded", "--samples", str(sf), "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["kind"] == "graded_full"
        assert main(["verify", str(out)]) == 0

    def test_missing_samples_exit_one(self):
        assert main(["transport", "graded", "--samples", "/nonexistent.json"]) == 1

    def test_determinism_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["transport", "rank-one", "--demo", "motzkin", "--out", str(a)]) == 0
        assert main(["transport", "rank-one", "--demo", "motzkin", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestGcheck:
    @pytest.mark.parametrize(
        "name,expected",
        [
            ("shift-odd-up", 0),
            ("shift-even-up", 0),
            ("prime-shift", 0),
            ("shift-sum", 2),
            ("shift-compose-ab", 2),
            ("shift-compose-ba", 2),
            ("shift-bracket", 2),
        ],
    )
    def test_builtins(self, name, expected, tmp_path):
        out = tmp_path / "report.json"
        code = main(["gcheck", "--builtin", name, "--out", str(out)])
        assert code == expected
        payload = json.loads(out.read_text())
        assert payload["verdict"] == (
            "member-within-bounds" if expected == 0 else "not-member-within-bounds"
        )

    def test_operator_file(self, tmp_path):
        from sostransport.operators import shift_odd_up

        opf = tmp_path / "op.json"
        opf.write_text(json.dumps(shift_odd_up().to_dict()))
        assert main(["gcheck", str(opf)]) == 0

    def test_unknown_builtin(self):
        assert main(["gcheck", "--builtin", "nope"]) == 1

    def test_no_operator(self):
        assert main(["gcheck"]) == 1


class TestMoments:
    def test_gaussian_full_value(self, tmp_path, capsys):
        pf = write_poly(tmp_path / "one.json", Polynomial.constant(1, 1.0))
        code = main(["moments", pf, "--format", "text"])
        assert code == 0
        out = capsys.readouterr().out
        assert "1.7724538509055159" in out

    def test_gaussian_orthant_on_x(self, tmp_path, capsys):
        pf = write_poly(tmp_path / "x.json", Polynomial.variable(1, 0))
        code = main(["moments", pf, "--functional", "gaussian-orthant", "--format", "text"])
        assert code == 0
        assert "0.5" in capsys.readouterr().out

    def test_descriptor_file(self, tmp_path, capsys):
        pf = write_poly(tmp_path / "m.json", motzkin())
        ff = tmp_path / "func.json"
        ff.write_text(json.dumps({"kind": "point_eval", "n": 2, "params": {"point": [1.0, 1.0]}}))
        code = main(["moments", pf, "--functional", str(ff), "--format", "text"])
        assert code == 0
        assert "0.0" in capsys.readouterr().out


class TestExportVerify:
    def test_export_sdpa(self, square_file, tmp_path):
        out = tmp_path / "sq.dat-s"
        assert main(["export-sdpa", square_file, "-d", "1", "--out", str(out)]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("*")]
        assert lines[0].split()[0] == "3"

    def test_verify_certificate_round_trip(self, square_file, tmp_path):
        cert = tmp_path / "cert.json"
        assert main(["certify", square_file, "-d", "1", "--out", str(cert)]) == 0
        assert main(["verify", str(cert)]) == 0

    def test_verify_tampered_certificate(self, square_file, tmp_path):
        cert = tmp_path / "cert.json"
        main(["certify", square_file, "-d", "1", "--out", str(cert)])
        payload = json.loads(cert.read_text())
        payload["certificate"]["G"][0] += 0.5
        cert.write_text(json.dumps(payload))
        assert main(["verify", str(cert)]) == 1

    def test_verify_refutation(self, neg_file, tmp_path):
        out = tmp_path / "ref.json"
        main(["certify", neg_file, "-d", "1", "--out", str(out)])
        assert main(["verify", str(out)]) == 0

    def test_verify_unknown_layout(self, tmp_path):
        f = tmp_path / "junk.json"
        f.write_text(json.dumps({"hello": 1}))
        assert main(["verify", str(f)]) == 1
