"""Command-line front end.

Exit codes are fixed so shell pipelines can branch on outcomes:

    0  success / certified / member-within-bounds
    1  malformed input
    2  refuted by a point / not-member-within-bounds
    3  undecided
    4  search exhausted
    5  hypothesis violation (positivity, direction, annihilation, sample sign)

Every artifact written includes an echo of the run configuration; outputs
carry no timestamps, so identical config and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from . import certifier, glab, moments, operators, transport
from .polynomials import Polynomial, monomial_basis, motzkin

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_REFUTED = 2
EXIT_UNDECIDED = 3
EXIT_EXHAUSTED = 4
EXIT_HYPOTHESIS = 5


@dataclass
class RunConfig:
    tol_eig: float = certifier.DEFAULT_EIG_TOL
    tol_coeff: float = certifier.DEFAULT_COEFF_TOL
    max_iter: int = certifier.DEFAULT_MAX_ITER
    t_max: float = transport.SEARCH_CAP
    c_max: float = transport.SEARCH_CAP
    growth: float = 2.0
    dmax: int = 64
    kmax: int = glab.DEFAULT_K_MAX
    seed: int = 0
    format: str = "json"

    def __post_init__(self):
        if self.tol_eig <= 0 or self.tol_coeff <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_iter < 1 or self.kmax < 1:
            raise ValueError("iteration caps must be >= 1")

    def echo(self) -> dict:
        return asdict(self)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol-eig", type=float, default=certifier.DEFAULT_EIG_TOL)
    parser.add_argument("--tol-coeff", type=float, default=certifier.DEFAULT_COEFF_TOL)
    parser.add_argument("--max-iter", type=int, default=certifier.DEFAULT_MAX_ITER)
    parser.add_argument("--t-max", type=float, default=transport.SEARCH_CAP)
    parser.add_argument("--c-max", type=float, default=transport.SEARCH_CAP)
    parser.add_argument("--growth", type=float, default=2.0)
    parser.add_argument("--dmax", type=int, default=64)
    parser.add_argument("--kmax", type=int, default=glab.DEFAULT_K_MAX)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--out", default=None, help="write the JSON artifact here")


def _config(args) -> RunConfig:
    return RunConfig(
        tol_eig=args.tol_eig,
        tol_coeff=args.tol_coeff,
        max_iter=args.max_iter,
        t_max=args.t_max,
        c_max=args.c_max,
        growth=args.growth,
        dmax=args.dmax,
        kmax=args.kmax,
        seed=args.seed,
        format=args.format,
    )


def _emit(payload: dict, args, text_lines: list[str]) -> None:
    blob = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
        if args.format == "text":
            print("\n".join(text_lines))
    elif args.format == "text":
        print("\n".join(text_lines))
    else:
        sys.stdout.write(blob)


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _load_poly(path: str) -> Polynomial:
    return Polynomial.from_dict(_load_json(path))


def _load_polys(path: str) -> list[Polynomial]:
    obj = _load_json(path)
    if isinstance(obj, dict) and "polys" in obj:
        return [Polynomial.from_dict(p) for p in obj["polys"]]
    if isinstance(obj, dict) and "terms" in obj:
        return [Polynomial.from_dict(obj)]
    if isinstance(obj, list):
        return [Polynomial.from_dict(p) for p in obj]
    raise ValueError("expected a polynomial, a list, or an object with 'polys'")


GCHECK_BUILTINS = {
    "shift-odd-up": lambda cfg: operators.shift_odd_up(),
    "shift-even-up": lambda cfg: operators.shift_even_up(),
    "shift-sum": lambda cfg: operators.Sum(
        (operators.shift_odd_up(), operators.shift_even_up())
    ),
    "shift-compose-ab": lambda cfg: operators.Compose(
        operators.shift_odd_up(), operators.shift_even_up()
    ),
    "shift-compose-ba": lambda cfg: operators.Compose(
        operators.shift_even_up(), operators.shift_odd_up()
    ),
    "shift-bracket": lambda cfg: operators.Bracket(
        operators.shift_odd_up(), operators.shift_even_up()
    ),
    "prime-shift": lambda cfg: operators.prime_shift_operator(cfg.dmax),
}


def cmd_certify(args) -> int:
    try:
        cfg = _config(args)
        p = _load_poly(args.poly)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    d = args.half_degree if args.half_degree is not None else (int(max(p.degree, 0)) + 1) // 2
    try:
        outcome = certifier.certify_sos(
            p, d, eig_tol=cfg.tol_eig, coeff_tol=cfg.tol_coeff, max_iter=cfg.max_iter
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    payload = {"poly": p.to_dict(), "half_degree": d, "outcome": outcome.kind, "config": cfg.echo()}
    lines = [f"outcome: {outcome.kind}"]
    code = EXIT_OK
    if outcome.kind == "certified":
        payload["certificate"] = outcome.certificate.to_dict()
        payload["iterations"] = outcome.iterations
        lines.append(f"min_eig: {outcome.certificate.min_eig:g}")
        lines.append(f"coeff_residual: {outcome.certificate.coeff_residual:g}")
    elif outcome.kind == "refuted":
        payload["witness"] = list(outcome.witness)
        payload["value"] = outcome.value
        lines.append(f"witness: {list(outcome.witness)} value {outcome.value:g}")
        code = EXIT_REFUTED
    else:
        payload["iterations"] = outcome.iterations
        payload["min_eig"] = outcome.min_eig
        payload["coeff_residual"] = outcome.coeff_residual
        lines.append(f"iterations: {outcome.iterations} min_eig {outcome.min_eig:g}")
        code = EXIT_UNDECIDED
    _emit(payload, args, lines)
    return code


def _plan_payload(plan: transport.TransportPlan, cfg: RunConfig) -> dict:
    payload = plan.to_dict()
    payload["config"] = cfg.echo()
    return payload


def cmd_transport(args) -> int:
    try:
        cfg = _config(args)
        search_opts = dict(
            growth=cfg.growth,
            eig_tol=cfg.tol_eig,
            coeff_tol=cfg.tol_coeff,
            max_iter=min(cfg.max_iter, transport.SEARCH_MAX_ITER),
        )
        if args.mode == "rank-one":
            if args.demo == "motzkin":
                n, d = 2, 3
                l = moments.GaussianFull(n)
                f = certifier.interior_point(n, d)
                gens = [motzkin()]
            elif args.demo:
                raise ValueError(f"unknown rank-one demo {args.demo!r}")
            else:
                gens = _load_polys(args.generators)
                n = gens[0].n
                d = args.half_degree if args.half_degree is not None else max(
                    (int(max(g.degree, 0)) + 1) // 2 for g in gens
                )
                l = (
                    moments.functional_from_dict(_load_json(args.functional))
                    if args.functional
                    else moments.GaussianFull(n)
                )
                f = _load_poly(args.direction) if args.direction else certifier.interior_point(n, d)
            A = transport.build_rank_one(l, f)
            plan = transport.find_tau(A, gens, d, t_max=cfg.t_max, **search_opts)
        elif args.mode == "graded":
            samples = _load_polys(args.samples)
            n = samples[0].n
            d_max = args.level_max if args.level_max is not None else max(
                (int(max(s.degree, 0)) + 1) // 2 for s in samples
            )
            plan = transport.build_graded_full(n, d_max, samples, c_max=cfg.c_max, **search_opts)
        else:  # orthant
            if args.demo == "orthant-x":
                samples = [Polynomial.variable(1, 0)]
                n, d_max = 1, 1
            elif args.demo:
                raise ValueError(f"unknown orthant demo {args.demo!r}")
            else:
                samples = _load_polys(args.samples)
                n = samples[0].n
                d_max = args.level_max if args.level_max is not None else max(
                    (int(max(s.degree, 0)) + 1) // 2 for s in samples
                )
            plan = transport.build_orthant(n, d_max, samples, c_max=cfg.c_max, **search_opts)
    except (FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except transport.SearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (
        transport.HypothesisViolated,
        transport.NonPositiveDirection,
        transport.AnnihilationViolated,
        transport.SampleNotNonneg,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS

    lines = [
        f"plan: {plan.kind} tau={plan.tau:g}",
        f"generators certified: {len(plan.certificates)}",
    ]
    if plan.constants:
        lines.append(
            "constants: "
            + ", ".join(f"{c['parity']}@{c['level']}={c['value']:g}" for c in plan.constants)
        )
    _emit(_plan_payload(plan, cfg), args, lines)
    return EXIT_OK


def cmd_gcheck(args) -> int:
    try:
        cfg = _config(args)
        if args.builtin:
            if args.builtin not in GCHECK_BUILTINS:
                raise ValueError(
                    f"unknown builtin {args.builtin!r}; choices: {sorted(GCHECK_BUILTINS)}"
                )
            A = GCHECK_BUILTINS[args.builtin](cfg)
        elif args.operator:
            A = operators.operator_from_dict(_load_json(args.operator))
        else:
            raise ValueError("need an operator file or --builtin")
        verdict = glab.g_check(A, D_query=args.dquery, D_max=args.dmax, k_max=cfg.kmax)
    except (FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    payload = verdict.to_dict()
    payload["config"] = cfg.echo()
    lines = [f"verdict: {payload['verdict']}"]
    if verdict.witness is not None:
        lines.append(f"witness: x^{list(verdict.witness)}")
    _emit(payload, args, lines)
    return EXIT_OK if verdict.member else EXIT_REFUTED


def cmd_moments(args) -> int:
    try:
        cfg = _config(args)
        if args.functional in ("gaussian-full", "gaussian-orthant"):
            p = _load_poly(args.poly)
            kind = "gaussian_full" if args.functional == "gaussian-full" else "gaussian_orthant"
            F = moments.functional_from_dict({"kind": kind, "n": p.n, "params": {}})
        else:
            F = moments.functional_from_dict(_load_json(args.functional))
            p = _load_poly(args.poly)
        value = moments.functional_apply(F, p)
    except (FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    payload = {"value": value, "functional": F.to_dict(), "poly": p.to_dict(), "config": cfg.echo()}
    _emit(payload, args, [f"value: {value!r}"])
    return EXIT_OK


def cmd_export_sdpa(args) -> int:
    try:
        p = _load_poly(args.poly)
        d = args.half_degree if args.half_degree is not None else (int(max(p.degree, 0)) + 1) // 2
        prob = certifier.build_gram_problem(p, d)
        certifier.export_sdpa(prob, args.out)
    except (FileNotFoundError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"wrote {args.out}: block size {prob.size}, {len(prob.gammas)} constraints")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        obj = _load_json(args.artifact)
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        if "kind" in obj and obj.get("kind") in ("rank_one", "graded_full", "graded_custom", "orthant"):
            plan = transport.TransportPlan.from_dict(obj)
            ok = transport.validate_plan(plan)
            what = f"plan ({plan.kind})"
        elif obj.get("outcome") == "certified":
            p = Polynomial.from_dict(obj["poly"])
            cert = certifier.GramCertificate.from_dict(obj["certificate"])
            ok = certifier.validate_certificate(p, cert)
            what = "certificate"
        elif obj.get("outcome") == "refuted":
            p = Polynomial.from_dict(obj["poly"])
            ok = p.evaluate(obj["witness"]) < 0
            what = "refutation witness"
        elif obj.get("outcome") == "undecided":
            ok = True
            what = "undecided outcome (nothing claimed)"
        else:
            raise ValueError("unrecognized artifact layout")
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"{what}: {'valid' if ok else 'INVALID'}")
    return EXIT_OK if ok else EXIT_BAD_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sostransport",
        description="certify sums of squares and transport nonnegative polynomials into them",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cert = sub.add_parser("certify", help="decide SOS membership of a polynomial")
    p_cert.add_argument("poly", help="polynomial JSON file")
    p_cert.add_argument("-d", "--half-degree", type=int, default=None)
    _add_common(p_cert)
    p_cert.set_defaults(func=cmd_certify)

    p_tr = sub.add_parser("transport", help="build a transport plan")
    p_tr.add_argument("mode", choices=("rank-one", "graded", "orthant"))
    p_tr.add_argument("--generators", help="generator polynomials (rank-one)")
    p_tr.add_argument("--samples", help="sample polynomials (graded/orthant)")
    p_tr.add_argument("--functional", help="functional descriptor JSON (rank-one)")
    p_tr.add_argument("--direction", help="direction polynomial JSON (rank-one)")
    p_tr.add_argument("-d", "--half-degree", type=int, default=None)
    p_tr.add_argument("--level-max", type=int, default=None, help="top level d_max")
    p_tr.add_argument("--demo", default=None, help="builtin scenario: motzkin, orthant-x")
    _add_common(p_tr)
    p_tr.set_defaults(func=cmd_transport)

    p_g = sub.add_parser("gcheck", help="bounded exponentiability check")
    p_g.add_argument("operator", nargs="?", help="operator descriptor JSON")
    p_g.add_argument("--builtin", default=None, help=", ".join(sorted(GCHECK_BUILTINS)))
    p_g.add_argument("--dquery", type=int, default=6)
    _add_common(p_g)
    p_g.set_defaults(func=cmd_gcheck)

    p_m = sub.add_parser("moments", help="apply a moment functional to a polynomial")
    p_m.add_argument("poly", help="polynomial JSON file")
    p_m.add_argument(
        "--functional",
        default="gaussian-full",
        help="descriptor JSON file, or gaussian-full / gaussian-orthant",
    )
    _add_common(p_m)
    p_m.set_defaults(func=cmd_moments)

    p_x = sub.add_parser("export-sdpa", help="write the Gram feasibility SDP (.dat-s)")
    p_x.add_argument("poly", help="polynomial JSON file")
    p_x.add_argument("-d", "--half-degree", type=int, default=None)
    p_x.add_argument("--out", required=True)
    p_x.set_defaults(func=cmd_export_sdpa)

    p_v = sub.add_parser("verify", help="re-validate an emitted plan or certificate")
    p_v.add_argument("artifact", help="JSON artifact written by certify/transport")
    p_v.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
