"""Build positivity-to-SOS transport operators and search their free constants.

Three constructions are provided:

* rank-one: A = l x f on a fixed degree block, with a doubling search for
  a transport time tau such that every generator of e^(tau*A)S certifies
  as a sum of squares;
* graded full-space: A = sum_d c_d * l_d * f_d where l_d reads only the
  degree-2d homogeneous slice against the Gaussian weight on R^n, with
  constants found level by level;
* orthant: the interleaved even/odd variant over [0, oo)^n with extra
  functionals reading the odd slices.

A theorem-level containment (all of Pos maps into SOS) cannot be checked
numerically; plans certify finite, recorded sample sets and carry full
certificates, seeds and the search log so that they re-validate from
scratch.  Since the exponential is linear and the SOS cone is convex,
certifying generators certifies their conic hull.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .certifier import (
    DEFAULT_COEFF_TOL,
    DEFAULT_EIG_TOL,
    Certified,
    CertifyOutcome,
    GramCertificate,
    certify_sos,
    interior_point,
    validate_certificate,
)
from .moments import (
    Explicit,
    GradedGaussian,
    LinearFunctional,
    functional_apply,
)
from .operators import (
    OperatorExpr,
    RankOne,
    Scale,
    Sum,
    expm,
    rank_one_exp,
    restrict_matrix,
)
from .polynomials import (
    MINUS_INFINITY,
    Polynomial,
    monomial_basis,
    motzkin,
    sup_norm,
)

SEARCH_CAP = float(2**30)
SEARCH_MAX_ITER = 20000


class NonPositiveDirection(Exception):
    """l(f) <= 0: f does not span an attracting ray for this functional."""


class HypothesisViolated(Exception):
    """A generator/sample fails the strict positivity hypothesis."""

    def __init__(self, poly: Polynomial, value: float, what: str = "functional"):
        self.poly = poly
        self.value = value
        super().__init__(f"{what} value {value:g} is not strictly positive on {poly!r}")


class SearchExhausted(Exception):
    """No passing constant found below the cap."""

    def __init__(self, cap: float, stage: str, failures: list):
        self.cap = cap
        self.stage = stage
        self.failures = failures  # per-generator outcome summaries at the last grid value
        super().__init__(f"search for {stage} exhausted at cap {cap:g}")


class AnnihilationViolated(Exception):
    """A ladder functional sees a monomial above its degree level."""

    def __init__(self, level: int, alpha: tuple):
        self.level = level
        self.alpha = alpha
        super().__init__(f"functional at ladder position {level} is nonzero on x^{alpha}")


class SampleNotNonneg(Exception):
    """The sampling oracle found a strictly negative value on a sample."""

    def __init__(self, poly: Polynomial, point: tuple, value: float):
        self.poly = poly
        self.point = point
        self.value = value
        super().__init__(f"sample evaluates to {value:g} < 0 at {point}")


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """A certified transport: operator, time, constants, and the evidence."""

    kind: str                      # "rank_one" | "graded_full" | "graded_custom" | "orthant"
    n: int
    block_degree: int              # largest graded block used for matrices
    operator: OperatorExpr
    tau: float                     # time at which e^(tau*A) is the certified map
    tau_scaled: float | None       # rank-one only: tau * l(f), the search grid value
    constants: list[dict]          # graded kinds: [{"level", "parity", "value"}, ...]
    generators: list[Polynomial]
    half_degrees: list[int]        # certification half-degree per generator
    certificates: list[GramCertificate]
    search_log: list[dict]
    meta: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "block_degree": self.block_degree,
            "operator": self.operator.to_dict(),
            "tau": self.tau,
            "tau_scaled": self.tau_scaled,
            "constants": self.constants,
            "generators": [g.to_dict() for g in self.generators],
            "half_degrees": self.half_degrees,
            "certificates": [c.to_dict() for c in self.certificates],
            "search_log": self.search_log,
            "meta": self.meta,
        }

    @staticmethod
    def from_dict(obj: dict) -> "TransportPlan":
        from .operators import operator_from_dict

        return TransportPlan(
            kind=obj["kind"],
            n=int(obj["n"]),
            block_degree=int(obj["block_degree"]),
            operator=operator_from_dict(obj["operator"]),
            tau=float(obj["tau"]),
            tau_scaled=None if obj.get("tau_scaled") is None else float(obj["tau_scaled"]),
            constants=list(obj.get("constants", [])),
            generators=[Polynomial.from_dict(g) for g in obj["generators"]],
            half_degrees=[int(h) for h in obj["half_degrees"]],
            certificates=[GramCertificate.from_dict(c) for c in obj["certificates"]],
            search_log=list(obj.get("search_log", [])),
            meta=dict(obj.get("meta", {})),
        )


# -- oracles and helpers -------------------------------------------------------


def _oracle_points(n: int, count: int, orthant: bool, seed: int = 77001) -> np.ndarray:
    per_axis = max(2, int(round((count // 2) ** (1.0 / n))))
    lo = 0.0 if orthant else -5.0
    axis = np.linspace(lo, 5.0, per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    grid = np.stack([m.reshape(-1) for m in mesh], axis=1)
    rng = np.random.default_rng(seed)
    extra = max(0, count - len(grid))
    rand = rng.normal(scale=2.5, size=(extra, n))
    if orthant:
        rand = np.abs(rand)
    return np.vstack([grid, rand]) if extra else grid


def check_sample_nonneg(p: Polynomial, orthant: bool = False, count: int = 400) -> None:
    """Sampling oracle; raises SampleNotNonneg on a clearly negative value."""
    scale = max(1.0, sup_norm(p))
    for pt in _oracle_points(p.n, count, orthant):
        v = p.evaluate(pt)
        if v < -1e-9 * scale:
            raise SampleNotNonneg(p, tuple(float(x) for x in pt), float(v))


def _half_degree(p: Polynomial) -> int:
    d = p.degree
    if d == MINUS_INFINITY:
        return 0
    return (int(d) + 1) // 2


def _pmap(fn: Callable, items: Sequence) -> list:
    """Order-preserving map; SOS_TRANSPORT_THREADS > 1 enables a thread pool.

    Generators of one search candidate certify independently, so results
    (and therefore logs and plans) do not depend on the thread count.
    """
    try:
        workers = int(os.environ.get("SOS_TRANSPORT_THREADS", "1"))
    except ValueError:
        workers = 1
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _outcome_summary(outcome: CertifyOutcome) -> dict:
    out = {"kind": outcome.kind}
    if outcome.kind == "undecided":
        out.update(
            {
                "iterations": outcome.iterations,
                "min_eig": outcome.min_eig,
                "coeff_residual": outcome.coeff_residual,
            }
        )
    elif outcome.kind == "refuted":
        out.update({"witness": list(outcome.witness), "value": outcome.value})
    else:
        out.update({"iterations": outcome.iterations})
    return out


# -- rank-one transport --------------------------------------------------------


def build_rank_one(l: LinearFunctional, f: Polynomial) -> RankOne:
    """The operator p -> l(p) * f; requires the fixed-ray hypothesis l(f) > 0."""
    if f.is_zero():
        raise ValueError("direction polynomial is zero")
    lam = functional_apply(l, f)
    if not lam > 0.0:
        raise NonPositiveDirection(f"l(f) = {lam:g} is not strictly positive")
    return RankOne(l, f)


def _grid(t0: float, growth: float, cap: float):
    if t0 < 0:
        raise ValueError("grid start must be >= 0")
    if growth <= 1:
        raise ValueError("growth must be > 1")
    yield t0
    v = t0 * growth if t0 > 0 else 1.0
    while v <= cap:
        yield v
        v *= growth


def find_tau(
    A: RankOne,
    generators: Sequence[Polynomial],
    half_degree: int,
    t0: float = 0.0,
    growth: float = 2.0,
    t_max: float = SEARCH_CAP,
    refine: bool = False,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    max_iter: int = SEARCH_MAX_ITER,
    refute_samples: int = 128,
) -> TransportPlan:
    """Doubling search for a transport time moving every generator into SOS.

    The grid lives in the scale-free variable u = t * l(f) (the quantity the
    closed-form exponential actually depends on), starting at t0 and then
    doubling from 1; the actual time is tau = u / l(f).  Rescaling l by a
    positive constant therefore leaves the search and the plan unchanged.
    With refine=True the first passing value is bisected against the last
    failing one to relative width 1e-3.
    """
    if not isinstance(A, RankOne):
        raise TypeError("find_tau expects a rank-one operator")
    l, f = A.functional, A.direction
    lam = functional_apply(l, f)
    if not lam > 0.0:
        raise NonPositiveDirection(f"l(f) = {lam:g} is not strictly positive")
    generators = list(generators)
    if not generators:
        raise ValueError("no generators given")
    for g in generators:
        if g.degree > 2 * half_degree:
            raise ValueError(f"generator degree {g.degree} exceeds 2*d = {2 * half_degree}")
        val = functional_apply(l, g)
        if not val > 0.0:
            raise HypothesisViolated(g, val)

    cert_opts = dict(
        eig_tol=eig_tol, coeff_tol=coeff_tol, max_iter=max_iter, refute_samples=refute_samples
    )
    log: list[dict] = []

    def attempt(u: float) -> tuple[bool, list]:
        def one(g: Polynomial) -> CertifyOutcome:
            moved = rank_one_exp(l, f, u / lam, g)
            return certify_sos(moved, half_degree, **cert_opts)

        results = _pmap(one, generators)
        outcomes = [_outcome_summary(r) for r in results]
        ok = all(r.kind == "certified" for r in results)
        certs = [r.certificate for r in results if r.kind == "certified"]
        log.append({"u": u, "passed": ok, "outcomes": outcomes})
        return ok, certs

    last_fail = None
    found = None
    for u in _grid(t0, growth, t_max):
        ok, certs = attempt(u)
        if ok:
            found = (u, certs)
            break
        last_fail = u
    if found is None:
        raise SearchExhausted(t_max, "tau", log[-1]["outcomes"] if log else [])

    u_star, certs = found
    if refine and last_fail is not None and u_star > 0:
        lo, hi = last_fail, u_star
        hi_certs = certs
        while hi - lo > 1e-3 * hi:
            mid = 0.5 * (lo + hi)
            ok, mid_certs = attempt(mid)
            if ok:
                hi, hi_certs = mid, mid_certs
            else:
                lo = mid
        u_star, certs = hi, hi_certs

    return TransportPlan(
        kind="rank_one",
        n=f.n,
        block_degree=2 * half_degree,
        operator=A,
        tau=u_star / lam,
        tau_scaled=u_star,
        constants=[],
        generators=generators,
        half_degrees=[half_degree] * len(generators),
        certificates=certs,
        search_log=log,
        meta={
            "lam": lam,
            "grid": {"t0": t0, "growth": growth, "cap": t_max, "refined": refine},
            "certifier": cert_opts,
            "note": "certificates cover the listed generators; conic combinations "
            "follow from linearity of the exponential and convexity of the target cone",
        },
    )


# -- graded constructions --------------------------------------------------------


@dataclass(frozen=True)
class _Stage:
    """One search stage: add `term_scale * functional x direction`, certify `samples`."""

    label: str
    level: int
    parity: str
    functional: LinearFunctional
    direction: Polynomial
    samples: list[Polynomial]
    half_degree: int
    block_degree: int
    fixed_value: float | None = None  # set for the degree-0 level of the full ladder


def _band(samples: Sequence[Polynomial], lo: float, hi: float) -> list[Polynomial]:
    out = []
    for s in samples:
        d = s.degree
        if d == MINUS_INFINITY:
            d = 0
        if lo < d <= hi:
            out.append(s)
    return out


def _run_ladder(
    kind: str,
    n: int,
    stages: Sequence[_Stage],
    all_samples: Sequence[Polynomial],
    c0: float,
    growth: float,
    c_max: float,
    cert_opts: dict,
    meta: dict,
) -> TransportPlan:
    """Shared level-wise doubling search over an ordered list of stages.

    Stage k adds one rank-one term; its constant starts at the previous
    stage's value (so the recorded constants are nondecreasing along the
    grid) and doubles until every sample of the stage certifies through
    the stage operator's exponential on the stage block.
    """
    terms: list[Scale] = []
    constants: list[dict] = []
    log: list[dict] = []
    cert_by_sample: dict[int, GramCertificate] = {}
    half_by_sample: dict[int, int] = {}
    sample_pos_index = {id(s): i for i, s in enumerate(all_samples)}
    prev_value = c0

    for stage in stages:
        basis = monomial_basis(n, stage.block_degree)

        def attempt(value: float) -> tuple[bool, dict[int, GramCertificate], list]:
            op = Sum(tuple(terms + [Scale(value, RankOne(stage.functional, stage.direction))]))
            mat = restrict_matrix(op, basis)  # raises NotInvariantError on block escape
            eop = expm(mat, 1.0)

            def one(s: Polynomial) -> CertifyOutcome:
                moved = basis.polynomial(eop.entries @ basis.vector(s))
                return certify_sos(moved, stage.half_degree, **cert_opts)

            results = _pmap(one, stage.samples)
            outcomes = [_outcome_summary(r) for r in results]
            ok = all(r.kind == "certified" for r in results)
            got = {
                sample_pos_index[id(s)]: r.certificate
                for s, r in zip(stage.samples, results)
                if r.kind == "certified"
            }
            return ok, got, outcomes

        if stage.fixed_value is not None:
            value = stage.fixed_value
            ok, got, outcomes = attempt(value)
            log.append({"stage": stage.label, "value": value, "passed": ok, "outcomes": outcomes})
            if not ok:
                raise SearchExhausted(value, stage.label, outcomes)
        else:
            start = max(c0, prev_value)
            value = None
            for cand in _grid(start, growth, c_max):
                if cand <= 0:
                    continue
                ok, got, outcomes = attempt(cand)
                log.append(
                    {"stage": stage.label, "value": cand, "passed": ok, "outcomes": outcomes}
                )
                if ok:
                    value = cand
                    break
            if value is None:
                raise SearchExhausted(c_max, stage.label, log[-1]["outcomes"] if log else [])

        terms.append(Scale(value, RankOne(stage.functional, stage.direction)))
        constants.append({"level": stage.level, "parity": stage.parity, "value": value})
        prev_value = value
        cert_by_sample.update(got)
        for s in stage.samples:
            half_by_sample[sample_pos_index[id(s)]] = stage.half_degree

    operator = Sum(tuple(terms))
    gens: list[Polynomial] = []
    halves: list[int] = []
    certs: list[GramCertificate] = []
    for i, s in enumerate(all_samples):
        if i in cert_by_sample:
            gens.append(s)
            halves.append(half_by_sample[i])
            certs.append(cert_by_sample[i])
    return TransportPlan(
        kind=kind,
        n=n,
        block_degree=max(st.block_degree for st in stages),
        operator=operator,
        tau=1.0,
        tau_scaled=None,
        constants=constants,
        generators=gens,
        half_degrees=halves,
        certificates=certs,
        search_log=log,
        meta=meta,
    )


def build_graded_full(
    n: int,
    d_max: int,
    samples: Sequence[Polynomial],
    f_override: Sequence[Polynomial] | None = None,
    c0: float = 1.0,
    growth: float = 2.0,
    c_max: float = SEARCH_CAP,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    max_iter: int = SEARCH_MAX_ITER,
    refute_samples: int = 128,
    oracle_points: int = 400,
) -> TransportPlan:
    """Level-wise construction of A = sum_d c_d * l_d * f_d over R^n.

    The degree-0 level is exact (nonnegative constants are already squares),
    so c_0 = 1; each later level doubles its constant until every sample in
    its degree band certifies after transport, and adding later levels never
    touches a finished band because l_D annihilates degrees below 2D.
    """
    samples = list(samples)
    for s in samples:
        if s.degree > 2 * d_max:
            raise ValueError(f"sample degree {s.degree} exceeds 2*d_max = {2 * d_max}")
        check_sample_nonneg(s, orthant=False, count=oracle_points)

    directions = []
    for d in range(d_max + 1):
        f_d = f_override[d] if f_override is not None else interior_point(n, d)
        if f_d.degree != 2 * d:
            raise ValueError(f"direction for level {d} must have degree {2 * d}")
        directions.append(f_d)

    stages = []
    for d in range(d_max + 1):
        l_d = GradedGaussian(n, d, "even", "full")
        lam = functional_apply(l_d, directions[d])
        if not lam > 0.0:
            raise NonPositiveDirection(
                f"l_{d}(f_{d}) = {lam:g} is not strictly positive"
            )
        band = _band(samples, 2 * d - 2 if d else -1.0, 2 * d)
        for s in band:
            if s.degree == 2 * d and not s.is_zero():
                val = functional_apply(l_d, s)
                if not val > 0.0:
                    raise HypothesisViolated(s, val, what=f"l_{d}")
        stages.append(
            _Stage(
                label=f"c_{d}",
                level=d,
                parity="even",
                functional=l_d,
                direction=directions[d],
                samples=band,
                half_degree=d,
                block_degree=2 * d,
                fixed_value=1.0 if d == 0 else None,
            )
        )

    cert_opts = dict(
        eig_tol=eig_tol, coeff_tol=coeff_tol, max_iter=max_iter, refute_samples=refute_samples
    )
    meta = {
        "d_max": d_max,
        "grid": {"c0": c0, "growth": growth, "cap": c_max},
        "certifier": cert_opts,
        "note": "containment is certified on the recorded samples only",
    }
    return _run_ladder("graded_full", n, stages, samples, c0, growth, c_max, cert_opts, meta)


def build_graded_custom(
    n: int,
    functionals: Sequence[tuple[int, LinearFunctional]],
    samples: Sequence[Polynomial],
    f_list: Sequence[Polynomial] | None = None,
    c0: float = 1.0,
    growth: float = 2.0,
    c_max: float = SEARCH_CAP,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    max_iter: int = SEARCH_MAX_ITER,
    refute_samples: int = 128,
) -> TransportPlan:
    """Ladder construction for user-supplied functionals l_i at degrees d_i.

    Checks the annihilation condition (l_i vanishes on monomials above
    degree 2*d_i) on all monomials up to the ladder top, and strict
    positivity of l_i on the samples in its band; the positivity hypothesis
    on all of Pos(K) is not machine-checkable and the plan says so.
    """
    ladder = [(int(d), l) for d, l in functionals]
    if not ladder:
        raise ValueError("empty functional ladder")
    degs = [d for d, _ in ladder]
    if any(b <= a for a, b in zip(degs, degs[1:])) or degs[0] < 0:
        raise ValueError("ladder degrees must be strictly increasing and >= 0")
    top = 2 * degs[-1]

    samples = list(samples)
    for s in samples:
        if s.degree > top:
            raise ValueError(f"sample degree {s.degree} exceeds ladder top {top}")

    check_basis = monomial_basis(n, top)
    for i, (d_i, l_i) in enumerate(ladder):
        for alpha in check_basis.order:
            if sum(alpha) > 2 * d_i:
                if l_i(Polynomial.monomial(n, alpha)) != 0.0:
                    raise AnnihilationViolated(i, alpha)

    directions = []
    for i, (d_i, _) in enumerate(ladder):
        f_i = f_list[i] if f_list is not None else interior_point(n, d_i)
        if f_i.degree != 2 * d_i:
            raise ValueError(f"direction for ladder position {i} must have degree {2 * d_i}")
        directions.append(f_i)

    stages = []
    prev_deg = -1.0
    for i, (d_i, l_i) in enumerate(ladder):
        lam = functional_apply(l_i, directions[i])
        if not lam > 0.0:
            raise NonPositiveDirection(f"l_{i}(f_{i}) = {lam:g} is not strictly positive")
        band = _band(samples, prev_deg, 2 * d_i)
        for s in band:
            if s.is_zero():
                continue
            val = functional_apply(l_i, s)
            if not val > 0.0:
                raise HypothesisViolated(s, val, what=f"ladder functional {i}")
        stages.append(
            _Stage(
                label=f"c_{i}",
                level=d_i,
                parity="even",
                functional=l_i,
                direction=directions[i],
                samples=band,
                half_degree=d_i,
                block_degree=2 * d_i,
            )
        )
        prev_deg = float(2 * d_i)

    cert_opts = dict(
        eig_tol=eig_tol, coeff_tol=coeff_tol, max_iter=max_iter, refute_samples=refute_samples
    )
    meta = {
        "ladder": degs,
        "grid": {"c0": c0, "growth": growth, "cap": c_max},
        "certifier": cert_opts,
        "note": "strict positivity of the ladder functionals is checked on the "
        "samples only; the hypothesis on all of Pos(K) is not machine-checkable",
    }
    return _run_ladder("graded_custom", n, stages, samples, c0, growth, c_max, cert_opts, meta)


def build_orthant(
    n: int,
    d_max: int,
    samples: Sequence[Polynomial],
    c0: float = 1.0,
    growth: float = 2.0,
    c_max: float = SEARCH_CAP,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    max_iter: int = SEARCH_MAX_ITER,
    refute_samples: int = 128,
    oracle_points: int = 400,
) -> TransportPlan:
    """Interleaved construction over the orthant [0, oo)^n.

    Level d first fixes the odd constant (reading degree 2d-1) against the
    degree-(2d-1) samples, then the even constant (reading degree 2d)
    against both bands of the level, since the even term perturbs the odd
    transports through the shared direction f_d.
    """
    samples = list(samples)
    for s in samples:
        if s.degree > 2 * d_max:
            raise ValueError(f"sample degree {s.degree} exceeds 2*d_max = {2 * d_max}")
        check_sample_nonneg(s, orthant=True, count=oracle_points)

    stages = []
    for d in range(d_max + 1):
        f_d = interior_point(n, d)
        l_even = GradedGaussian(n, d, "even", "orthant")
        odd_band = _band(samples, 2 * d - 2, 2 * d - 1) if d >= 1 else []
        even_band = _band(samples, 2 * d - 1, 2 * d) if d >= 1 else _band(samples, -1.0, 0)
        if d >= 1:
            l_odd = GradedGaussian(n, d, "odd", "orthant")
            for s in odd_band:
                val = functional_apply(l_odd, s)
                if not val > 0.0:
                    raise HypothesisViolated(s, val, what=f"odd-slice functional at level {d}")
            stages.append(
                _Stage(
                    label=f"c~_{d}",
                    level=d,
                    parity="odd",
                    functional=l_odd,
                    direction=f_d,
                    samples=odd_band,
                    half_degree=d,
                    block_degree=2 * d,
                )
            )
        for s in even_band:
            if s.degree == 2 * d and d >= 1:
                val = functional_apply(l_even, s)
                if not val > 0.0:
                    raise HypothesisViolated(s, val, what=f"even-slice functional at level {d}")
        stages.append(
            _Stage(
                label=f"c_{d}",
                level=d,
                parity="even",
                functional=l_even,
                direction=f_d,
                # the even constant must keep the odd band certified too
                samples=odd_band + even_band,
                half_degree=d,
                block_degree=2 * d,
                fixed_value=1.0 if d == 0 else None,
            )
        )

    cert_opts = dict(
        eig_tol=eig_tol, coeff_tol=coeff_tol, max_iter=max_iter, refute_samples=refute_samples
    )
    meta = {
        "d_max": d_max,
        "domain": "orthant",
        "grid": {"c0": c0, "growth": growth, "cap": c_max},
        "certifier": cert_opts,
        "note": "containment is certified on the recorded samples only",
    }
    return _run_ladder("orthant", n, stages, samples, c0, growth, c_max, cert_opts, meta)


# -- transported optimization ---------------------------------------------------


def transport_problem(
    L: LinearFunctional, plan: TransportPlan, probes: Sequence[Polynomial]
) -> tuple[Explicit, list[Polynomial]]:
    """Materialize L~ = L o e^(-tau A) and transport the probes by e^(tau A).

    Optimizing L over a probe set and L~ over the transported set are the
    same problem: L~(e^(tau A) p) = L(p) by construction.
    """
    basis = monomial_basis(plan.n, plan.block_degree)
    for p in probes:
        if p.degree > plan.block_degree:
            raise ValueError(
                f"probe degree {p.degree} exceeds the plan block {plan.block_degree}"
            )
    mat = restrict_matrix(plan.operator, basis)
    backward = expm(mat, -plan.tau)
    forward = expm(mat, plan.tau)
    lvec = np.array([L(Polynomial.monomial(plan.n, a)) for a in basis.order])
    table_vals = lvec @ backward.entries
    table = {a: float(v) for a, v in zip(basis.order, table_vals)}
    L_tilde = Explicit(plan.n, table, plan.block_degree)
    moved = [basis.polynomial(forward.entries @ basis.vector(p)) for p in probes]
    return L_tilde, moved


def validate_plan(
    plan: TransportPlan,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
) -> bool:
    """Re-derive every transported generator and re-validate its certificate."""
    basis = monomial_basis(plan.n, plan.block_degree)
    try:
        mat = restrict_matrix(plan.operator, basis)
    except Exception:
        return False
    eop = expm(mat, plan.tau)
    if len(plan.generators) != len(plan.certificates):
        return False
    for g, d, cert in zip(plan.generators, plan.half_degrees, plan.certificates):
        moved = basis.polynomial(eop.entries @ basis.vector(g))
        if cert.basis.degree_bound != d:
            return False
        if not validate_certificate(moved, cert, coeff_tol=coeff_tol, eig_tol=eig_tol):
            return False
    if plan.kind in ("graded_full", "graded_custom", "orthant"):
        for d in range(plan.block_degree // 2 + 1):
            try:
                restrict_matrix(plan.operator, monomial_basis(plan.n, 2 * d))
            except Exception:
                return False
    return True


# -- sample corpus ----------------------------------------------------------------


def sample_pos(
    domain: str, n: int, degree: int, count: int, seed: int
) -> list[Polynomial]:
    """Deterministic nonnegative sample polynomials for transport tests.

    Mixes named non-SOS specials (the Motzkin polynomial when it fits),
    orthant monomial-times-square products for domain="orthant", and
    constructed sums of squares.
    """
    if domain not in ("full", "orthant"):
        raise ValueError(f"domain must be 'full' or 'orthant', got {domain!r}")
    rng = np.random.default_rng(seed)
    out: list[Polynomial] = []

    if domain == "full" and n == 2 and degree >= 6:
        out.append(motzkin())
    if domain == "orthant" and degree >= 1:
        for i in range(n):
            out.append(Polynomial.variable(n, i))

    def random_square_sum(max_total: int, shift: tuple[int, ...] | None) -> Polynomial:
        room = max_total - (sum(shift) if shift else 0)
        half = max(0, room // 2)
        basis = monomial_basis(n, half)
        k = int(rng.integers(1, 4))
        acc = Polynomial.zero(n)
        for _ in range(k):
            coeffs = rng.normal(size=len(basis))
            q = basis.polynomial(np.round(coeffs, 6))
            acc = acc + q * q
        if shift and any(shift):
            acc = Polynomial.monomial(n, shift) * acc
        return acc

    while len(out) < count:
        if domain == "orthant":
            b = int(rng.integers(0, 2)) if degree >= 1 else 0
            shift = tuple(b if i == int(rng.integers(0, n)) else 0 for i in range(n))
            out.append(random_square_sum(degree, shift))
        else:
            out.append(random_square_sum(degree, None))
    return out[:count]
