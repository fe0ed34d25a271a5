"""Bounded decision procedures for exponentiability of polynomial operators.

An operator A admits exp(tA) as a map on polynomials iff every monomial
generates a finite-dimensional A-invariant subspace; the witness iteration
V <- V + A*V either stabilizes at finite dimension or blows up.  Since the
defining property quantifies over all powers and all monomials, verdicts
here are always "within bounds": a degree cap and an iteration cap are part
of every report, and membership claims never extend beyond them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .moments import PointEval
from .operators import (
    BlowUpError,
    OperatorExpr,
    PolySpan,
    RankOne,
    Scale,
    Sum,
    exp_apply,
    stabilize_krylov,
)
from .polynomials import MINUS_INFINITY, MultiIndex, Polynomial, monomial_basis
from .polynomials import sup_norm as _sup_norm

DEFAULT_K_MAX = 64
INVARIANCE_TOL = 1e-10


def default_degree_cap(alpha: MultiIndex) -> int:
    return 4 * sum(alpha) + 16


def _trace_json(trace: list) -> list:
    return [None if d == MINUS_INFINITY else int(d) for d in trace]


@dataclass(frozen=True, eq=False)
class SubspaceReport:
    """Outcome of stabilizing the subspace generated by one monomial."""

    alpha: MultiIndex
    stabilized: bool
    basis: list[Polynomial] | None    # linearly independent, A-invariant span
    steps: int
    degree_trace: list
    bound_hit: int | None             # degree cap or step cap, per cause
    cause: str | None                 # "degree" or "steps" for blow-ups
    invariance_residual: float | None

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "stabilized": self.stabilized,
            "basis": None if self.basis is None else [q.to_dict() for q in self.basis],
            "steps": self.steps,
            "degree_trace": _trace_json(self.degree_trace),
            "bound_hit": self.bound_hit,
            "cause": self.cause,
            "invariance_residual": self.invariance_residual,
        }


@dataclass(frozen=True, eq=False)
class GVerdict:
    """Aggregated membership verdict for all monomials up to a query degree."""

    member: bool
    witness: MultiIndex | None
    reports: list[SubspaceReport]
    d_query: int
    k_max: int

    def to_dict(self) -> dict:
        return {
            "verdict": "member-within-bounds" if self.member else "not-member-within-bounds",
            "witness": None if self.witness is None else list(self.witness),
            "d_query": self.d_query,
            "k_max": self.k_max,
            "reports": [r.to_dict() for r in self.reports],
        }


def invariant_subspace(
    A: OperatorExpr,
    alpha: MultiIndex,
    D_max: int | None = None,
    k_max: int = DEFAULT_K_MAX,
) -> SubspaceReport:
    """Iterate V <- V + A*V from x^alpha until the rank stops growing.

    The Krylov span of x^alpha realizes the iteration: its dimension grows
    by at most one per step and stabilization at step k means the span of
    the first k images is A-invariant.  Degree escape and a non-stabilizing
    dimension are reported as distinct blow-up causes.
    """
    alpha = tuple(int(e) for e in alpha)
    if D_max is None:
        D_max = default_degree_cap(alpha)
    n = len(alpha)
    stab = stabilize_krylov(A, Polynomial.monomial(n, alpha), D_max, k_max)
    if stab.status == "stabilized":
        return SubspaceReport(
            alpha=alpha,
            stabilized=True,
            basis=list(stab.span.members),
            steps=stab.steps,
            degree_trace=stab.degree_trace,
            bound_hit=None,
            cause=None,
            invariance_residual=stab.residual,
        )
    return SubspaceReport(
        alpha=alpha,
        stabilized=False,
        basis=None,
        steps=stab.steps,
        degree_trace=stab.degree_trace,
        bound_hit=D_max if stab.status == "degree" else k_max,
        cause=stab.status,
        invariance_residual=None,
    )


def g_check(
    A: OperatorExpr,
    D_query: int = 6,
    D_max: int | None = None,
    k_max: int = DEFAULT_K_MAX,
) -> GVerdict:
    """Run invariant_subspace for every |alpha| <= D_query and aggregate.

    The verdict is explicitly bounded: stabilization of every queried
    monomial within the caps is necessary evidence, never a proof for all
    degrees.
    """
    reports = []
    witness = None
    for alpha in monomial_basis(A.n, D_query).order:
        rep = invariant_subspace(A, alpha, D_max=D_max, k_max=k_max)
        reports.append(rep)
        if not rep.stabilized and witness is None:
            witness = alpha
    return GVerdict(
        member=witness is None,
        witness=witness,
        reports=reports,
        d_query=D_query,
        k_max=k_max,
    )


def check_invariance(A: OperatorExpr, V: Sequence[Polynomial]) -> bool:
    """True iff A maps span(V) into itself (and e^(tA) spot-checks agree).

    Requires V linearly independent; raises ValueError otherwise.  On an
    invariant span the exponential is checked at t in {1, -1, 5, -5}.
    """
    V = list(V)
    if not V:
        raise ValueError("empty basis")
    span = PolySpan(V[0].n)
    for v in V:
        if not span.add(v):
            raise ValueError("dependent input basis")
    for v in V:
        image = A(v)
        c, res = span.coords(image)
        if res > INVARIANCE_TOL * max(1.0, math.hypot(float(np.linalg.norm(c)), res)):
            return False
    degs = [int(v.degree) for v in V if not v.is_zero()]
    bound = max(degs) if degs else 1
    for t in (1.0, -1.0, 5.0, -5.0):
        for v in V:
            try:
                moved = exp_apply(A, t, v, bound=bound)
            except BlowUpError:
                return False
            c, res = span.coords(moved)
            if res > 1e-8 * max(1.0, math.hypot(float(np.linalg.norm(c)), res)):
                return False
    return True


def degree_growth_profile(A: OperatorExpr, alpha: MultiIndex, k_max: int) -> list:
    """[deg(x^alpha), deg(A x^alpha), ..., deg(A^k_max x^alpha)] with the zero sentinel."""
    alpha = tuple(int(e) for e in alpha)
    current = Polynomial.monomial(len(alpha), alpha)
    out = [current.degree]
    for _ in range(k_max):
        current = A(current)
        out.append(current.degree)
    return out


def eval_rank_one(y: Sequence[float], p: Polynomial) -> RankOne:
    """The operator f -> f(y) * p.

    Its square is p(y) times itself, so the exponential is closed-form:
    e^(tA) f = f + f(y) * (e^(t p(y)) - 1)/p(y) * p, with the t*f(y)*p
    limit when p(y) = 0.
    """
    point = tuple(float(v) for v in y)
    if len(point) != p.n:
        raise ValueError(f"point has length {len(point)}, expected {p.n}")
    return RankOne(PointEval(p.n, point), p)


def spot_check_lie_span(
    generators: Sequence[OperatorExpr],
    trials: int = 20,
    seed: int = 0,
    D_query: int = 4,
    D_max: int | None = None,
    k_max: int = DEFAULT_K_MAX,
) -> bool:
    """Heuristic: do random unit combinations of the generators stay exponentiable?

    Samples unit-norm coefficient vectors and runs g_check on each combined
    operator.  Finitely many samples cannot certify the full statement
    (which quantifies over the whole coefficient sphere); a False is a
    definite counterexample within bounds, a True is only evidence.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("no generators")
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        a = rng.normal(size=len(generators))
        a /= np.linalg.norm(a)
        combo = Sum(tuple(Scale(float(c), g) for c, g in zip(a, generators)))
        if not g_check(combo, D_query=D_query, D_max=D_max, k_max=k_max).member:
            return False
    return True
