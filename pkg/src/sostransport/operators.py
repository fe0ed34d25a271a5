"""Symbolic linear operators on polynomial space and their exponentials.

An operator is an expression tree over a few primitive node types:

* ``RankOne(l, f)``       p -> l(p) * f
* ``FiniteMap``           monomial -> polynomial table, default zero or identity
* ``MonomialRule``        univariate residue-class rules x^k -> c * x^(k+s)
* ``Sum / Scale``         pointwise combinations
* ``Compose / Bracket``   products; kept lazy so ill-behaved products stay
                          applicable to single polynomials even when no
                          finite invariant subspace exists

Matrix restrictions to a graded basis, a scaling-and-squaring matrix
exponential, the closed-form rank-one exponential, and exponential
application through invariant-subspace stabilization live here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .moments import LinearFunctional, PointEval, functional_from_dict
from .polynomials import (
    MINUS_INFINITY,
    GradedBasis,
    MultiIndex,
    Polynomial,
    sup_norm,
)


class NotInvariantError(Exception):
    """A basis monomial maps outside the span of the requested basis."""

    def __init__(self, witness: MultiIndex, escaping: MultiIndex):
        self.witness = witness
        self.escaping = escaping
        super().__init__(
            f"image of x^{witness} contains x^{escaping}, outside the basis span"
        )


class BlowUpError(Exception):
    """Invariant-subspace stabilization failed within the given bounds."""

    def __init__(self, degree_trace: list, bound: int, cause: str = "degree"):
        self.degree_trace = degree_trace
        self.bound = bound
        self.cause = cause  # "degree" or "dimension"
        super().__init__(
            f"stabilization failed ({cause} bound {bound}); degree trace {degree_trace}"
        )


class OperatorExpr:
    """Base class for operator expression nodes."""

    n: int

    def apply(self, p: Polynomial) -> Polynomial:
        raise NotImplementedError

    def __call__(self, p: Polynomial) -> Polynomial:
        if p.n != self.n:
            raise ValueError(f"variable counts differ: {p.n} vs {self.n}")
        return self.apply(p)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class RankOne(OperatorExpr):
    """p -> functional(p) * direction."""

    functional: LinearFunctional
    direction: Polynomial

    @property
    def n(self) -> int:
        return self.direction.n

    def apply(self, p: Polynomial) -> Polynomial:
        return self.functional(p) * self.direction

    def to_dict(self) -> dict:
        return {
            "node": "rank_one",
            "functional": self.functional.to_dict(),
            "direction": self.direction.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class FiniteMap(OperatorExpr):
    """Linear extension of an explicit monomial -> polynomial table.

    Monomials outside the table follow ``default``: "zero" kills them,
    "identity" keeps them fixed.
    """

    n: int
    images: Mapping[MultiIndex, Polynomial] = field(default_factory=dict)
    default: str = "zero"

    def __post_init__(self):
        if self.default not in ("zero", "identity"):
            raise ValueError(f"default must be 'zero' or 'identity', got {self.default!r}")
        for alpha, img in self.images.items():
            if len(alpha) != self.n or img.n != self.n:
                raise ValueError(f"image table entry {alpha} has wrong variable count")

    def apply(self, p: Polynomial) -> Polynomial:
        out = Polynomial.zero(self.n)
        for alpha, c in p.terms.items():
            if alpha in self.images:
                out = out + c * self.images[alpha]
            elif self.default == "identity":
                out = out + Polynomial.monomial(self.n, alpha, c)
        return out

    def to_dict(self) -> dict:
        entries = [
            [list(a), self.images[a].to_dict()]
            for a in sorted(self.images, key=lambda a: (sum(a), tuple(-e for e in a)))
        ]
        return {"node": "finite_map", "n": self.n, "images": entries, "default": self.default}


@dataclass(frozen=True)
class RuleCase:
    """x^k -> coeff * x^(k+shift) whenever k >= k_min and k = residue mod modulus."""

    residue: int
    modulus: int
    k_min: int = 0
    coeff: float = 1.0
    shift: int = 0

    def matches(self, k: int) -> bool:
        return k >= self.k_min and k % self.modulus == self.residue % self.modulus


@dataclass(frozen=True, eq=False)
class MonomialRule(OperatorExpr):
    """Univariate operator given by residue-class monomial rules.

    The rules plus overrides must cover every k in N0 exactly once; this is
    checked on construction over one full period past all activation
    thresholds, which decides totality and unambiguity for all k.
    """

    rules: tuple[RuleCase, ...]
    overrides: Mapping[int, tuple[float, int]] = field(default_factory=dict)

    n: int = 1

    def __post_init__(self):
        if not self.rules and not self.overrides:
            raise ValueError("MonomialRule needs at least one rule or override")
        period = math.lcm(*(r.modulus for r in self.rules)) if self.rules else 1
        horizon = max(
            [r.k_min for r in self.rules] + [k + 1 for k in self.overrides] + [0]
        ) + 2 * period
        for k in range(horizon):
            self._case_for(k)

    def _case_for(self, k: int) -> tuple[float, int]:
        if k in self.overrides:
            return self.overrides[k]
        hits = [r for r in self.rules if r.matches(k)]
        if len(hits) != 1:
            kind = "ambiguous" if hits else "uncovered"
            raise ValueError(f"monomial rules are {kind} at exponent {k}")
        return (hits[0].coeff, hits[0].shift)

    def apply(self, p: Polynomial) -> Polynomial:
        out: dict[MultiIndex, float] = {}
        for (k,), c in p.terms.items():
            coeff, shift = self._case_for(k)
            key = (k + shift,)
            out[key] = out.get(key, 0.0) + c * coeff
        return Polynomial(1, out)

    def to_dict(self) -> dict:
        return {
            "node": "rule",
            "rules": [[r.residue, r.modulus, r.k_min, r.coeff, r.shift] for r in self.rules],
            "overrides": [[k, c, s] for k, (c, s) in sorted(self.overrides.items())],
        }


@dataclass(frozen=True)
class Sum(OperatorExpr):
    terms: tuple[OperatorExpr, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty operator sum")
        if len({t.n for t in self.terms}) != 1:
            raise ValueError("operator sum mixes variable counts")

    @property
    def n(self) -> int:
        return self.terms[0].n

    def apply(self, p: Polynomial) -> Polynomial:
        out = Polynomial.zero(self.n)
        for t in self.terms:
            out = out + t.apply(p)
        return out

    def to_dict(self) -> dict:
        return {"node": "sum", "terms": [t.to_dict() for t in self.terms]}


@dataclass(frozen=True)
class Scale(OperatorExpr):
    factor: float
    term: OperatorExpr

    @property
    def n(self) -> int:
        return self.term.n

    def apply(self, p: Polynomial) -> Polynomial:
        return self.factor * self.term.apply(p)

    def to_dict(self) -> dict:
        return {"node": "scale", "factor": self.factor, "term": self.term.to_dict()}


@dataclass(frozen=True)
class Compose(OperatorExpr):
    """outer o inner: applies inner first."""

    outer: OperatorExpr
    inner: OperatorExpr

    def __post_init__(self):
        if self.outer.n != self.inner.n:
            raise ValueError("composition mixes variable counts")

    @property
    def n(self) -> int:
        return self.outer.n

    def apply(self, p: Polynomial) -> Polynomial:
        return self.outer.apply(self.inner.apply(p))

    def to_dict(self) -> dict:
        return {"node": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


@dataclass(frozen=True)
class Bracket(OperatorExpr):
    """Commutator AB - BA, evaluated lazily."""

    left: OperatorExpr
    right: OperatorExpr

    def __post_init__(self):
        if self.left.n != self.right.n:
            raise ValueError("bracket mixes variable counts")

    @property
    def n(self) -> int:
        return self.left.n

    def apply(self, p: Polynomial) -> Polynomial:
        return self.left.apply(self.right.apply(p)) - self.right.apply(self.left.apply(p))

    def to_dict(self) -> dict:
        return {"node": "bracket", "left": self.left.to_dict(), "right": self.right.to_dict()}


def op_apply(A: OperatorExpr, p: Polynomial) -> Polynomial:
    return A(p)


def operator_from_dict(obj: Mapping) -> OperatorExpr:
    node = obj["node"]
    if node == "rank_one":
        return RankOne(
            functional_from_dict(obj["functional"]),
            Polynomial.from_dict(obj["direction"]),
        )
    if node == "finite_map":
        images = {tuple(a): Polynomial.from_dict(img) for a, img in obj["images"]}
        return FiniteMap(int(obj["n"]), images, obj.get("default", "zero"))
    if node == "rule":
        rules = tuple(RuleCase(int(r), int(m), int(km), float(c), int(s)) for r, m, km, c, s in obj["rules"])
        overrides = {int(k): (float(c), int(s)) for k, c, s in obj.get("overrides", [])}
        return MonomialRule(rules, overrides)
    if node == "sum":
        return Sum(tuple(operator_from_dict(t) for t in obj["terms"]))
    if node == "scale":
        return Scale(float(obj["factor"]), operator_from_dict(obj["term"]))
    if node == "compose":
        return Compose(operator_from_dict(obj["outer"]), operator_from_dict(obj["inner"]))
    if node == "bracket":
        return Bracket(operator_from_dict(obj["left"]), operator_from_dict(obj["right"]))
    raise ValueError(f"unknown operator node {node!r}")


# -- named operator families -------------------------------------------------


def shift_odd_up() -> MonomialRule:
    """x^k -> x^k for even k, x^(k+1) for odd k.  Every even block is invariant."""
    return MonomialRule(
        rules=(RuleCase(0, 2, coeff=1.0, shift=0), RuleCase(1, 2, coeff=1.0, shift=1))
    )


def shift_even_up() -> MonomialRule:
    """x^k -> x^(k+1) for even k, x^k for odd k.  Every odd block is invariant."""
    return MonomialRule(
        rules=(RuleCase(0, 2, coeff=1.0, shift=1), RuleCase(1, 2, coeff=1.0, shift=0))
    )


def _primes_up_to_count(count: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < count:
        if all(cand % q for q in primes if q * q <= cand):
            primes.append(cand)
        cand += 1
    return primes


def prime_shift_operator(degree_bound: int) -> FiniteMap:
    """x^(2m) -> x^(p_(m+1)) for m >= 1 with (p_i) the primes, everything else to 0.

    Squares to zero, so its exponential is I + tA even though no graded
    block is invariant.  Materialized as a finite table for inputs of
    degree <= degree_bound.
    """
    count = degree_bound // 2 + 1
    primes = _primes_up_to_count(max(count, 2))
    images = {
        (2 * m,): Polynomial.monomial(1, (primes[m],))
        for m in range(1, degree_bound // 2 + 1)
    }
    return FiniteMap(1, images, default="zero")


# -- matrix restriction and exponential ---------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator on a graded basis (column j = image of basis[j])."""

    basis: GradedBasis
    entries: np.ndarray

    def __post_init__(self):
        m = len(self.basis)
        if self.entries.shape != (m, m):
            raise ValueError("matrix shape does not match basis size")

    def apply_vector(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def apply(self, p: Polynomial) -> Polynomial:
        return self.basis.polynomial(self.entries @ self.basis.vector(p))


def restrict_matrix(A: OperatorExpr, basis: GradedBasis) -> OperatorMatrix:
    """Faithful matrix of A on span(basis); raises NotInvariantError on escape."""
    m = len(basis)
    entries = np.zeros((m, m))
    for j, alpha in enumerate(basis.order):
        image = A(Polynomial.monomial(basis.n, alpha))
        for beta, c in image.terms.items():
            if beta not in basis.index:
                raise NotInvariantError(alpha, beta)
            entries[basis.index[beta], j] = c
    return OperatorMatrix(basis, entries)


def expm_dense(M: np.ndarray, t: float = 1.0, tol: float = 1e-12) -> np.ndarray:
    """exp(t*M) by scaling and squaring with a truncated Taylor series.

    The scaled norm is kept <= 0.5 before the series; overflow is raised,
    never saturated.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("matrix exponential input is not finite")
    m = M.shape[0]
    if t == 0.0 or m == 0:
        return np.eye(m)
    S = t * M
    norm = np.linalg.norm(S, np.inf)
    if not np.isfinite(norm):
        raise FloatingPointError("matrix exponential input overflows")
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    S = S / (2.0**squarings)
    out = np.eye(m)
    term = np.eye(m)
    for k in range(1, 60):
        term = term @ S / k
        out = out + term
        if np.linalg.norm(term, np.inf) <= tol * np.linalg.norm(out, np.inf):
            break
    for _ in range(squarings):
        out = out @ out
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("matrix exponential overflowed while squaring")
    return out


def expm(M: OperatorMatrix, t: float = 1.0, tol: float = 1e-12) -> OperatorMatrix:
    return OperatorMatrix(M.basis, expm_dense(M.entries, t, tol))


def rank_one_exp(
    l: LinearFunctional, f: Polynomial, t: float, p: Polynomial
) -> Polynomial:
    """Closed-form exp(t * (l x f)) applied to p.

    Powers of a rank-one operator collapse onto the ray of f, which sums
    the series to p + l(p)/lam * (e^(t*lam) - 1) * f with lam = l(f); the
    lam -> 0 limit is p + t*l(p)*f.
    """
    if t == 0.0:
        return p
    lam = l(f)
    lp = l(p)
    if lp == 0.0:
        return p
    x = t * lam
    if abs(x) < 1e-8:
        coeff = t
    else:
        coeff = math.expm1(x) / lam
    return p + (lp * coeff) * f


# -- span stabilization --------------------------------------------------------


class PolySpan:
    """Growable orthonormal span of polynomials with a rank-revealing drop rule.

    Candidates are normalized, then orthogonalized (twice, for stability)
    against the current span; one is dropped as dependent when its residual
    falls below drop_tol relative to its own norm.  The per-candidate rule
    is scale-invariant, which matters for stabilization sequences whose
    iterates grow exponentially: a new direction of unit relative size must
    not drown under earlier huge columns.
    """

    def __init__(self, n: int, drop_tol: float = 1e-10):
        self.n = n
        self.drop_tol = drop_tol
        self._row_index: dict[MultiIndex, int] = {}
        self._rows: list[MultiIndex] = []
        self._Q = np.zeros((0, 0))
        self.members: list[Polynomial] = []

    def __len__(self) -> int:
        return self._Q.shape[1]

    def _ensure_rows(self, p: Polynomial) -> None:
        new = [a for a in p.terms if a not in self._row_index]
        if new:
            for a in new:
                self._row_index[a] = len(self._rows)
                self._rows.append(a)
            pad = np.zeros((len(new), self._Q.shape[1]))
            self._Q = np.vstack([self._Q, pad]) if self._Q.size else np.zeros(
                (len(self._rows), 0)
            )

    def _vector(self, p: Polynomial) -> np.ndarray:
        v = np.zeros(len(self._rows))
        for a, c in p.terms.items():
            v[self._row_index[a]] = c
        return v

    def add(self, p: Polynomial) -> bool:
        """Try to grow the span by p; returns True if the rank increased."""
        self._ensure_rows(p)
        v = self._vector(p)
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            return False
        v = v / nrm
        r = v - self._Q @ (self._Q.T @ v)
        r = r - self._Q @ (self._Q.T @ r)
        rn = np.linalg.norm(r)
        if rn <= self.drop_tol:
            return False
        self._Q = np.hstack([self._Q, (r / rn)[:, None]])
        self.members.append(p)
        return True

    def coords(self, p: Polynomial) -> tuple[np.ndarray, float]:
        """Coordinates of p in the orthonormal span plus the residual norm."""
        self._ensure_rows(p)
        v = self._vector(p)
        c = self._Q.T @ v
        res = float(np.linalg.norm(v - self._Q @ c))
        return c, res

    def basis_polynomial(self, j: int) -> Polynomial:
        return Polynomial(
            self.n, {a: float(self._Q[i, j]) for a, i in self._row_index.items()}
        )

    def combine(self, coeffs: np.ndarray) -> Polynomial:
        v = self._Q @ coeffs
        return Polynomial(self.n, {a: float(v[i]) for a, i in self._row_index.items()})


def _default_degree_bound(p: Polynomial) -> int:
    d = p.degree
    base = 1 if d == MINUS_INFINITY else int(d)
    return 4 * max(base, 1) + 16


@dataclass(eq=False)
class Stabilization:
    """Result of growing the span of p, Ap, A^2 p, ... under caps."""

    span: PolySpan
    degree_trace: list
    status: str              # "stabilized" | "degree" | "steps"
    steps: int
    matrix: np.ndarray | None = None        # A on the orthonormal span
    residual: float | None = None           # worst relative invariance defect


def _span_matrix(A: OperatorExpr, span: PolySpan) -> tuple[np.ndarray, float]:
    k = len(span)
    M = np.zeros((k, k))
    worst = 0.0
    for j in range(k):
        image = A(span.basis_polynomial(j))
        c, res = span.coords(image)
        M[:, j] = c
        scale = max(1.0, math.hypot(float(np.linalg.norm(c)), res))
        worst = max(worst, res / scale)
    return M, worst


def stabilize_krylov(
    A: OperatorExpr,
    seed: Polynomial,
    degree_bound: int,
    step_cap: int,
) -> Stabilization:
    """Iterate V <- V + A*V from the seed until the dimension stops growing.

    Each round applies A to every basis vector of the current orthonormal
    span, not only to the newest power of the seed: iterating the seed alone
    loses new directions to rounding once they shrink below the drop
    tolerance, while refreshing from the whole basis makes a no-growth round
    certify A V within V by construction.  The degree trace follows the seed
    powers; escaping the degree bound or exhausting the round cap reports
    the two blow-up causes separately.
    """
    span = PolySpan(seed.n)
    trace = [seed.degree]
    if seed.degree != MINUS_INFINITY and seed.degree > degree_bound:
        return Stabilization(span, trace, "degree", 0)
    span.add(seed)
    current = seed
    steps = 0
    while steps < step_cap:
        steps += 1
        # seed-power iterate, kept at unit scale, drives the degree trace
        current = A(current)
        nrm = sup_norm(current)
        if nrm > 0.0:
            current = (1.0 / nrm) * current
        d = current.degree
        trace.append(d)
        if d != MINUS_INFINITY and d > degree_bound:
            return Stabilization(span, trace, "degree", steps)
        grew = span.add(current)
        for j in range(len(span) - (1 if grew else 0)):
            image = A(span.basis_polynomial(j))
            d_img = image.degree
            if d_img != MINUS_INFINITY and d_img > degree_bound:
                trace.append(d_img)
                return Stabilization(span, trace, "degree", steps)
            if span.add(image):
                grew = True
        if not grew:
            M, residual = _span_matrix(A, span)
            return Stabilization(span, trace, "stabilized", steps, M, residual)
    return Stabilization(span, trace, "steps", steps)


def exp_apply(
    A: OperatorExpr,
    t: float,
    p: Polynomial,
    bound: int | None = None,
    tol: float = 1e-12,
) -> Polynomial:
    """Apply exp(t*A) to p through a stabilized finite invariant subspace.

    The span p, Ap, A^2 p, ... is grown until it verifies as A-invariant;
    the restriction of A to that span is exponentiated as a matrix.
    BlowUpError carries the observed degree trace when stabilization fails
    within the degree bound, meaning exp(t*A) is not certified well-defined
    up to that bound.  Pure rank-one operators take the closed-form route.
    """
    if t == 0.0:
        return p
    if isinstance(A, RankOne):
        return rank_one_exp(A.functional, A.direction, t, p)
    if p.is_zero():
        return p
    if bound is None:
        bound = _default_degree_bound(p)

    step_cap = math.comb(p.n + bound, bound) + 8
    stab = stabilize_krylov(A, p, bound, step_cap)
    if stab.status != "stabilized":
        cap = bound if stab.status == "degree" else step_cap
        raise BlowUpError(stab.degree_trace, cap, cause=stab.status)
    c0, _ = stab.span.coords(p)
    return stab.span.combine(expm_dense(stab.matrix, t, tol) @ c0)
