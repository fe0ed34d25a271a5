"""Sparse multivariate polynomials over a fixed graded-lexicographic order.

Coefficients are doubles and the algebra is exact in shape: normalization
only drops coefficients below 1e-300 (true zeros for all practical
purposes), so every tolerance decision is left to the consumers.  The
monomial order is graded lex with x1 > x2 > ... and is used unchanged by
every matrix restriction and file format in the package.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Mapping

import numpy as np

MultiIndex = tuple[int, ...]

#: Degree of the zero polynomial.  Kept as an explicit sentinel so degree
#: arithmetic (deg(p*q) = deg p + deg q) stays valid without -1 hacks.
MINUS_INFINITY = float("-inf")

_PRUNE = 1e-300


def grlex_key(alpha: MultiIndex) -> tuple:
    """Sort key realizing graded lex with x1 > x2 > ... ."""
    return (sum(alpha), tuple(-e for e in alpha))


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    # x1-major: largest leading exponent first within a degree block.
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class Polynomial:
    """Finitely supported map from exponent vectors to real coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[MultiIndex, float] | None = None):
        if n < 1:
            raise ValueError(f"variable count must be >= 1, got {n}")
        clean: dict[MultiIndex, float] = {}
        if terms:
            for alpha, c in terms.items():
                alpha = tuple(int(e) for e in alpha)
                if len(alpha) != n:
                    raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {n}")
                if any(e < 0 for e in alpha):
                    raise ValueError(f"negative exponent in {alpha}")
                c = float(c)
                if abs(c) >= _PRUNE:
                    clean[alpha] = c
        self.n = n
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "Polynomial":
        return Polynomial(n)

    @staticmethod
    def constant(n: int, value: float) -> "Polynomial":
        return Polynomial(n, {(0,) * n: value})

    @staticmethod
    def monomial(n: int, alpha: Iterable[int], coeff: float = 1.0) -> "Polynomial":
        return Polynomial(n, {tuple(alpha): coeff})

    @staticmethod
    def variable(n: int, i: int) -> "Polynomial":
        """The polynomial x_{i+1} (0-based index)."""
        alpha = tuple(1 if j == i else 0 for j in range(n))
        return Polynomial(n, {alpha: 1.0})

    # -- queries -----------------------------------------------------------

    @property
    def degree(self) -> float:
        """Total degree; MINUS_INFINITY for the zero polynomial."""
        if not self.terms:
            return MINUS_INFINITY
        return max(sum(a) for a in self.terms)

    def coeff(self, alpha: Iterable[int]) -> float:
        return self.terms.get(tuple(alpha), 0.0)

    def is_zero(self) -> bool:
        return not self.terms

    def homogeneous_component(self, k: int) -> "Polynomial":
        """The part of total degree exactly k."""
        if k < 0:
            raise ValueError("degree must be >= 0")
        return Polynomial(self.n, {a: c for a, c in self.terms.items() if sum(a) == k})

    def evaluate(self, point: Iterable[float]) -> float:
        pt = [float(v) for v in point]
        if len(pt) != self.n:
            raise ValueError(f"point has length {len(pt)}, expected {self.n}")
        total = 0.0
        for alpha, c in self.terms.items():
            term = c
            for x, e in zip(pt, alpha):
                if e:
                    term *= x**e
            total += term
        return total

    # -- arithmetic ---------------------------------------------------------

    def _check_same_n(self, other: "Polynomial") -> None:
        if self.n != other.n:
            raise ValueError(f"variable counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_n(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial(self.n, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-1.0) * other

    def __neg__(self) -> "Polynomial":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check_same_n(other)
            out: dict[MultiIndex, float] = {}
            for a, ca in self.terms.items():
                for b, cb in other.terms.items():
                    g = tuple(x + y for x, y in zip(a, b))
                    out[g] = out.get(g, 0.0) + ca * cb
            return Polynomial(self.n, out)
        return Polynomial(self.n, {a: float(other) * c for a, c in self.terms.items()})

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for alpha in sorted(self.terms, key=grlex_key):
            c = self.terms[alpha]
            mono = "*".join(
                f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}"
                for i, e in enumerate(alpha)
                if e
            )
            if not mono:
                parts.append(f"{c:g}")
            elif c == 1.0:
                parts.append(mono)
            elif c == -1.0:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c:g}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        """JSON form: {"n": n, "terms": [[[e1,...,en], coeff], ...]}, graded-lex sorted."""
        return {
            "n": self.n,
            "terms": [[list(a), self.terms[a]] for a in sorted(self.terms, key=grlex_key)],
        }

    @staticmethod
    def from_dict(obj: Mapping) -> "Polynomial":
        return Polynomial(int(obj["n"]), {tuple(a): c for a, c in obj["terms"]})


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_scale(c: float, p: Polynomial) -> Polynomial:
    return c * p


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def homogeneous_component(p: Polynomial, k: int) -> Polynomial:
    return p.homogeneous_component(k)


def evaluate(p: Polynomial, point: Iterable[float]) -> float:
    return p.evaluate(point)


def sup_distance(p: Polynomial, q: Polynomial) -> float:
    """Max absolute coefficient difference."""
    keys = set(p.terms) | set(q.terms)
    if not keys:
        return 0.0
    return max(abs(p.terms.get(a, 0.0) - q.terms.get(a, 0.0)) for a in keys)


def sup_norm(p: Polynomial) -> float:
    return max((abs(c) for c in p.terms.values()), default=0.0)


class GradedBasis:
    """All monomials of total degree <= d in n variables, graded-lex sorted."""

    __slots__ = ("n", "degree_bound", "order", "index")

    def __init__(self, n: int, d: int):
        if n < 1:
            raise ValueError(f"variable count must be >= 1, got {n}")
        if d < 0:
            raise ValueError(f"degree bound must be >= 0, got {d}")
        order: list[MultiIndex] = []
        for total in range(d + 1):
            order.extend(_compositions(total, n))
        self.n = n
        self.degree_bound = d
        self.order = order
        self.index = {alpha: i for i, alpha in enumerate(order)}
        assert len(self.order) == math.comb(n + d, d)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[MultiIndex]:
        return iter(self.order)

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self.index

    def position(self, alpha: Iterable[int]) -> int:
        return self.index[tuple(alpha)]

    def vector(self, p: Polynomial) -> np.ndarray:
        """Coefficient vector of p in this basis; raises KeyError if p leaves it."""
        v = np.zeros(len(self.order))
        for alpha, c in p.terms.items():
            v[self.index[alpha]] = c
        return v

    def polynomial(self, vec: np.ndarray) -> Polynomial:
        if len(vec) != len(self.order):
            raise ValueError("vector length does not match basis size")
        return Polynomial(self.n, {a: float(c) for a, c in zip(self.order, vec)})


def monomial_basis(n: int, d: int) -> GradedBasis:
    return GradedBasis(n, d)


def motzkin() -> Polynomial:
    """x1^4 x2^2 + x1^2 x2^4 - 3 x1^2 x2^2 + 1: nonnegative on R^2, not a sum of squares."""
    return Polynomial(2, {(4, 2): 1.0, (2, 4): 1.0, (2, 2): -3.0, (0, 0): 1.0})
