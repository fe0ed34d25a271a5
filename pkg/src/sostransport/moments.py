"""Gaussian-weighted moment functionals and their relatives.

All moments against the weight exp(-(x1^2 + ... + xn^2)) factor into
univariate integrals

    int_R    x^k exp(-x^2) dx = Gamma((k+1)/2)   for even k, 0 for odd k,
    int_0^oo x^k exp(-x^2) dx = Gamma((k+1)/2)/2 for every k,

and Gamma at half-integers is computed by the exact recurrence from
Gamma(1/2) = sqrt(pi) and Gamma(1) = 1, never by a general Gamma
approximation.  Raw values are exposed unnormalized; downstream searches
absorb any positive rescaling of a functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

from .polynomials import MultiIndex, Polynomial

SQRT_PI = math.sqrt(math.pi)


@lru_cache(maxsize=None)
def gamma_half(m: int) -> float:
    """Gamma(m/2) for integer m >= 1 via the half-integer recurrence."""
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if m == 1:
        return SQRT_PI
    if m == 2:
        return 1.0
    return (m / 2.0 - 1.0) * gamma_half(m - 2)


def gaussian_moment_1d(k: int, orthant: bool = False) -> float:
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    if orthant:
        return gamma_half(k + 1) / 2.0
    return 0.0 if k % 2 else gamma_half(k + 1)


def gaussian_moment_full(alpha: MultiIndex) -> float:
    """Moment of x^alpha against exp(-x^2) over R^n."""
    out = 1.0
    for e in alpha:
        out *= gaussian_moment_1d(e)
        if out == 0.0:
            return 0.0
    return out


def gaussian_moment_orthant(alpha: MultiIndex) -> float:
    """Moment of x^alpha against exp(-x^2) over [0, oo)^n; always > 0."""
    out = 1.0
    for e in alpha:
        out *= gaussian_moment_1d(e, orthant=True)
    return out


class LinearFunctional:
    """Base class: a linear map from polynomials (n variables) to R."""

    n: int

    def apply(self, p: Polynomial) -> float:
        raise NotImplementedError

    def __call__(self, p: Polynomial) -> float:
        if p.n != self.n:
            raise ValueError(f"variable counts differ: {p.n} vs {self.n}")
        return self.apply(p)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianFull(LinearFunctional):
    """p -> int_{R^n} p(x) exp(-x^2) dx."""

    n: int

    def apply(self, p: Polynomial) -> float:
        return sum(c * gaussian_moment_full(a) for a, c in p.terms.items())

    def to_dict(self) -> dict:
        return {"kind": "gaussian_full", "n": self.n, "params": {}}


@dataclass(frozen=True)
class GaussianOrthant(LinearFunctional):
    """p -> int_{[0,oo)^n} p(x) exp(-x^2) dx."""

    n: int

    def apply(self, p: Polynomial) -> float:
        return sum(c * gaussian_moment_orthant(a) for a, c in p.terms.items())

    def to_dict(self) -> dict:
        return {"kind": "gaussian_orthant", "n": self.n, "params": {}}


@dataclass(frozen=True)
class GradedGaussian(LinearFunctional):
    """Gaussian moment applied to a single homogeneous slice of p.

    parity "even" reads total degree 2d, parity "odd" reads 2d-1; every
    other monomial is annihilated exactly.  domain selects R^n or the
    orthant [0,oo)^n as integration region.
    """

    n: int
    d: int
    parity: str = "even"
    domain: str = "full"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.domain not in ("full", "orthant"):
            raise ValueError(f"domain must be 'full' or 'orthant', got {self.domain!r}")
        if self.selected_degree < 0:
            raise ValueError("selected homogeneous degree is negative")

    @property
    def selected_degree(self) -> int:
        return 2 * self.d if self.parity == "even" else 2 * self.d - 1

    def apply(self, p: Polynomial) -> float:
        deg = self.selected_degree
        moment = gaussian_moment_orthant if self.domain == "orthant" else gaussian_moment_full
        return sum(c * moment(a) for a, c in p.terms.items() if sum(a) == deg)

    def to_dict(self) -> dict:
        return {
            "kind": "graded_gaussian",
            "n": self.n,
            "params": {"d": self.d, "parity": self.parity, "domain": self.domain},
        }


@dataclass(frozen=True, eq=False)
class Riesz(LinearFunctional):
    """x^alpha -> s_alpha for a stored sequence table; missing entries are errors."""

    n: int
    table: Mapping[MultiIndex, float] = field(default_factory=dict)

    def apply(self, p: Polynomial) -> float:
        total = 0.0
        for a, c in p.terms.items():
            if a not in self.table:
                raise KeyError(f"sequence table has no entry for exponent {a}")
            total += c * self.table[a]
        return total

    def to_dict(self) -> dict:
        seq = Polynomial(self.n, dict(self.table)).to_dict()
        return {"kind": "riesz", "n": self.n, "params": {"table": seq["terms"]}}


@dataclass(frozen=True)
class PointEval(LinearFunctional):
    """p -> p(y)."""

    n: int
    point: tuple[float, ...]

    def apply(self, p: Polynomial) -> float:
        return p.evaluate(self.point)

    def to_dict(self) -> dict:
        return {"kind": "point_eval", "n": self.n, "params": {"point": list(self.point)}}


@dataclass(frozen=True, eq=False)
class Explicit(LinearFunctional):
    """Table-backed functional on polynomials up to a degree bound.

    Entries absent from the table (but within the bound) count as zero;
    applying to a polynomial above the bound is an error.
    """

    n: int
    table: Mapping[MultiIndex, float] = field(default_factory=dict)
    degree_bound: int = 0

    def apply(self, p: Polynomial) -> float:
        if p.degree > self.degree_bound:
            raise ValueError(
                f"degree {p.degree} exceeds functional table bound {self.degree_bound}"
            )
        return sum(c * self.table.get(a, 0.0) for a, c in p.terms.items())

    def to_dict(self) -> dict:
        seq = Polynomial(self.n, dict(self.table)).to_dict()
        return {
            "kind": "explicit",
            "n": self.n,
            "params": {"table": seq["terms"], "degree_bound": self.degree_bound},
        }


def functional_apply(F: LinearFunctional, p: Polynomial) -> float:
    return F(p)


def riesz_apply(table: Mapping[MultiIndex, float], p: Polynomial) -> float:
    """Pair a coefficient sequence with p: sum of p_alpha * s_alpha."""
    return Riesz(p.n, dict(table))(p)


def functional_from_dict(obj: Mapping) -> LinearFunctional:
    kind = obj["kind"]
    n = int(obj["n"])
    params = obj.get("params", {})
    if kind == "gaussian_full":
        return GaussianFull(n)
    if kind == "gaussian_orthant":
        return GaussianOrthant(n)
    if kind == "graded_gaussian":
        return GradedGaussian(
            n,
            int(params["d"]),
            params.get("parity", "even"),
            params.get("domain", "full"),
        )
    if kind == "riesz":
        return Riesz(n, {tuple(a): float(c) for a, c in params["table"]})
    if kind == "point_eval":
        return PointEval(n, tuple(float(v) for v in params["point"]))
    if kind == "explicit":
        return Explicit(
            n,
            {tuple(a): float(c) for a, c in params["table"]},
            int(params["degree_bound"]),
        )
    raise ValueError(f"unknown functional kind {kind!r}")
