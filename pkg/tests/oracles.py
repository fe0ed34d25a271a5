"""Independent oracles for the test suite.

Test scaffolding only, never package API.  Everything here recomputes
expected values by a route that shares no code with the implementation it
checks: adaptive quadrature for moments, dict convolution for products,
dense grids for nonnegativity, and raw series summation for exponentials.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from sostransport.polynomials import Polynomial

# the Gaussian weight is below 3e-63 at |x| = 12; truncation error is
# irrelevant at the 1e-8 tolerances used against these oracles
CUTOFF = 12.0


def quad_moment_1d(k: int, orthant: bool = False) -> float:
    lo = 0.0 if orthant else -CUTOFF
    val, _ = integrate.quad(
        lambda x: x**k * math.exp(-x * x), lo, CUTOFF, epsabs=1e-13, epsrel=1e-13, limit=400
    )
    return val


def quad_moment(alpha, orthant: bool = False) -> float:
    """Product of per-axis adaptive quadratures."""
    out = 1.0
    for k in alpha:
        out *= quad_moment_1d(int(k), orthant)
    return out


def nquad_moment(alpha, orthant: bool = False) -> float:
    """Genuinely multidimensional adaptive quadrature (slow; spot checks)."""
    lo = 0.0 if orthant else -CUTOFF

    def f(*xs):
        v = 1.0
        for x, k in zip(xs, alpha):
            v *= x ** int(k)
        return v * math.exp(-sum(x * x for x in xs))

    val, _ = integrate.nquad(
        f, [(lo, CUTOFF)] * len(alpha), opts={"epsabs": 1e-10, "epsrel": 1e-10}
    )
    return val


def brute_mul(p: Polynomial, q: Polynomial) -> dict:
    """Convolution product recomputed from scratch; returns a terms dict."""
    out: dict = {}
    for a, ca in p.terms.items():
        for b, cb in q.terms.items():
            g = tuple(x + y for x, y in zip(a, b))
            out[g] = out.get(g, 0.0) + ca * cb
    return {g: c for g, c in out.items() if c != 0.0}


def grid_min_univariate(p: Polynomial, lo: float = -20.0, hi: float = 20.0, num: int = 10000):
    """(min value, argmin) of a univariate polynomial on a dense grid."""
    xs = np.linspace(lo, hi, num)
    coeffs = np.zeros(int(max(p.degree, 0)) + 1)
    for (k,), c in p.terms.items():
        coeffs[k] = c
    vals = np.polynomial.polynomial.polyval(xs, coeffs)
    i = int(np.argmin(vals))
    return float(vals[i]), float(xs[i])


def leading_coeff_univariate(p: Polynomial) -> float:
    if p.is_zero():
        return 0.0
    top = int(p.degree)
    return p.terms.get((top,), 0.0)


def series_exp_apply(apply_once, t: float, p: Polynomial, terms: int = 140) -> Polynomial:
    """exp(tA) p by raw series summation; apply_once is p -> A p.

    140 terms cover |t|*||A|| up to ~30 with terms below 1e-15 of the sum.
    """
    out = p
    q = p
    for k in range(1, terms):
        q = (t / k) * apply_once(q)
        out = out + q
    return out


def sample_points(n: int, count: int, seed: int, scale: float = 3.0, orthant: bool = False):
    rng = np.random.default_rng(seed)
    pts = rng.normal(scale=scale, size=(count, n))
    if orthant:
        pts = np.abs(pts)
    return pts


def motzkin_am_gm_gap(x: float, y: float) -> float:
    """AM-GM on (x^4 y^2, x^2 y^4, 1): their mean minus the cube root product.

    Nonnegative by AM-GM; times 3 it equals the Motzkin polynomial's value,
    which gives an independent nonnegativity argument.
    """
    a, b, c = x**4 * y**2, x**2 * y**4, 1.0
    return (a + b + c) / 3.0 - (a * b * c) ** (1.0 / 3.0)
