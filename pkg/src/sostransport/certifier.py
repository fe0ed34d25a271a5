"""Constructive sum-of-squares certification via alternating projections.

A polynomial p of degree <= 2d is a sum of squares iff some symmetric PSD
matrix G over the degree-d monomial basis reproduces its coefficients:
sum of G[a,b] over a+b = gamma equals p_gamma.  The coefficient
constraints form disjoint groups of matrix positions, so projection onto
the affine slice is closed-form, and projection onto the PSD cone is an
eigenvalue clip.  Alternating the two (POCS) either reaches a matrix that
is PSD up to eig_tol while matching coefficients, or gives up after
max_iter: the outcome is three-valued (Certified / RefutedByPoint /
Undecided) and refutation only ever happens through an explicit point
where p evaluates negative.

Tolerances are measured on a normalized scale: p is certified after
dividing by scale = max(1, max |p_gamma|), so eig_tol and coeff_tol are
relative to the coefficient size of p.  This keeps certification of
transported polynomials (whose coefficients can be large) meaningful in
double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polynomials import (
    GradedBasis,
    MultiIndex,
    Polynomial,
    grlex_key,
    monomial_basis,
    sup_norm,
)

DEFAULT_EIG_TOL = 1e-8
DEFAULT_COEFF_TOL = 1e-8
DEFAULT_MAX_ITER = 50000
DEFAULT_REFUTE_SAMPLES = 400
REFUTE_MARGIN = 1e-10


@dataclass(frozen=True, eq=False)
class GramProblem:
    """The affine slice of Gram matrices of p over the degree-d basis."""

    poly: Polynomial
    half_degree: int
    basis: GradedBasis
    gammas: list[MultiIndex]              # graded-lex sorted constraint keys
    groups: dict[MultiIndex, list[tuple[int, int]]]
    targets: dict[MultiIndex, float]
    # flat views for the projection loop
    group_ids: np.ndarray = field(repr=False, default=None)
    group_sizes: np.ndarray = field(repr=False, default=None)
    target_vec: np.ndarray = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return len(self.basis)


def build_gram_problem(p: Polynomial, d: int) -> GramProblem:
    """Group the matrix positions by exponent sum and record target coefficients."""
    if d < 0:
        raise ValueError("half-degree must be >= 0")
    if p.degree > 2 * d:
        raise ValueError(f"degree {p.degree} exceeds 2*d = {2 * d}")
    basis = monomial_basis(p.n, d)
    m = len(basis)
    groups: dict[MultiIndex, list[tuple[int, int]]] = {}
    for i, a in enumerate(basis.order):
        for j, b in enumerate(basis.order):
            gamma = tuple(x + y for x, y in zip(a, b))
            groups.setdefault(gamma, []).append((i, j))
    gammas = sorted(groups, key=grlex_key)
    # pairwise sums of the basis exponents exhaust every |gamma| <= 2d
    targets = {g: p.coeff(g) for g in gammas}
    gid = {g: k for k, g in enumerate(gammas)}
    group_ids = np.empty(m * m, dtype=np.intp)
    for g, positions in groups.items():
        k = gid[g]
        for (i, j) in positions:
            group_ids[i * m + j] = k
    group_sizes = np.bincount(group_ids, minlength=len(gammas)).astype(float)
    target_vec = np.array([targets[g] for g in gammas])
    return GramProblem(
        poly=p,
        half_degree=d,
        basis=basis,
        gammas=gammas,
        groups=groups,
        targets=targets,
        group_ids=group_ids,
        group_sizes=group_sizes,
        target_vec=target_vec,
    )


@dataclass(frozen=True, eq=False)
class GramCertificate:
    """A validated Gram-matrix witness that p is a sum of squares.

    G is for the original (unscaled) p; min_eig and coeff_residual are
    reported on the normalized scale used during certification.  squares
    lists (weight, polynomial) pairs with p ~= sum weight * poly^2.
    """

    basis: GradedBasis
    G: np.ndarray
    scale: float
    min_eig: float
    coeff_residual: float
    squares: list[tuple[float, Polynomial]]

    def to_dict(self) -> dict:
        return {
            "n": self.basis.n,
            "half_degree": self.basis.degree_bound,
            "basis": [list(a) for a in self.basis.order],
            "G": [float(x) for x in self.G.reshape(-1)],  # row-major
            "scale": self.scale,
            "min_eig": self.min_eig,
            "residual": self.coeff_residual,
            "squares": [[w, q.to_dict()] for w, q in self.squares],
        }

    @staticmethod
    def from_dict(obj: dict) -> "GramCertificate":
        basis = monomial_basis(int(obj["n"]), int(obj["half_degree"]))
        m = len(basis)
        return GramCertificate(
            basis=basis,
            G=np.array(obj["G"]).reshape(m, m),
            scale=float(obj["scale"]),
            min_eig=float(obj["min_eig"]),
            coeff_residual=float(obj["residual"]),
            squares=[(float(w), Polynomial.from_dict(q)) for w, q in obj["squares"]],
        )


@dataclass(frozen=True)
class Certified:
    certificate: GramCertificate
    iterations: int

    kind = "certified"


@dataclass(frozen=True)
class RefutedByPoint:
    witness: tuple[float, ...]
    value: float

    kind = "refuted"


@dataclass(frozen=True)
class Undecided:
    iterations: int
    min_eig: float
    coeff_residual: float

    kind = "undecided"


CertifyOutcome = Certified | RefutedByPoint | Undecided


def _gram_reconstruction(basis: GradedBasis, G: np.ndarray) -> Polynomial:
    out: dict[MultiIndex, float] = {}
    order = basis.order
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            g = tuple(x + y for x, y in zip(a, b))
            out[g] = out.get(g, 0.0) + G[i, j]
    return Polynomial(basis.n, out)


def _squares_from_eig(
    basis: GradedBasis, w: np.ndarray, V: np.ndarray, eig_tol: float
) -> list[tuple[float, Polynomial]]:
    squares = []
    for i in range(len(w) - 1, -1, -1):  # largest weight first
        if w[i] < eig_tol:
            continue
        vec = V[:, i]
        squares.append((float(w[i]), basis.polynomial(vec)))
    return squares


def _refutation_points(n: int, count: int) -> np.ndarray:
    """Deterministic probe points: origin, a coarse centered grid, spread random points."""
    per_axis = max(2, int(round((count // 2) ** (1.0 / n))))
    axis = np.linspace(-4.0, 4.0, per_axis)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    grid = np.stack([m.reshape(-1) for m in mesh], axis=1)
    rng = np.random.default_rng(20240901)
    extra = count - len(grid)
    pts = [np.zeros((1, n)), grid]
    if extra > 0:
        pts.append(rng.normal(scale=2.0, size=(extra // 2, n)))
        pts.append(rng.normal(scale=8.0, size=(extra - extra // 2, n)))
    return np.vstack(pts)


def _bm_refine(
    ids: np.ndarray,
    targets: np.ndarray,
    m: int,
    w: np.ndarray,
    V: np.ndarray,
    tol: float,
) -> np.ndarray | None:
    """Low-rank Gauss-Newton finish for Gram slices that touch the PSD cone.

    Sums of few squares have only singular Gram matrices, where alternating
    projections approach the touching point sublinearly and stall above any
    practical tolerance.  Factoring G = R R^T at the rank suggested by the
    iterate's spectrum and solving the coefficient equations by damped
    Gauss-Newton converges in a handful of steps instead.  G stays PSD by
    construction, and for a non-SOS input no rank admits a zero-residual
    factor, so the refinement can never manufacture a certificate.
    """
    n_groups = len(targets)
    big = int(np.sum(w > 1e-3 * max(1.0, float(w[-1])))) if m else 0
    big = min(big, m)
    a_flat = np.repeat(np.arange(m), m)
    b_flat = np.tile(np.arange(m), m)

    def residual_vec(R: np.ndarray) -> np.ndarray:
        G = R @ R.T
        return np.bincount(ids, weights=G.reshape(-1), minlength=n_groups) - targets

    def descend(R: np.ndarray) -> tuple[np.ndarray, float]:
        lam = 1e-6
        F = residual_vec(R)
        rank = R.shape[1]
        for _ in range(80):
            J3 = np.zeros((n_groups, m, rank))
            np.add.at(J3, (ids, a_flat), 2.0 * R[b_flat])
            J = J3.reshape(n_groups, m * rank)
            H = J.T @ J + lam * np.eye(m * rank)
            try:
                step = np.linalg.solve(H, J.T @ F)
            except np.linalg.LinAlgError:
                break
            R2 = R - step.reshape(m, rank)
            F2 = residual_vec(R2)
            if np.max(np.abs(F2)) < np.max(np.abs(F)):
                R, F = R2, F2
                lam = max(lam * 0.3, 1e-12)
                if np.max(np.abs(F)) < 0.01 * tol:
                    break
            else:
                lam *= 10.0
                if lam > 1e9:
                    break
        return R, float(np.max(np.abs(F)))

    def eig_init(ww: np.ndarray, VV: np.ndarray, rank: int) -> np.ndarray:
        keep = np.argsort(ww)[-rank:]
        return VV[:, keep] * np.sqrt(np.clip(ww[keep], 1e-12, None))

    rng = np.random.default_rng(8675309)  # fixed: rounding must be reproducible
    best_R, best_res = None, math.inf

    # cheap-first ladder from the iterate's spectrum, with seeded random
    # restarts at low ranks where the factor landscape has narrow basins
    for rank in range(1, big + 1):
        starts = [eig_init(w, V, rank)]
        if rank <= 6:
            starts += [rng.normal(size=(m, rank)) for _ in range(2)]
        for R0 in starts:
            R, res = descend(R0)
            if res <= 0.1 * tol:
                return R @ R.T
            if res < best_res:
                best_R, best_res = R, res

    # cascade: retruncate the best stalled factor and descend again
    if best_R is not None:
        for rank in range(best_R.shape[1] - 1, 0, -1):
            ww, VV = np.linalg.eigh(best_R @ best_R.T)
            R, res = descend(eig_init(ww, VV, rank))
            if res <= 0.1 * tol:
                return R @ R.T
            if res < best_res:
                best_R, best_res = R, res
    return None


def certify_sos(
    p: Polynomial,
    d: int,
    eig_tol: float = DEFAULT_EIG_TOL,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    refute_samples: int = DEFAULT_REFUTE_SAMPLES,
    refute_margin: float = REFUTE_MARGIN,
) -> CertifyOutcome:
    """Decide SOS membership of p at half-degree d, constructively.

    A pre-pass samples points and refutes on any strictly negative value.
    Otherwise alternating projections run between the PSD cone and the
    affine coefficient slice, stopping as soon as the post-affine iterate
    is PSD up to eig_tol and its eigen-decomposition reconstructs p to
    coeff_tol; boundary instances that stall are finished by a low-rank
    Gauss-Newton refinement whose output passes the identical acceptance
    checks.  Every failure mode ends in Undecided, never a certificate.
    """
    scale = max(1.0, sup_norm(p))

    if refute_samples > 0:
        for pt in _refutation_points(p.n, refute_samples):
            val = p.evaluate(pt)
            if val < -max(refute_margin, refute_margin * scale):
                return RefutedByPoint(tuple(float(x) for x in pt), float(val))

    prob = build_gram_problem((1.0 / scale) * p, d)
    m = prob.size
    ids, sizes, targets = prob.group_ids, prob.group_sizes, prob.target_vec

    # diagonal seed: clipped even-coefficient targets
    G = np.zeros((m, m))
    for i, a in enumerate(prob.basis.order):
        G[i, i] = max(0.0, prob.targets.get(tuple(2 * e for e in a), 0.0))

    def accept(Gand: np.ndarray, it: int) -> Certified | None:
        w, V = np.linalg.eigh(Gand)
        min_eig = float(w[0])
        if min_eig < -eig_tol:
            return None
        keep = w >= eig_tol
        Gk = (V[:, keep] * w[keep]) @ V[:, keep].T
        sums_k = np.bincount(ids, weights=Gk.reshape(-1), minlength=len(sizes))
        residual = float(np.max(np.abs(sums_k - targets)))
        if residual > coeff_tol:
            return None
        squares = _squares_from_eig(prob.basis, w, V, eig_tol)
        cert = GramCertificate(
            basis=prob.basis,
            G=scale * Gand,
            scale=scale,
            min_eig=min_eig,
            coeff_residual=residual,
            squares=[(scale * wgt, q) for wgt, q in squares],
        )
        return Certified(cert, it)

    last_min_eig = -math.inf
    last_residual = math.inf
    next_refine = 400
    for it in range(1, max_iter + 1):
        # affine projection: distribute each group's defect evenly
        flat = G.reshape(-1)
        sums = np.bincount(ids, weights=flat, minlength=len(sizes))
        flat += ((targets - sums) / sizes)[ids]
        G = flat.reshape(m, m)

        w, V = np.linalg.eigh(G)
        last_min_eig = float(w[0])
        if last_min_eig >= -eig_tol:
            done = accept(G, it)
            if done is not None:
                return done
            keep = w >= eig_tol
            Gk = (V[:, keep] * w[keep]) @ V[:, keep].T
            sums_k = np.bincount(ids, weights=Gk.reshape(-1), minlength=len(sizes))
            last_residual = float(np.max(np.abs(sums_k - targets)))

        if it >= next_refine or it == max_iter:
            next_refine = 2 * max(next_refine, it)
            refined = _bm_refine(ids, targets, m, w, V, coeff_tol)
            if refined is not None:
                done = accept(refined, it)
                if done is not None:
                    return done

        # PSD projection: clip negative eigenvalues
        G = (V * np.clip(w, 0.0, None)) @ V.T

    return Undecided(max_iter, last_min_eig, last_residual)


def _max_coeff_gap(a: Polynomial, b: Polynomial) -> float:
    keys = set(a.terms) | set(b.terms)
    if not keys:
        return 0.0
    return max(abs(a.terms.get(k, 0.0) - b.terms.get(k, 0.0)) for k in keys)


def validate_certificate(
    p: Polynomial,
    cert: GramCertificate,
    coeff_tol: float = DEFAULT_COEFF_TOL,
    eig_tol: float = DEFAULT_EIG_TOL,
) -> bool:
    """Independent soundness gate: reconstruct, re-eigendecompose, recheck squares."""
    scale = max(1.0, sup_norm(p))
    m = len(cert.basis)
    if cert.G.shape != (m, m):
        return False
    Gn = cert.G / scale
    if not np.allclose(Gn, Gn.T, atol=1e-12):
        return False
    recon = _gram_reconstruction(cert.basis, cert.G)
    if _max_coeff_gap(recon, p) > coeff_tol * scale:
        return False
    w, V = np.linalg.eigh(Gn)
    if float(w[0]) < -eig_tol:
        return False
    squares = _squares_from_eig(cert.basis, w, V, eig_tol)
    sq = Polynomial.zero(p.n)
    for weight, q in squares:
        sq = sq + (scale * weight) * (q * q)
    if _max_coeff_gap(sq, p) > coeff_tol * scale:
        return False
    return True


def interior_point(n: int, d: int) -> Polynomial:
    """Sum of (x^alpha)^2 over |alpha| <= d: identity Gram, strictly interior SOS."""
    basis = monomial_basis(n, d)
    out: dict[MultiIndex, float] = {}
    for a in basis.order:
        key = tuple(2 * e for e in a)
        out[key] = out.get(key, 0.0) + 1.0
    return Polynomial(n, out)


def export_sdpa(prob: GramProblem, path) -> None:
    """Write the Gram feasibility problem in SDPA sparse format (.dat-s).

    The dual of the written problem asks for Y >= 0 (one block) with
    tr(E_gamma Y) = p_gamma, where E_gamma indicates the positions whose
    exponents sum to gamma; constraints are ordered graded-lex in gamma.
    """
    m = prob.size
    lines = [
        f"*SOS Gram feasibility: n={prob.poly.n} half-degree={prob.half_degree}",
        f"{len(prob.gammas)} = mDIM",
        "1 = nBLOCK",
        f"{m} = bLOCKsTRUCT",
        " ".join(repr(prob.targets[g]) for g in prob.gammas),
    ]
    for k, g in enumerate(prob.gammas, start=1):
        for (i, j) in prob.groups[g]:
            if i <= j:
                lines.append(f"{k} 1 {i + 1} {j + 1} 1.0")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
