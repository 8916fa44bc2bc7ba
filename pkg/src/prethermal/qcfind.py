"""Systematic search for eigen-quasiconserved observables.

Builds the orthonormal basis of translationally invariant local operator
sums up to a range cutoff, fills the infinite-time pair-correlation matrix
over that basis, and diagonalizes it.  Large eigenvalues flag observables
whose autocorrelation survives the infinite-time average.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .ed import FloquetSpectrum, diagonal_blocks
from .pauli import OperatorSum, PauliString, inner_product, norm, trace_inner

__all__ = [
    "LocalBasis",
    "enumerate_patterns",
    "build_basis",
    "LambdaMatrix",
    "lambda_matrix",
    "eigen_observables",
    "decompose_correlation",
]

_GRAM_TOL = 1e-12


def enumerate_patterns(r_c: int) -> list[str]:
    """Letter patterns of range 1..r_c in canonical order.

    A pattern's first and last letters are non-identity, so range r
    contributes 3 * 4^(r-2) * 3 patterns (3 for r = 1).
    """
    if r_c < 1:
        raise ValueError("r_c must be >= 1")
    patterns = []
    for r in range(1, r_c + 1):
        if r == 1:
            patterns.extend(["X", "Y", "Z"])
            continue
        for first in "XYZ":
            for middle in itertools.product("IXYZ", repeat=r - 2):
                for last in "XYZ":
                    patterns.append(first + "".join(middle) + last)
    return patterns


def _pattern_operator(pattern: str, L: int) -> OperatorSum:
    """Unit-normalized translationally invariant sum of one pattern."""
    r = len(pattern)
    terms = {}
    for j in range(L):
        sites = {(j + k) % L: letter for k, letter in enumerate(pattern) if letter != "I"}
        terms[PauliString.from_sites(L, sites)] = 1.0
    op = OperatorSum(L, terms)
    return op * (1.0 / norm(op))


@dataclass
class LocalBasis:
    """Orthonormal basis of translationally invariant sums with range <= r_c."""

    L: int
    r_c: int
    patterns: list[str]
    members: list[OperatorSum]

    def __len__(self) -> int:
        return len(self.members)


def build_basis(L: int, r_c: int) -> LocalBasis:
    """Enumerate, build and orthonormality-check the local basis.

    Requires L >= 2 r_c + 2: shorter rings let periodic wrap-around make
    shifted copies of distinct patterns collide, breaking orthogonality.
    The Gram matrix is verified explicitly rather than trusted.
    """
    if L < 2 * r_c + 2:
        raise ValueError(f"need L >= 2 r_c + 2 = {2 * r_c + 2}, got L={L}")
    patterns = enumerate_patterns(r_c)
    members = [_pattern_operator(p, L) for p in patterns]
    for i, a in enumerate(members):
        for j in range(i, len(members)):
            g = trace_inner(a, members[j]).real
            expect = 1.0 if i == j else 0.0
            if abs(g - expect) > _GRAM_TOL:
                raise AssertionError(
                    f"basis not orthonormal: <{patterns[i]},{patterns[j]}> = {g!r}"
                )
    return LocalBasis(L=L, r_c=r_c, patterns=patterns, members=members)


@dataclass
class LambdaMatrix:
    """Infinite-time pair-correlation matrix over a local basis.

    A Gram matrix of diagonal-ensemble projections: real symmetric,
    positive semidefinite, eigenvalues in [0, 1].  Eigenpairs are stored
    sorted by descending eigenvalue.
    """

    basis: LocalBasis
    matrix: np.ndarray
    asymmetry: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    _PSD_TOL = 1e-9

    def eigen_observable(self, k: int) -> OperatorSum:
        """k-th eigen-observable (0-based, descending eigenvalue order)."""
        vec = self.eigenvectors[:, k]
        out = OperatorSum.zero(self.basis.L)
        for c, member in zip(vec, self.basis.members):
            if abs(c) > 1e-15:
                out = out + float(c) * member
        return out


def lambda_matrix(basis: LocalBasis, spectrum: FloquetSpectrum) -> LambdaMatrix:
    """Fill Lambda_{mu nu} = <O_mu(infinity) O_nu> over the basis.

    Each member costs one dense product with the eigenvector matrix; the
    pair contractions then reduce to a Gram product of packed cluster
    blocks.  The matrix is symmetrized and the pre-symmetrization
    asymmetry recorded as a consistency guard.
    """
    if 1 << basis.L != spectrum.dim:
        raise ValueError("basis and spectrum sizes disagree")
    rows = []
    rows_t = []
    for member in basis.members:
        blocks = diagonal_blocks(member, spectrum)
        rows.append(np.concatenate([b.ravel() for b in blocks]))
        rows_t.append(np.concatenate([b.T.ravel() for b in blocks]))
    m = np.array(rows)
    mt = np.array(rows_t)
    norms = np.array([norm(member) for member in basis.members])
    raw = (m @ mt.T).real / np.outer(norms, norms)
    asymmetry = float(np.abs(raw - raw.T).max(initial=0.0))
    if asymmetry > 1e-8:
        raise AssertionError(f"Lambda asymmetry {asymmetry:.3g} signals a broken diagonal ensemble")
    sym = 0.5 * (raw + raw.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals.min(initial=0.0) < -LambdaMatrix._PSD_TOL or vals.max(initial=0.0) > 1.0 + LambdaMatrix._PSD_TOL:
        raise AssertionError(f"Lambda eigenvalues outside [0,1]: [{vals.min()}, {vals.max()}]")
    order = np.argsort(vals)[::-1]
    return LambdaMatrix(
        basis=basis,
        matrix=sym,
        asymmetry=asymmetry,
        eigenvalues=vals[order],
        eigenvectors=vecs[:, order],
    )


def eigen_observables(lam: LambdaMatrix, top_k: int | None = None) -> list[tuple[float, OperatorSum]]:
    """(lambda_k, E_k) pairs sorted by descending eigenvalue."""
    k = len(lam.eigenvalues) if top_k is None else min(top_k, len(lam.eigenvalues))
    return [(float(lam.eigenvalues[i]), lam.eigen_observable(i)) for i in range(k)]


def _span_coefficients(o: OperatorSum, basis: LocalBasis, tol: float = 1e-6) -> np.ndarray:
    coeffs = np.array([trace_inner(member, o).real for member in basis.members])
    norm_sq = trace_inner(o, o).real
    residual_sq = norm_sq - float(coeffs @ coeffs)
    # the difference of squared norms carries ~eps * ||O||^2 of float noise
    if residual_sq > tol**2 * max(norm_sq, 1e-300):
        raise ValueError("observable lies outside the local basis span")
    return coeffs


def decompose_correlation(o: OperatorSum, o_prime: OperatorSum, lam: LambdaMatrix) -> float:
    """Infinite-time correlation from the eigen-observable decomposition:

        <O(inf) O'> = sum_mu lambda_mu <O E_mu> <E_mu O'>

    Both observables must lie in the basis span.  With the full eigenset
    this reproduces the direct diagonal-ensemble value.
    """
    basis = lam.basis
    c_o = _span_coefficients(o, basis)
    c_op = c_o if o_prime is o else _span_coefficients(o_prime, basis)
    # <O E_mu> in the normalized metric: project, rotate, rescale
    proj_o = lam.eigenvectors.T @ c_o / norm(o)
    proj_op = lam.eigenvectors.T @ c_op / norm(o_prime)
    return float(np.sum(lam.eigenvalues * proj_o * proj_op))


def overlap_with(o: OperatorSum, candidate: OperatorSum) -> float:
    """|<O, candidate>| in the normalized trace metric (convenience)."""
    return abs(inner_product(o, candidate))
