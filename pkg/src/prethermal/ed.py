"""Dense exact diagonalization: propagators, Floquet spectra, correlations.

Observables enter as :class:`~prethermal.pauli.OperatorSum` values and are
mapped to dense 2^L x 2^L matrices.  Stroboscopic time is used throughout:
one step of the map ``U_F = exp(-i H2 tau) exp(-i H1 tau)`` advances the
system by one full period.

Infinite-time averages are diagonal-ensemble averages: the long-time limit
of <O(n) O'> keeps only the blocks of O that are diagonal with respect to
the degeneracy clusters of the Floquet eigenphases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .models import FloquetModel
from .pauli import OperatorSum, norm

__all__ = [
    "L_MAX_DENSE",
    "to_dense",
    "propagator",
    "FloquetDense",
    "floquet_unitary",
    "FloquetSpectrum",
    "floquet_spectrum",
    "diagonal_blocks",
    "infinite_time_corr",
    "CorrelationSeries",
    "correlation_series",
]

# Default cap on dense work: 2^14 = 16384 already means ~4 GB per complex matrix.
L_MAX_DENSE = 14

_HERMITIAN_TOL = 1e-12
_UNITARY_TOL = 1e-10


def to_dense(a: OperatorSum, l_max: int = L_MAX_DENSE) -> np.ndarray:
    """Dense matrix of an operator sum (basis state index bit j = site j).

    Each string acts as a signed permutation: column s maps to row s^x
    with phase i^{|x&z|} (-1)^{|z&s|} (1/2)^{weight}.  Strings sharing an
    x mask are accumulated into one scatter per mask.
    """
    if a.length > l_max:
        raise ValueError(f"L={a.length} exceeds the dense cap l_max={l_max}")
    dim = 1 << a.length
    idx = np.arange(dim, dtype=np.int64)
    out = np.zeros((dim, dim), dtype=complex)
    per_flip: dict[int, np.ndarray] = {}
    for (x, z), c in a._terms.items():
        w = (x | z).bit_count()
        phase = c * (1j) ** ((x & z).bit_count() & 3) * 0.5**w
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
        vec = per_flip.get(x)
        if vec is None:
            per_flip[x] = phase * signs
        else:
            vec += phase * signs
    for x, vec in per_flip.items():
        out[idx ^ x, idx] += vec
    return out


def _check_hermitian(m: np.ndarray, tol: float = _HERMITIAN_TOL):
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    defect = float(np.abs(m - m.conj().T).max(initial=0.0))
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3g})")


def _check_unitary(m: np.ndarray, tol: float = _UNITARY_TOL):
    dim = m.shape[0]
    defect = float(np.abs(m.conj().T @ m - np.eye(dim)).max(initial=0.0))
    if defect > tol:
        raise ValueError(f"matrix is not unitary (defect {defect:.3g})")


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian H, via eigendecomposition."""
    _check_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


class FloquetDense:
    """Dense workspace for one model family, reusable across tau values.

    Holds the eigendecompositions of H1 and H2 once, so a Trotter-step
    sweep only pays matrix products per tau.  Diagonal Hamiltonians (the
    kicked model's collective z field) are detected and kept as vectors.
    """

    def __init__(self, model: FloquetModel, l_max: int = L_MAX_DENSE):
        self.model = model
        h1, h2 = model.hamiltonians()
        self._f1 = self._factor(to_dense(h1, l_max))
        self._f2 = self._factor(to_dense(h2, l_max))

    @staticmethod
    def _factor(h: np.ndarray):
        diag = np.diag(h)
        if np.count_nonzero(h - np.diag(diag)) == 0:
            return diag.real.copy(), None
        _check_hermitian(h)
        return np.linalg.eigh(h)

    @staticmethod
    def _apply_exp(factor, t: float, rhs: np.ndarray | None):
        w, v = factor
        phases = np.exp(-1j * w * t)
        if v is None:  # diagonal Hamiltonian
            if rhs is None:
                return np.diag(phases)
            return phases[:, None] * rhs
        if rhs is None:
            return (v * phases) @ v.conj().T
        return (v * phases) @ (v.conj().T @ rhs)

    def unitary(self, tau: float | None = None) -> np.ndarray:
        """One-period propagator exp(-i H2 tau) exp(-i H1 tau)."""
        if tau is None:
            tau = self.model.tau
        u1 = self._apply_exp(self._f1, tau, None)
        return self._apply_exp(self._f2, tau, u1)


def floquet_unitary(model: FloquetModel, l_max: int = L_MAX_DENSE) -> np.ndarray:
    return FloquetDense(model, l_max).unitary()


@dataclass
class FloquetSpectrum:
    """Eigenphases and eigenvectors of a Floquet propagator.

    ``U v_a = exp(-i phases[a]) v_a`` with phases sorted ascending in
    (-pi, pi].  ``clusters`` partitions the indices into degeneracy groups
    (consecutive angular gaps below ``cluster_tol``, including the wrap
    across the branch cut).
    """

    phases: np.ndarray
    vectors: np.ndarray
    clusters: list = field(repr=False)
    cluster_tol: float = 1e-10

    @property
    def dim(self) -> int:
        return self.phases.shape[0]

    def reconstruction_residual(self, u: np.ndarray) -> float:
        v = self.vectors
        return float(np.linalg.norm(((v * np.exp(-1j * self.phases)) @ v.conj().T) - u))


def _cluster_indices(phases: np.ndarray, tol: float) -> list:
    n = phases.shape[0]
    if n == 0:
        return []
    breaks = np.nonzero(np.diff(phases) >= tol)[0]
    bounds = np.concatenate(([0], breaks + 1, [n]))
    clusters = [np.arange(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    # wrap across the branch cut at +-pi
    if len(clusters) > 1 and (phases[0] + 2.0 * np.pi) - phases[-1] < tol:
        clusters[0] = np.concatenate((clusters.pop(), clusters[0]))
    return clusters


def floquet_spectrum(u: np.ndarray, cluster_tol: float = 1e-10) -> FloquetSpectrum:
    """Schur-based diagonalization of the (normal) propagator U.

    The complex Schur form of a unitary matrix is diagonal up to roundoff,
    so the Schur vectors are an orthonormal eigenbasis even inside
    degenerate subspaces.
    """
    _check_unitary(u)
    t, v = scipy.linalg.schur(u, output="complex")
    phases = -np.angle(np.diag(t))
    phases[phases <= -np.pi] += 2.0 * np.pi
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    v = v[:, order]
    clusters = _cluster_indices(phases, cluster_tol)
    return FloquetSpectrum(phases=phases, vectors=v, clusters=clusters, cluster_tol=cluster_tol)


def diagonal_blocks(a: OperatorSum, spectrum: FloquetSpectrum) -> list:
    """Blocks of V^dag A V restricted to the degeneracy clusters.

    This is the diagonal-ensemble image of A: everything outside the
    blocks dephases away in the infinite-time average.  Costs one dense
    matrix product.
    """
    v = spectrum.vectors
    w = to_dense(a, l_max=L_MAX_DENSE) @ v
    blocks = []
    for idx in spectrum.clusters:
        vc = v[:, idx]
        b = vc.conj().T @ w[:, idx]
        blocks.append(0.5 * (b + b.conj().T))  # A Hermitian: strip roundoff
    return blocks


def infinite_time_corr(o: OperatorSum, o_prime: OperatorSum, spectrum: FloquetSpectrum) -> float:
    """Cesaro-averaged correlation <O(infinity) O'> via the diagonal ensemble.

    Equals Tr[O_tilde O'_tilde] / (||O|| ||O'||) where the tildes are the
    cluster-block restrictions; for a nondegenerate spectrum this is the
    familiar sum over diagonal matrix elements.
    """
    n_o, n_op = norm(o), norm(o_prime)
    if n_o == 0.0 or n_op == 0.0:
        raise ValueError("infinite-time correlation undefined for zero-norm observable")
    blocks_o = diagonal_blocks(o, spectrum)
    blocks_op = blocks_o if o_prime is o else diagonal_blocks(o_prime, spectrum)
    acc = 0j
    for b, bp in zip(blocks_o, blocks_op):
        acc += np.sum(b * bp.T)
    value = acc / (n_o * n_op)
    if abs(value.imag) > 1e-8:
        raise ValueError(f"correlation has a large imaginary part ({value.imag:.3g})")
    return float(value.real)


@dataclass
class CorrelationSeries:
    """Stroboscopic infinite-temperature correlation <O(n) O'> vs period count."""

    model: str
    label_o: str
    label_o_prime: str
    values: np.ndarray

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    def points(self):
        return list(enumerate(self.values.tolist()))


def correlation_series(
    o: OperatorSum,
    o_prime: OperatorSum,
    model: FloquetModel,
    n_max: int,
    spectrum: FloquetSpectrum | None = None,
    labels: tuple[str, str] = ("O", "O'"),
) -> CorrelationSeries:
    """<O(n) O'> for n = 0..n_max in the Floquet eigenbasis.

    O is transformed once; each period is a phase rotation of the matrix
    elements, value(n) = sum_ab exp(-i (th_a - th_b) n) O_ab O'_ba.
    """
    if o.length != model.L or o_prime.length != model.L:
        raise ValueError("observable and model sizes disagree")
    n_o, n_op = norm(o), norm(o_prime)
    if n_o == 0.0 or n_op == 0.0:
        raise ValueError("correlation undefined for zero-norm observable")
    if spectrum is None:
        spectrum = floquet_spectrum(floquet_unitary(model))
    v = spectrum.vectors
    t_o = v.conj().T @ to_dense(o) @ v
    t_op = t_o if o_prime is o else v.conj().T @ to_dense(o_prime) @ v
    m = t_o * t_op.T / (n_o * n_op)
    steps = np.arange(n_max + 1)
    values = np.empty(n_max + 1)
    # chunk the phase matrix so L=12 sweeps with n_max ~ 10^3 stay in memory
    chunk = max(1, int(2e7 // max(1, spectrum.dim)))
    for lo in range(0, n_max + 1, chunk):
        hi = min(lo + chunk, n_max + 1)
        e = np.exp(-1j * np.outer(steps[lo:hi], spectrum.phases))
        vals = np.einsum("na,ab,nb->n", e, m, e.conj())
        if np.abs(vals.imag).max(initial=0.0) > 1e-10:
            raise ValueError("correlation series has a large imaginary part")
        values[lo:hi] = vals.real
    return CorrelationSeries(
        model=model.label(), label_o=labels[0], label_o_prime=labels[1], values=values
    )
