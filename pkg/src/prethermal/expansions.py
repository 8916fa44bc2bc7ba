"""Effective-Hamiltonian and rotated-frame expansions of the Floquet drive.

Two series live here:

* the Floquet-Magnus series of the one-period propagator,
  ``log U_F = -i tau sum_m tau^m Omega_m``, whose truncations give the
  prethermal Hamiltonian;

* the rotated-frame series for the kicked model that extracts the
  emergent dipolar order: an anti-Hermitian generator S and a dressed
  interaction D with [Z, D] = 0 are determined order by order in the
  bookkeeping parameter epsilon (one epsilon per factor of h*tau, two per
  factor of J*tau), and the quasiconserved observable is
  ``D_pre = exp(-S) D exp(S)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .models import FloquetModel, collective
from .pauli import OperatorSum, coherence_decompose, commutator, intensive_norm
from .series import (
    bch_log,
    series_add,
    series_conjugate_exp,
    series_scale,
    truncated,
    zero_series,
)

__all__ = [
    "SeriesOperator",
    "floquet_magnus",
    "omega_norms",
    "h_pre",
    "dpre_expand",
    "conjugate_series",
    "conjugate_series_orders",
    "dpre_observable",
]

M_MAX_MAGNUS = 10
J_MAX_DPRE = 8
_HERM_TOL = 1e-10


@dataclass(frozen=True)
class SeriesOperator:
    """Coefficient list of a formal operator power series.

    ``orders[m]`` is the operator multiplying the m-th power of the
    bookkeeping parameter (``tau_order`` for the Magnus series,
    ``epsilon_order`` for the rotated-frame series).  ``tau`` records the
    numeric Trotter half-step the series was built with, where relevant.
    """

    parameter: str
    orders: tuple
    tau: float | None = None

    def __post_init__(self):
        if self.parameter not in ("tau_order", "epsilon_order"):
            raise ValueError("parameter must be 'tau_order' or 'epsilon_order'")

    def __len__(self) -> int:
        return len(self.orders)

    def __getitem__(self, m: int) -> OperatorSum:
        return self.orders[m]

    @property
    def length(self) -> int:
        return self.orders[0].length

    def ranges(self) -> list[int]:
        """Measured range of every order (locality bookkeeping)."""
        return [op.range for op in self.orders]

    def with_tau(self, tau: float) -> "SeriesOperator":
        return replace(self, tau=tau)


def floquet_magnus(model: FloquetModel, m_max: int) -> SeriesOperator:
    """Magnus coefficients Omega_0..Omega_m_max of log U_F = -i tau sum tau^m Omega_m.

    Computed as a formal power series in tau through the commutator-only
    recursion of :func:`~prethermal.series.bch_log` applied to
    log(e^{-i H2 tau} e^{-i H1 tau}); Omega_0 = H1 + H2 exactly.  Each
    Omega_m must come out Hermitian, anything else is an error.
    """
    if m_max > M_MAX_MAGNUS:
        raise ValueError(f"m_max={m_max} exceeds the term-growth guard {M_MAX_MAGNUS}")
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    h1, h2 = model.hamiltonians()
    grade_max = m_max + 1
    a = zero_series(model.L, grade_max)
    b = zero_series(model.L, grade_max)
    a[1] = -1j * h2
    b[1] = -1j * h1
    log_u = bch_log(a, b, grade_max)
    omegas = []
    for m in range(m_max + 1):
        omega = 1j * log_u[m + 1]
        defect = omega.hermitian_defect()
        if defect > _HERM_TOL:
            raise ArithmeticError(f"Omega_{m} is not Hermitian (defect {defect:.3g})")
        omegas.append(omega.real_part())
    return SeriesOperator(parameter="tau_order", orders=tuple(omegas), tau=model.tau)


def omega_norms(series: SeriesOperator, L: int) -> list[float]:
    """||Omega_m|| / sqrt(L 2^L) per order (the intensive normalization)."""
    if series.parameter != "tau_order":
        raise ValueError("omega_norms expects a tau_order series")
    if L != series.length:
        raise ValueError("L disagrees with the series")
    return [intensive_norm(op) for op in series.orders]


def h_pre(series: SeriesOperator, m: int, tau: float | None = None) -> OperatorSum:
    """Prethermal Hamiltonian sum_{k<=m} tau^k Omega_k at the numeric tau."""
    if m >= len(series):
        raise ValueError(f"order m={m} exceeds the series length {len(series)}")
    if tau is None:
        tau = series.tau
    if tau is None:
        raise ValueError("series carries no tau; pass one explicitly")
    out = series.orders[0]
    for k in range(1, m + 1):
        out = out + (tau**k) * series.orders[k]
    return out


def dpre_expand(model: FloquetModel, j_max: int) -> tuple[SeriesOperator, SeriesOperator]:
    """Order-by-order construction of the rotated-frame pair (S, D) for the KDM.

    At each order j the known part h_j of the epsilon^j coefficient of

        log( e^{i eps h Z tau} e^S e^{-i eps h Z tau} e^{-i eps^2 H1 tau} e^{-S} )

    is evaluated with the previously determined S orders, decomposed by
    coherence order q with respect to Z, and split as

        -i tau D_j = h_{j0},        S_{j-1} = i sum_{q != 0} h_{jq} / (h q tau),

    which makes [Z, D_j] = 0 exact and S_{j-1} anti-Hermitian.  Returns
    the epsilon series (S, D) with orders[j] the epsilon^j coefficient.
    """
    if model.kind != "kdm":
        raise ValueError("the rotated-frame expansion is defined for the kicked model")
    if model.h == 0.0:
        raise ValueError("h = 0 leaves the coherence split undefined")
    if j_max > J_MAX_DPRE:
        raise ValueError(f"j_max={j_max} exceeds the term-growth guard {J_MAX_DPRE}")
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    L, h, tau = model.L, model.h, model.tau
    h1, _ = model.hamiltonians()
    z = collective("z", L)
    rotation = (1j * h * tau) * z
    kick = (-1j * tau) * h1

    s_orders: list[OperatorSum] = [OperatorSum.zero(L) for _ in range(j_max)]
    d_orders: list[OperatorSum] = [OperatorSum.zero(L) for _ in range(j_max + 1)]

    for j in range(1, j_max + 1):
        grade = j
        rot_series = zero_series(L, grade)
        rot_series[1] = rotation
        kick_series = zero_series(L, grade)
        if grade >= 2:
            kick_series[2] = kick
        s_series = zero_series(L, grade)
        for g in range(1, min(j - 1, j_max)):  # S_{j-1} is the unknown: excluded
            s_series[g] = s_orders[g]
        rotated = series_conjugate_exp(rot_series, s_series, grade)
        inner = bch_log(rotated, kick_series, grade)
        log_lhs = bch_log(inner, series_scale(s_series, -1.0), grade)
        h_j = log_lhs[j]
        components = coherence_decompose(h_j)
        h_j0 = components.get(0, OperatorSum.zero(L))
        d_j = (1j / tau) * h_j0
        defect = d_j.hermitian_defect()
        if defect > _HERM_TOL:
            raise ArithmeticError(f"D_{j} is not Hermitian (defect {defect:.3g})")
        d_orders[j] = d_j.real_part()
        if j >= 2:
            acc = OperatorSum.zero(L)
            for q, comp in components.items():
                if q != 0:
                    acc = acc + (1.0 / q) * comp
            s_new = (1j / (h * tau)) * acc
            # anti-Hermitian <=> purely imaginary coefficients
            defect = (1j * s_new).hermitian_defect()
            if defect > _HERM_TOL:
                raise ArithmeticError(f"S_{j - 1} is not anti-Hermitian (defect {defect:.3g})")
            s_orders[j - 1] = -1j * ((1j * s_new).real_part())
    return (
        SeriesOperator(parameter="epsilon_order", orders=tuple(s_orders), tau=tau),
        SeriesOperator(parameter="epsilon_order", orders=tuple(d_orders), tau=tau),
    )


def conjugate_series_orders(
    a: OperatorSum | SeriesOperator, s: SeriesOperator, order: int
) -> list[OperatorSum]:
    """Grade components of exp(-S) A exp(S) through epsilon^order."""
    if s.parameter != "epsilon_order":
        raise ValueError("conjugate_series expects an epsilon_order generator")
    length = s.length
    if isinstance(a, SeriesOperator):
        a_series = truncated(list(a.orders), length, order)
    else:
        a_series = zero_series(length, order)
        a_series[0] = a
    minus_s = [(-1.0) * op for op in s.orders]
    return series_conjugate_exp(truncated(minus_s, length, order), a_series, order)


def conjugate_series(
    a: OperatorSum | SeriesOperator, s: SeriesOperator, order: int
) -> OperatorSum:
    """Truncation of exp(-S) A exp(S) = A + [-S, A] + [-S, [-S, A]]/2 + ...

    ``a`` may be a bare observable (grade 0, e.g. Z) or an epsilon series
    (e.g. the dressed interaction D).  The nested-commutator sum is
    truncated at epsilon^order and collapsed to a single operator
    (bookkeeping parameter set to 1).
    """
    components = conjugate_series_orders(a, s, order)
    out = OperatorSum.zero(components[0].length)
    for entry in components:
        out = out + entry
    return out


def dpre_observable(model: FloquetModel, order: int) -> OperatorSum:
    """Convenience: the emergent dipolar order e^{-S} D e^{S} through epsilon^order."""
    s, d = dpre_expand(model, j_max=order)
    return conjugate_series(d, s, order)
