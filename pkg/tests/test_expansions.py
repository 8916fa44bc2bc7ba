"""Magnus series of the drive and the rotated-frame dipolar-order expansion."""

import numpy as np
import pytest
import scipy.linalg

from prethermal import (
    OperatorSum,
    SeriesOperator,
    build_model,
    collective,
    commutator,
    conjugate_series,
    conjugate_series_orders,
    dipolar,
    dpre_expand,
    floquet_magnus,
    floquet_spectrum,
    floquet_unitary,
    h_pre,
    infinite_time_corr,
    inner_product,
    norm,
    omega_norms,
    to_dense,
)
from prethermal.series import bch_log, zero_series
from conftest import dense_opsum


def reconstruct_hj(model, s_series, d_series, j):
    """h_j from the returned orders: h_j = -i tau D_j + i h tau [S_{j-1}, Z]."""
    z = collective("z", model.L)
    tau, h = model.tau, model.h
    out = (-1j * tau) * d_series[j]
    if j - 1 >= 1:
        out = out + (1j * h * tau) * commutator(s_series[j - 1], z)
    return out


# ---------------------------------------------------------------------------
# series core
# ---------------------------------------------------------------------------


def test_bch_log_commuting_factors():
    L = 4
    a = zero_series(L, 3)
    a[1] = -1j * dipolar("y", L)
    out = bch_log(a, a, 3)
    assert norm(out[1] - (-2j) * dipolar("y", L)) < 1e-13
    assert not out[2] and not out[3]


def test_bch_log_leading_orders_vs_dense_logm():
    # truncated series must agree with the dense matrix log as tau -> 0
    L = 3
    h1 = dipolar("y", L)
    h2 = collective("z", L)
    a = zero_series(L, 4)
    b = zero_series(L, 4)
    a[1] = -1j * h2
    b[1] = -1j * h1
    series = bch_log(a, b, 4)
    for tau in (0.05, 0.1):
        total = to_dense(series[1]) * tau
        for g in (2, 3, 4):
            total += to_dense(series[g]) * tau**g
        u = scipy.linalg.expm(-1j * to_dense(h2) * tau) @ scipy.linalg.expm(
            -1j * to_dense(h1) * tau
        )
        ref = scipy.linalg.logm(u)
        assert np.abs(total - ref).max() < 5.0 * tau**5


# ---------------------------------------------------------------------------
# floquet_magnus
# ---------------------------------------------------------------------------


def test_magnus_zeroth_order_is_average_hamiltonian():
    for kind in ("kdm", "adm"):
        m = build_model(kind, tau=0.4, L=6)
        series = floquet_magnus(m, 3)
        assert norm(series[0] - m.average_hamiltonian()) < 1e-12


def test_magnus_commuting_drive_truncates():
    # J = 0 kills H1, so the factors commute and all higher orders vanish
    m = build_model("kdm", J=0.0, h=1.0, tau=0.4, L=4)
    series = floquet_magnus(m, 4)
    assert norm(series[0] - collective("z", 4)) < 1e-14
    for k in range(1, 5):
        assert not series[k]


def test_magnus_first_order_dense_scaling():
    # || U_F - exp(-i tau (O0 + tau O1)) || = O(tau^3)
    L = 4
    series = floquet_magnus(build_model("kdm", tau=1.0, L=L), 1)
    errs = []
    taus = (0.05, 0.1, 0.2)
    for tau in taus:
        m = build_model("kdm", tau=tau, L=L)
        u = floquet_unitary(m)
        approx = scipy.linalg.expm(-1j * tau * to_dense(h_pre(series, 1, tau=tau)))
        errs.append(np.linalg.norm(u - approx, 2))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert abs(slope - 3.0) < 0.3


def test_magnus_hermitian_orders_and_tau_independence():
    m1 = floquet_magnus(build_model("adm", tau=0.3, L=5), 4)
    m2 = floquet_magnus(build_model("adm", tau=0.9, L=5), 4)
    for k in range(5):
        assert m1[k].is_hermitian()
        assert norm(m1[k] - m2[k]) < 1e-12  # Omega_m depends only on H1, H2


def test_magnus_order_guard():
    with pytest.raises(ValueError):
        floquet_magnus(build_model("kdm", tau=0.1, L=4), 11)


def test_omega_norms_zero_series():
    zero = SeriesOperator("tau_order", tuple(OperatorSum.zero(4) for _ in range(3)), tau=0.1)
    assert omega_norms(zero, 4) == [0.0, 0.0, 0.0]


def test_h_pre_order_zero_is_hbar():
    m = build_model("adm", tau=0.5, L=6)
    series = floquet_magnus(m, 2)
    assert norm(h_pre(series, 0) - m.average_hamiltonian()) < 1e-12


def test_h_pre_needs_tau():
    series = floquet_magnus(build_model("kdm", tau=0.5, L=4), 2)
    bare = SeriesOperator("tau_order", series.orders)
    with pytest.raises(ValueError):
        h_pre(bare, 2)
    assert norm(h_pre(bare, 2, tau=0.5) - h_pre(series, 2)) < 1e-14


def test_magnus_locality_bound():
    # nearest-neighbor drives: range(Omega_m) <= m + 2, checked on a ring
    # long enough that no computed pattern wraps
    series = floquet_magnus(build_model("kdm", tau=0.3, L=16), 5)
    for m_idx, op in enumerate(series.orders):
        assert op.range <= m_idx + 2


# ---------------------------------------------------------------------------
# dpre_expand
# ---------------------------------------------------------------------------


def test_dpre_h1_vanishes_h2_is_kick():
    m = build_model("kdm", tau=0.5, L=6)
    s, d = dpre_expand(m, 3)
    h1_op, _ = m.hamiltonians()
    h1_rec = reconstruct_hj(m, s, d, 1)
    assert not h1_rec
    h2_rec = reconstruct_hj(m, s, d, 2)
    assert norm(h2_rec - (-1j * m.tau) * h1_op) < 1e-12


def test_dpre_h3_printed_formula():
    m = build_model("kdm", tau=0.7, L=6)
    s, d = dpre_expand(m, 3)
    z = collective("z", 6)
    h1_op, _ = m.hamiltonians()
    tau, h = m.tau, m.h
    h2 = (-1j * tau) * h1_op
    s1 = s[1]
    expected = commutator(s1, h2) + (0.5j * h * tau) * (
        commutator(s1, commutator(s1, -1.0 * z))
        + commutator(z, commutator((1j * h * tau) * z, s1))
    )
    assert norm(reconstruct_hj(m, s, d, 3) - expected) < 1e-12


def test_dpre_leading_order_is_minus_half_dz():
    m = build_model("kdm", tau=0.5, L=8)
    _, d = dpre_expand(m, 2)
    assert not d[0] and not d[1]
    residual = d[2] + 0.5 * dipolar("z", 8)
    assert norm(residual) < 1e-12


def test_dpre_structure_checks():
    m = build_model("kdm", tau=0.4, L=6)
    s, d = dpre_expand(m, 6)
    z = collective("z", 6)
    for j in range(2, 7):
        assert d[j].is_hermitian()
        assert norm(commutator(z, d[j])) < 1e-12
    for g in range(1, 6):
        assert norm(s[g] + s[g].adjoint()) < 1e-12  # anti-Hermitian


def test_dpre_locality_bound():
    m = build_model("kdm", tau=0.4, L=16)
    s, _ = dpre_expand(m, 5)
    for j in range(1, 5):
        assert s[j].range <= j + 1


def test_dpre_errors():
    with pytest.raises(ValueError):
        dpre_expand(build_model("adm", tau=0.3, L=4), 3)
    with pytest.raises(ValueError):
        dpre_expand(build_model("kdm", h=0.0, tau=0.3, L=4), 3)
    with pytest.raises(ValueError):
        dpre_expand(build_model("kdm", tau=0.3, L=4), 9)


# ---------------------------------------------------------------------------
# conjugate_series
# ---------------------------------------------------------------------------


def test_conjugate_with_zero_generator():
    L = 4
    s = SeriesOperator("epsilon_order", tuple(OperatorSum.zero(L) for _ in range(3)))
    dz = dipolar("z", L)
    assert norm(conjugate_series(dz, s, 2) - dz) < 1e-14


def test_conjugate_first_order_dense_scaling():
    # order-1 truncation A + [A, S1] matches dense e^{-eps S1} A e^{eps S1} to O(eps^2)
    L = 4
    m = build_model("kdm", tau=0.5, L=L)
    s, _ = dpre_expand(m, 3)
    a = dipolar("z", L)
    first = conjugate_series_orders(a, s, 1)
    assert norm(first[0] - a) < 1e-14
    assert norm(first[1] - commutator(a, s[1])) < 1e-12
    s1_dense = to_dense(s[1])
    a_dense = to_dense(a)
    errs = []
    eps_values = (0.05, 0.1, 0.2)
    for eps in eps_values:
        exact = (
            scipy.linalg.expm(-eps * s1_dense) @ a_dense @ scipy.linalg.expm(eps * s1_dense)
        )
        truncated = to_dense(first[0]) + eps * to_dense(first[1])
        errs.append(np.linalg.norm(exact - truncated))
    slope = np.polyfit(np.log(eps_values), np.log(errs), 1)[0]
    assert abs(slope - 2.0) < 0.3


def test_dpre_observable_overlaps_dz():
    m = build_model("kdm", tau=0.3, L=8)
    s, d = dpre_expand(m, 5)
    dpre = conjugate_series(d, s, 5)
    assert abs(inner_product(dpre, dipolar("z", 8)).real) > 0.8


@pytest.mark.slow
def test_zpre_conserved_but_not_eigen():
    # Z_pre = e^{-S} Z e^{S} is conserved at the D_pre level yet keeps a
    # large overlap with H_pre, so it is not an eigen-quasiconserved direction
    L = 10
    jt = 0.4
    m = build_model("kdm", tau=jt, L=L)
    s, d = dpre_expand(m, 7)
    z_pre = conjugate_series(collective("z", L), s, 7)
    d_pre = conjugate_series(d, s, 7)
    magnus = floquet_magnus(m, 7)
    hp = h_pre(magnus, 7)
    spectrum = floquet_spectrum(floquet_unitary(m))
    z_fid = infinite_time_corr(z_pre, z_pre, spectrum)
    d_fid = infinite_time_corr(d_pre, d_pre, spectrum)
    assert z_fid > 0.9 and d_fid > 0.9
    assert abs(z_fid - d_fid) < 0.1
    assert abs(inner_product(z_pre, hp).real) > 0.5


@pytest.mark.slow
def test_h_pre_conservation_improves_with_order():
    # more orders conserve better than the bare average Hamiltonian
    L = 8
    jt = 0.4
    m = build_model("kdm", tau=jt, L=L)
    series = floquet_magnus(m, 4)
    spectrum = floquet_spectrum(floquet_unitary(m))
    hbar = m.average_hamiltonian()
    h4 = h_pre(series, 4)
    assert infinite_time_corr(h4, h4, spectrum) > infinite_time_corr(hbar, hbar, spectrum)
