"""Local basis, Lambda matrix, eigen-observables and the decomposition identity."""

import numpy as np
import pytest

from prethermal import (
    LambdaMatrix,
    OperatorSum,
    PauliString,
    build_basis,
    build_model,
    collective,
    decompose_correlation,
    dipolar,
    eigen_observables,
    floquet_spectrum,
    floquet_unitary,
    infinite_time_corr,
    inner_product,
    lambda_matrix,
    norm,
)
from prethermal.qcfind import enumerate_patterns
from conftest import dense_opsum


def test_pattern_counts():
    assert len(enumerate_patterns(1)) == 3
    assert len(enumerate_patterns(2)) == 3 + 9
    assert len(enumerate_patterns(3)) == 3 + 9 + 36


def test_patterns_have_nontrivial_ends():
    for p in enumerate_patterns(3):
        assert p[0] != "I" and p[-1] != "I"


def test_basis_rc1_members():
    basis = build_basis(10, 1)
    assert basis.patterns == ["X", "Y", "Z"]
    z = collective("z", 10)
    assert norm(basis.members[2] - z * (1.0 / norm(z))) < 1e-14


def test_basis_member_count_rc3():
    basis = build_basis(10, 3)
    assert len(basis) == 48


def test_basis_gram_identity_dense_oracle():
    basis = build_basis(10, 3)
    mats = [dense_opsum(m).ravel() for m in basis.members]
    for i in range(len(mats)):
        for j in range(i, len(mats)):
            g = np.vdot(mats[i], mats[j])
            expected = 1.0 if i == j else 0.0
            assert abs(g - expected) < 1e-12


def test_basis_too_small_L_rejected():
    with pytest.raises(ValueError):
        build_basis(7, 3)  # needs L >= 8


def test_lambda_identity_propagator():
    basis = build_basis(8, 2)
    spectrum = floquet_spectrum(np.eye(256))
    lam = lambda_matrix(basis, spectrum)
    assert np.abs(lam.matrix - np.eye(len(basis))).max() < 1e-10
    assert lam.asymmetry < 1e-12
    pairs = eigen_observables(lam, top_k=3)
    assert all(abs(v - 1.0) < 1e-10 for v, _ in pairs)


def test_lambda_structure_kdm_L8():
    basis = build_basis(8, 3)
    m = build_model("kdm", tau=0.5, L=8)
    lam = lambda_matrix(basis, floquet_spectrum(floquet_unitary(m)))
    assert np.abs(lam.matrix - lam.matrix.T).max() < 1e-10
    vals = np.linalg.eigvalsh(lam.matrix)
    assert vals.min() > -1e-9
    assert vals.max() < 1.0 + 1e-9


def test_lambda_size_mismatch():
    basis = build_basis(8, 1)
    with pytest.raises(ValueError):
        lambda_matrix(basis, floquet_spectrum(np.eye(16)))


def test_eigen_observables_orthonormal():
    basis = build_basis(8, 2)
    m = build_model("kdm", tau=0.7, L=8)
    lam = lambda_matrix(basis, floquet_spectrum(floquet_unitary(m)))
    pairs = eigen_observables(lam, top_k=4)
    assert sorted((v for v, _ in pairs), reverse=True) == [v for v, _ in pairs]
    for i, (_, ei) in enumerate(pairs):
        for j, (_, ej) in enumerate(pairs):
            expected = 1.0 if i == j else 0.0
            assert abs(inner_product(ei, ej).real - expected) < 1e-10


def test_eigen_pair_correlations_are_diagonal():
    # <E_k(inf) E_l> = lambda_k delta_kl
    basis = build_basis(8, 2)
    m = build_model("kdm", tau=0.6, L=8)
    spectrum = floquet_spectrum(floquet_unitary(m))
    lam = lambda_matrix(basis, spectrum)
    pairs = eigen_observables(lam, top_k=4)
    for k, (vk, ek) in enumerate(pairs):
        for l, (_, el) in enumerate(pairs):
            got = infinite_time_corr(ek, el, spectrum)
            expected = vk if k == l else 0.0
            assert abs(got - expected) < 1e-8


def _synthetic_lambda():
    basis = build_basis(8, 1)
    eigenvalues = np.array([1.0, 0.5, 0.0])
    eigenvectors = np.eye(3)
    return LambdaMatrix(
        basis=basis,
        matrix=eigenvectors @ np.diag(eigenvalues) @ eigenvectors.T,
        asymmetry=0.0,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


def test_decompose_collapses_on_eigen_observable():
    lam = _synthetic_lambda()
    e2 = lam.eigen_observable(1)
    assert abs(decompose_correlation(e2, e2, lam) - 0.5) < 1e-12


def test_decompose_orthogonal_to_conserved_directions():
    lam = _synthetic_lambda()
    o = lam.eigen_observable(2)  # lambda = 0 direction
    assert abs(decompose_correlation(o, o, lam)) < 1e-12


def test_decompose_matches_direct_infinite_time():
    basis = build_basis(8, 2)
    m = build_model("kdm", tau=0.5, L=8)
    spectrum = floquet_spectrum(floquet_unitary(m))
    lam = lambda_matrix(basis, spectrum)
    rng = np.random.default_rng(23)
    for _ in range(10):
        c = rng.normal(size=len(basis))
        o = OperatorSum.zero(8)
        for ci, member in zip(c, basis.members):
            o = o + float(ci) * member
        direct = infinite_time_corr(o, o, spectrum)
        decomposed = decompose_correlation(o, o, lam)
        assert abs(direct - decomposed) < 1e-8


def test_decompose_rejects_out_of_span():
    lam = _synthetic_lambda()
    single = OperatorSum.from_string(PauliString.single(8, 0, "Z"))  # not TI
    with pytest.raises(ValueError):
        decompose_correlation(single, single, lam)
    wide = dipolar("z", 8)  # range 2 > r_c = 1
    with pytest.raises(ValueError):
        decompose_correlation(wide, wide, lam)


@pytest.mark.slow
def test_kdm_top_eigenobservables_near_hbar_and_dz():
    # small Trotter step: E_1 tracks Hbar and E_2 tracks D_z.  The E_2/D_z
    # overlap saturates near 0.86 for h = J (the dressed dipolar order keeps
    # an O(J/h) correction), so 0.8 is the meaningful bound here.
    L = 10
    m = build_model("kdm", tau=0.3, L=L)
    lam = lambda_matrix(build_basis(L, 3), floquet_spectrum(floquet_unitary(m)))
    pairs = eigen_observables(lam, top_k=3)
    hbar = m.average_hamiltonian()
    dz = dipolar("z", L)
    assert abs(inner_product(pairs[0][1], hbar).real) > 0.9
    assert abs(inner_product(pairs[1][1], dz).real) > 0.8
    # and D_z overlaps E_2 far more than any other eigen-direction
    assert abs(inner_product(pairs[1][1], dz).real) > 3 * abs(
        inner_product(pairs[2][1], dz).real
    )
