"""Shared fixtures: the dense tensor-product oracle and cached dense workspaces.

The oracle builds matrices from explicit 2x2 spin matrices with plain
Kronecker products and never touches the symbolic algebra, so it is an
independent reference for every symbolic operation.
"""

from functools import reduce

import numpy as np
import pytest

from prethermal import FloquetDense, PauliString

S_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
    "Z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
}


def dense_string(p) -> np.ndarray:
    """Dense matrix of one Pauli string; site 0 is the least significant bit."""
    letters = p.letters if isinstance(p, PauliString) else p
    mats = [S_MATS[letter] for letter in letters]
    return reduce(np.kron, reversed(mats))


def dense_opsum(a) -> np.ndarray:
    dim = 1 << a.length
    out = np.zeros((dim, dim), dtype=complex)
    for p, c in a:
        out += c * dense_string(p)
    return out


@pytest.fixture(scope="session")
def oracle():
    class Oracle:
        string = staticmethod(dense_string)
        opsum = staticmethod(dense_opsum)
        mats = S_MATS

    return Oracle


def random_opsum(rng, L, n_terms=6, hermitian=False):
    """Random small OperatorSum for property tests."""
    from prethermal import OperatorSum

    terms = {}
    for _ in range(n_terms):
        letters = "".join(rng.choice(list("IXYZ"), size=L))
        if set(letters) == {"I"}:
            continue
        c = complex(rng.normal(), 0.0 if hermitian else rng.normal())
        p = PauliString.from_letters(letters)
        terms[p] = terms.get(p, 0.0) + c
    if not terms:
        terms = {PauliString.from_letters("X" + "I" * (L - 1)): 1.0}
    return OperatorSum(L, terms)


@pytest.fixture(scope="session")
def dense_cache():
    """Session-wide LRU of FloquetDense workspaces (the eigh of H1/H2 dominates)."""
    cache: dict = {}

    def get(model) -> FloquetDense:
        key = (model.kind, model.L, model.coupling_profile, model.J, model.h)
        if key not in cache:
            if len(cache) >= 2:  # bound the held eigenvector matrices
                cache.pop(next(iter(cache)))
            cache[key] = FloquetDense(model)
        return cache[key]

    return get
