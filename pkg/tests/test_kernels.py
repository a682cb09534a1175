"""Cross-backend agreement: every numba kernel must match its pure-numpy
fallback bit-for-bit at double precision."""

import numpy as np
import pytest
import scipy.linalg

from uccvqe import _kernels
from uccvqe._kernels import (
    _apply_operator_numba,
    _apply_operator_numpy,
    _apply_rotations_batch_numba,
    _apply_rotations_batch_numpy,
    _apply_rotations_numba,
    _apply_rotations_numpy,
    _pauli_rows_numba,
    _pauli_rows_numpy,
    _term_overlaps_numba,
    _term_overlaps_numpy,
)


def random_inputs(n_qubits=6, n_terms=40, seed=0):
    """Random genuine Pauli strings: the phase is pinned to the Y count
    (bits in both masks), so rotations built from them are unitary."""
    rng = np.random.default_rng(seed)
    dim = 2**n_qubits
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi = (psi / np.linalg.norm(psi)).astype(np.complex128)
    x = rng.integers(0, dim, size=n_terms, dtype=np.int64)
    zy = rng.integers(0, dim, size=n_terms, dtype=np.int64)
    n_y = np.array([bin(int(a & b)).count("1") for a, b in zip(x, zy)])
    phases = (1j**n_y).astype(np.complex128)
    coeffs = (rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)).astype(np.complex128)
    angles = rng.normal(scale=0.3, size=n_terms)
    return psi, x, zy, phases, coeffs, angles


def test_rotations_backends_agree():
    psi, x, zy, phases, _, angles = random_inputs(seed=1)
    a, b = psi.copy(), psi.copy()
    _apply_rotations_numba(a, x, zy, phases, angles)
    _apply_rotations_numpy(b, x, zy, phases, angles)
    assert np.allclose(a, b, atol=1e-13)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-9


def test_rotation_batch_backends_agree():
    psi, x, zy, phases, _, angles = random_inputs(seed=2)
    mat_a = np.vstack([psi, 1j * psi, psi[::-1]]).copy()
    mat_b = mat_a.copy()
    _apply_rotations_batch_numba(mat_a, x, zy, phases, angles)
    _apply_rotations_batch_numpy(mat_b, x, zy, phases, angles)
    assert np.allclose(mat_a, mat_b, atol=1e-13)


def test_apply_operator_backends_agree():
    psi, x, zy, phases, coeffs, _ = random_inputs(seed=3)
    out_a = np.zeros_like(psi)
    out_b = np.zeros_like(psi)
    _apply_operator_numba(out_a, psi, x, zy, phases, coeffs)
    _apply_operator_numpy(out_b, psi, x, zy, phases, coeffs)
    assert np.allclose(out_a, out_b, atol=1e-13)


def test_term_overlaps_backends_agree():
    psi, x, zy, phases, _, _ = random_inputs(seed=4)
    bra = np.roll(psi, 3)
    a = _term_overlaps_numba(bra, psi, x, zy, phases)
    b = _term_overlaps_numpy(bra, psi, x, zy, phases)
    assert np.allclose(a, b, atol=1e-13)


def test_pauli_rows_backends_agree():
    psi, x, zy, phases, _, _ = random_inputs(seed=5)
    rows_a = np.empty((len(x), psi.size), dtype=np.complex128)
    rows_b = np.empty_like(rows_a)
    _pauli_rows_numba(rows_a, psi, x, zy, phases)
    _pauli_rows_numpy(rows_b, psi, x, zy, phases)
    assert np.allclose(rows_a, rows_b, atol=1e-13)


def test_rotation_against_dense_exponential():
    from uccvqe.pauli import PauliString

    from test_pauli import dense

    rng = np.random.default_rng(6)
    n = 5
    psi, *_ = random_inputs(n_qubits=n, seed=7)
    for _ in range(8):
        pairs = [(q, rng.choice(["X", "Y", "Z"])) for q in range(n) if rng.random() < 0.5]
        string = PauliString.from_pairs(pairs)
        theta = rng.normal()
        x_mask, zy_mask, n_y = string.masks()
        expected = scipy.linalg.expm(1j * theta * dense(string, n)) @ psi
        got = psi.copy()
        _kernels.apply_rotations(
            got,
            np.array([x_mask], dtype=np.int64),
            np.array([zy_mask], dtype=np.int64),
            np.array([1j**n_y], dtype=np.complex128),
            np.array([theta]),
        )
        assert np.allclose(got, expected, atol=1e-12)


def test_backend_flag_reported():
    assert _kernels.BACKEND in ("numba", "numpy")


def test_operator_application_is_linear():
    psi, x, zy, phases, coeffs, _ = random_inputs(seed=8)
    out = np.zeros_like(psi)
    _kernels.apply_operator(out, psi, x, zy, phases, coeffs)
    out2 = np.zeros_like(psi)
    _kernels.apply_operator(out2, 2.0 * psi, x, zy, phases, coeffs)
    assert np.allclose(out2, 2.0 * out, atol=1e-12)
