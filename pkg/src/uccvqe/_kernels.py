"""Hot statevector kernels: Pauli-string application, rotation products,
and term-wise overlaps.

Two interchangeable backends are provided.  The default compiles the inner
loops with numba's ``@njit``; setting the environment variable
``UCCVQE_PURE_NUMPY=1`` (or running without numba installed) selects a
vectorized pure-numpy fallback.  ``benchmarks/bench_kernels.py`` times the
two against each other.

Encoding: a Pauli string on basis state |b> acts as
``phase * (-1)**popcount(b & zy_mask) |b XOR x_mask>`` where ``phase`` is
``i**n_Y``, ``x_mask`` marks X/Y factors and ``zy_mask`` marks Y/Z factors.
Statevectors are little-endian: qubit q is bit q of the basis index.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("UCCVQE_PURE_NUMPY", "").strip() not in ("", "0")

try:  # pragma: no cover - exercised through the backend switch
    if _FORCE_NUMPY:
        raise ImportError("pure-numpy backend requested")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap


# ---------------------------------------------------------------------------
# pure-numpy backend
# ---------------------------------------------------------------------------

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(dim: int) -> np.ndarray:
    arr = _INDEX_CACHE.get(dim)
    if arr is None:
        arr = np.arange(dim, dtype=np.int64)
        _INDEX_CACHE[dim] = arr
    return arr


def _parity_signs(dim: int, mask: int) -> np.ndarray:
    """(-1)**popcount(idx & mask) for idx in range(dim)."""
    v = _indices(dim) & mask
    v = v ^ (v >> 16)
    v = v ^ (v >> 8)
    v = v ^ (v >> 4)
    v = v ^ (v >> 2)
    v = v ^ (v >> 1)
    return 1.0 - 2.0 * (v & 1)


def _apply_rotations_numpy(amps, x_masks, zy_masks, phases, angles) -> None:
    dim = amps.shape[0]
    idx = _indices(dim)
    for k in range(len(angles)):
        x_mask = int(x_masks[k])
        signs = _parity_signs(dim, int(zy_masks[k]))
        factor = 1j * np.sin(angles[k]) * phases[k]
        cos_t = np.cos(angles[k])
        if x_mask == 0:
            amps *= cos_t + factor * signs
            continue
        high_bit = 1 << (x_mask.bit_length() - 1)
        lower = idx[(idx & high_bit) == 0]
        partner = lower ^ x_mask
        a = amps[lower]
        b = amps[partner]
        amps[lower] = cos_t * a + (factor * signs[partner]) * b
        amps[partner] = cos_t * b + (factor * signs[lower]) * a


def _apply_rotations_batch_numpy(mat, x_masks, zy_masks, phases, angles) -> None:
    dim = mat.shape[1]
    idx = _indices(dim)
    for k in range(len(angles)):
        x_mask = int(x_masks[k])
        signs = _parity_signs(dim, int(zy_masks[k]))
        factor = 1j * np.sin(angles[k]) * phases[k]
        cos_t = np.cos(angles[k])
        if x_mask == 0:
            mat *= cos_t + factor * signs
            continue
        high_bit = 1 << (x_mask.bit_length() - 1)
        lower = idx[(idx & high_bit) == 0]
        partner = lower ^ x_mask
        a = mat[:, lower]
        b = mat[:, partner]
        mat[:, lower] = cos_t * a + (factor * signs[partner]) * b
        mat[:, partner] = cos_t * b + (factor * signs[lower]) * a


def _apply_operator_numpy(out, amps, x_masks, zy_masks, phases, coeffs) -> None:
    dim = amps.shape[0]
    idx = _indices(dim)
    for k in range(len(coeffs)):
        signs = _parity_signs(dim, int(zy_masks[k]))
        out[idx ^ int(x_masks[k])] += (coeffs[k] * phases[k]) * (signs * amps)


def _term_overlaps_numpy(bra, ket, x_masks, zy_masks, phases):
    dim = ket.shape[0]
    idx = _indices(dim)
    bra_c = np.conj(bra)
    out = np.empty(len(x_masks), dtype=np.complex128)
    for k in range(len(x_masks)):
        signs = _parity_signs(dim, int(zy_masks[k]))
        out[k] = phases[k] * np.sum(bra_c[idx ^ int(x_masks[k])] * signs * ket)
    return out


def _pauli_rows_numpy(out, amps, x_masks, zy_masks, phases) -> None:
    dim = amps.shape[0]
    idx = _indices(dim)
    for k in range(len(x_masks)):
        signs = _parity_signs(dim, int(zy_masks[k]))
        out[k, idx ^ int(x_masks[k])] = phases[k] * (signs * amps)


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------


@njit(cache=True)
def _parity(value: int) -> int:
    v = value
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


@njit(cache=True)
def _apply_rotations_numba(amps, x_masks, zy_masks, phases, angles) -> None:
    dim = amps.shape[0]
    for k in range(angles.shape[0]):
        x_mask = x_masks[k]
        zy_mask = zy_masks[k]
        factor = 1j * np.sin(angles[k]) * phases[k]
        cos_t = np.cos(angles[k])
        if x_mask == 0:
            up = cos_t + factor
            down = cos_t - factor
            for idx in range(dim):
                if _parity(idx & zy_mask):
                    amps[idx] *= down
                else:
                    amps[idx] *= up
        else:
            high_bit = 1
            m = x_mask
            while m > 1:
                m >>= 1
                high_bit <<= 1
            for idx in range(dim):
                if idx & high_bit:
                    continue
                partner = idx ^ x_mask
                sign_a = 1.0 - 2.0 * _parity(idx & zy_mask)
                sign_b = 1.0 - 2.0 * _parity(partner & zy_mask)
                a = amps[idx]
                b = amps[partner]
                amps[idx] = cos_t * a + factor * sign_b * b
                amps[partner] = cos_t * b + factor * sign_a * a


@njit(cache=True)
def _apply_rotations_batch_numba(mat, x_masks, zy_masks, phases, angles) -> None:
    for row in range(mat.shape[0]):
        _apply_rotations_numba(mat[row], x_masks, zy_masks, phases, angles)


@njit(cache=True)
def _apply_operator_numba(out, amps, x_masks, zy_masks, phases, coeffs) -> None:
    dim = amps.shape[0]
    for k in range(coeffs.shape[0]):
        x_mask = x_masks[k]
        zy_mask = zy_masks[k]
        scale = coeffs[k] * phases[k]
        for idx in range(dim):
            if _parity(idx & zy_mask):
                out[idx ^ x_mask] -= scale * amps[idx]
            else:
                out[idx ^ x_mask] += scale * amps[idx]


@njit(cache=True)
def _pauli_rows_numba(out, amps, x_masks, zy_masks, phases) -> None:
    dim = amps.shape[0]
    for k in range(x_masks.shape[0]):
        x_mask = x_masks[k]
        zy_mask = zy_masks[k]
        phase = phases[k]
        for idx in range(dim):
            if _parity(idx & zy_mask):
                out[k, idx ^ x_mask] = -phase * amps[idx]
            else:
                out[k, idx ^ x_mask] = phase * amps[idx]


@njit(cache=True)
def _term_overlaps_numba(bra, ket, x_masks, zy_masks, phases):
    dim = ket.shape[0]
    n_terms = x_masks.shape[0]
    out = np.empty(n_terms, dtype=np.complex128)
    for k in range(n_terms):
        x_mask = x_masks[k]
        zy_mask = zy_masks[k]
        acc = 0.0 + 0.0j
        for idx in range(dim):
            if _parity(idx & zy_mask):
                acc -= np.conj(bra[idx ^ x_mask]) * ket[idx]
            else:
                acc += np.conj(bra[idx ^ x_mask]) * ket[idx]
        out[k] = phases[k] * acc
    return out


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

if _HAVE_NUMBA and not _FORCE_NUMPY:
    BACKEND = "numba"
    apply_rotations = _apply_rotations_numba
    apply_rotations_batch = _apply_rotations_batch_numba
    apply_operator = _apply_operator_numba
    term_overlaps = _term_overlaps_numba
    pauli_rows = _pauli_rows_numba
else:
    BACKEND = "numpy"
    apply_rotations = _apply_rotations_numpy
    apply_rotations_batch = _apply_rotations_batch_numpy
    apply_operator = _apply_operator_numpy
    term_overlaps = _term_overlaps_numpy
    pauli_rows = _pauli_rows_numpy
