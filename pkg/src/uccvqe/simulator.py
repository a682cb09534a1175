"""Statevector simulation: reference preparation, UCC application,
exact and shot-sampled expectation values, and the exact-diagonalization
oracle.

Bit convention (fixed once, everything downstream depends on it): qubit q
is bit q of the basis-state index (little-endian), and |0> is the +1
eigenstate of Z.  An occupied spin orbital is a qubit in |1>, so the
closed-shell reference with eta electrons is the basis state with the
lowest eta bits set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .ansatz import GeneratorExpansion, UccAnsatz, expand_generator
from .fermion import SystemInfo
from .pauli import PauliString, QubitOperator, one_norm

MAX_QUBITS = 16


class CapacityError(ValueError):
    """Register size beyond what the dense simulator supports."""


@dataclass
class Statevector:
    """A 2^N complex amplitude register."""

    amplitudes: np.ndarray
    n_qubits: int

    @classmethod
    def zeros_state(cls, n_qubits: int) -> "Statevector":
        return cls.basis_state(n_qubits, 0)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "Statevector":
        if n_qubits > MAX_QUBITS:
            raise CapacityError(f"{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
        if n_qubits < 0 or not 0 <= index < 2**n_qubits:
            raise ValueError("basis index out of range")
        amps = np.zeros(2**n_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, n_qubits)

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "Statevector") -> complex:
        if self.n_qubits != other.n_qubits:
            raise ValueError("statevector sizes differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def hf_state(system: SystemInfo) -> Statevector:
    """Reference determinant: the lowest eta qubits in |1>."""
    n = system.n_spin_orbitals
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    return Statevector.basis_state(n, (1 << system.n_electrons) - 1)


def infidelity(a: Statevector, b: Statevector) -> float:
    """1 - |<a|b>|^2, clipped into [0, 1] against rounding."""
    value = 1.0 - abs(a.overlap(b)) ** 2
    return float(min(1.0, max(0.0, value)))


# ---------------------------------------------------------------------------
# compiled operators
# ---------------------------------------------------------------------------


class CompiledOperator:
    """A QubitOperator flattened into mask arrays for the kernels."""

    __slots__ = (
        "n_qubits",
        "x_masks",
        "zy_masks",
        "phases",
        "coefficients",
        "one_norm",
        "is_hermitian",
        "identity_coefficient",
    )

    def __init__(self, operator: QubitOperator, n_qubits: int):
        if operator.n_qubits > n_qubits:
            raise ValueError("operator touches qubits beyond the register")
        terms = sorted(operator.items(), key=lambda kv: (kv[0].weight, kv[0].ops))
        m = len(terms)
        self.n_qubits = n_qubits
        self.x_masks = np.zeros(m, dtype=np.int64)
        self.zy_masks = np.zeros(m, dtype=np.int64)
        self.phases = np.zeros(m, dtype=np.complex128)
        self.coefficients = np.zeros(m, dtype=np.complex128)
        self.identity_coefficient = 0.0 + 0.0j
        for k, (string, coeff) in enumerate(terms):
            x_mask, zy_mask, n_y = string.masks()
            self.x_masks[k] = x_mask
            self.zy_masks[k] = zy_mask
            self.phases[k] = 1j**n_y
            self.coefficients[k] = coeff
            if string.is_identity:
                self.identity_coefficient = complex(coeff)
        self.one_norm = one_norm(operator)
        self.is_hermitian = operator.is_hermitian(tol=1e-10)

    def __len__(self) -> int:
        return len(self.coefficients)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def apply(self, state: Statevector) -> Statevector:
        """Return (operator @ state) as a new statevector."""
        out = np.zeros_like(state.amplitudes)
        _kernels.apply_operator(
            out, state.amplitudes, self.x_masks, self.zy_masks,
            self.phases, self.coefficients,
        )
        return Statevector(out, state.n_qubits)

    def term_expectations(self, state: Statevector) -> np.ndarray:
        """Real <state|P_k|state> per term (contract: Hermitian use only)."""
        values = _kernels.term_overlaps(
            state.amplitudes, state.amplitudes, self.x_masks, self.zy_masks,
            self.phases,
        )
        return values.real

    def term_overlaps(self, bra: Statevector, ket: Statevector) -> np.ndarray:
        """Complex <bra|P_k|ket> per term."""
        return _kernels.term_overlaps(
            bra.amplitudes, ket.amplitudes, self.x_masks, self.zy_masks, self.phases
        )

    def dense_matrix(self) -> np.ndarray:
        dim = self.dim
        matrix = np.zeros((dim, dim), dtype=np.complex128)
        idx = np.arange(dim, dtype=np.int64)
        for k in range(len(self.coefficients)):
            signs = _parity_signs(idx, int(self.zy_masks[k]))
            matrix[idx ^ int(self.x_masks[k]), idx] += (
                self.coefficients[k] * self.phases[k]
            ) * signs
        return matrix


def _parity_signs(idx: np.ndarray, mask: int) -> np.ndarray:
    v = idx & mask
    v = v ^ (v >> 16)
    v = v ^ (v >> 8)
    v = v ^ (v >> 4)
    v = v ^ (v >> 2)
    v = v ^ (v >> 1)
    return 1.0 - 2.0 * (v & 1)


def _as_compiled(operator, n_qubits: int) -> CompiledOperator:
    if isinstance(operator, CompiledOperator):
        if operator.n_qubits != n_qubits:
            raise ValueError("compiled operator register size mismatch")
        return operator
    return CompiledOperator(operator, n_qubits)


def apply_pauli_rotation(state: Statevector, string: PauliString, theta: float) -> Statevector:
    """In-place state <- exp(i theta P) state; returns the state."""
    if string.max_qubit >= state.n_qubits:
        raise ValueError("Pauli string touches qubits beyond the register")
    x_mask, zy_mask, n_y = string.masks()
    _kernels.apply_rotations(
        state.amplitudes,
        np.array([x_mask], dtype=np.int64),
        np.array([zy_mask], dtype=np.int64),
        np.array([1j**n_y], dtype=np.complex128),
        np.array([theta], dtype=np.float64),
    )
    return state


def expectation(state: Statevector, operator) -> float:
    """Exact <state|O|state> for a Hermitian operator."""
    compiled = _as_compiled(operator, state.n_qubits)
    if not compiled.is_hermitian:
        raise ValueError("expectation requires a Hermitian operator")
    values = compiled.term_expectations(state)
    return float(np.sum(compiled.coefficients.real * values))


# ---------------------------------------------------------------------------
# compiled ansatz
# ---------------------------------------------------------------------------


class CompiledAnsatz:
    """A UCC ansatz flattened into rotation-generator arrays.

    One entry per subterm, in application order for a single trotter
    slice: excitations in list order, subterms in expansion order.  The
    statevector for amplitudes t is the ordered product of rotations
    exp(i * (c_k t_{param_k} / rho) P_k) repeated rho times (trotterized
    mode) or the dense exponential of the summed generator (exact mode).
    """

    def __init__(self, ansatz: UccAnsatz, system: SystemInfo):
        self.ansatz = ansatz
        self.system = system
        self.n_qubits = system.n_spin_orbitals
        self.expansions: list[GeneratorExpansion] = [
            expand_generator(exc, system) for exc in ansatz.excitations
        ]
        x_masks, zy_masks, phases, coeffs, owners = [], [], [], [], []
        for j, expansion in enumerate(self.expansions):
            for string, c in expansion.subterms:
                x_mask, zy_mask, n_y = string.masks()
                x_masks.append(x_mask)
                zy_masks.append(zy_mask)
                phases.append(1j**n_y)
                coeffs.append(c)
                owners.append(j)
        self.x_masks = np.array(x_masks, dtype=np.int64)
        self.zy_masks = np.array(zy_masks, dtype=np.int64)
        self.phases = np.array(phases, dtype=np.complex128)
        self.subterm_coefficients = np.array(coeffs, dtype=np.float64)
        self.parameter_index = np.array(owners, dtype=np.int64)

    @property
    def n_parameters(self) -> int:
        return len(self.expansions)

    @property
    def n_factors(self) -> int:
        return len(self.subterm_coefficients)

    def angles(self, t: np.ndarray) -> np.ndarray:
        """Rotation angles for one trotter slice at amplitudes t."""
        t = np.asarray(t, dtype=float)
        if t.shape != (self.n_parameters,):
            raise ValueError("amplitude vector does not match the ansatz")
        return self.subterm_coefficients * t[self.parameter_index]

    def apply_trotterized(self, state: Statevector, t: np.ndarray, rho: int) -> Statevector:
        slice_angles = self.angles(t) / rho
        for _ in range(rho):
            _kernels.apply_rotations(
                state.amplitudes, self.x_masks, self.zy_masks, self.phases,
                slice_angles,
            )
        return state

    def generator_matrix(self, t: np.ndarray) -> np.ndarray:
        """Dense anti-Hermitian sum_j t_j (tau_j - tau_j^dag)."""
        dim = 2**self.n_qubits
        idx = np.arange(dim, dtype=np.int64)
        matrix = np.zeros((dim, dim), dtype=np.complex128)
        angles = self.angles(t)
        for k in range(self.n_factors):
            if angles[k] == 0.0:
                continue
            signs = _parity_signs(idx, int(self.zy_masks[k]))
            matrix[idx ^ int(self.x_masks[k]), idx] += (
                1j * angles[k] * self.phases[k]
            ) * signs
        return matrix

    def apply_exact(self, state: Statevector, t: np.ndarray) -> Statevector:
        unitary = scipy.linalg.expm(self.generator_matrix(t))
        state.amplitudes[:] = unitary @ state.amplitudes
        return state

    def apply(self, state: Statevector, t: np.ndarray | None = None) -> Statevector:
        if t is None:
            t = self.ansatz.amplitudes
        if self.ansatz.mode == "exact":
            return self.apply_exact(state, t)
        return self.apply_trotterized(state, t, self.ansatz.trotter_number)


def apply_ucc(state: Statevector, ansatz: UccAnsatz, t: np.ndarray | None = None) -> Statevector:
    """Apply the UCC unitary at amplitudes t (defaults to the ansatz's own)."""
    compiled = CompiledAnsatz(ansatz, SystemInfo(state.n_qubits, 0))
    return compiled.apply(state, t)


# ---------------------------------------------------------------------------
# shot sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementPlan:
    """Per-term shot counts targeting an overall energy precision.

    Shots follow the coefficient-proportional allocation
    m_k = ceil(|h_k| * sum|h| * Var_k / eps^2) with the variance bound
    Var_k <= 1 unless explicit term variances are supplied.  The identity
    term costs nothing and gets zero shots.
    """

    epsilon: float
    shots: np.ndarray
    n_terms: int

    @classmethod
    def build(
        cls, operator: CompiledOperator, epsilon: float,
        variances: np.ndarray | None = None,
    ) -> "MeasurementPlan":
        if epsilon <= 0:
            raise ValueError("target precision must be positive")
        weights = np.abs(operator.coefficients)
        identity = operator.x_masks == 0
        identity &= operator.zy_masks == 0
        weights[identity] = 0.0
        lam = float(np.sum(weights))
        if variances is None:
            variances = np.ones_like(weights)
        raw = weights * lam * np.asarray(variances, dtype=float) / epsilon**2
        shots = np.ceil(raw).astype(np.int64)
        shots[(shots == 0) & (weights > 0)] = 1
        return cls(epsilon=epsilon, shots=shots, n_terms=len(weights))

    @property
    def total_shots(self) -> int:
        return int(np.sum(self.shots))


def sampled_expectation(
    state: Statevector, operator, plan: MeasurementPlan, rng: np.random.Generator
) -> tuple[float, int]:
    """Hamiltonian averaging with per-term binomial shot noise.

    Each Pauli term's expectation is estimated from m_k projective
    outcomes (+-1 with success probability (1 + <P_k>)/2); the identity
    contribution is added exactly.
    """
    compiled = _as_compiled(operator, state.n_qubits)
    if not compiled.is_hermitian:
        raise ValueError("sampled expectation requires a Hermitian operator")
    if plan.n_terms != len(compiled):
        raise ValueError("measurement plan does not match the operator")
    means = compiled.term_expectations(state)
    estimates = means.copy()  # zero-shot terms (the identity) enter exactly
    active = plan.shots > 0
    if np.any(active):
        p = np.clip((1.0 + means[active]) / 2.0, 0.0, 1.0)
        counts = rng.binomial(plan.shots[active], p)
        estimates[active] = 2.0 * counts / plan.shots[active] - 1.0
    value = float(np.sum(compiled.coefficients.real * estimates))
    return value, plan.total_shots


@dataclass(frozen=True)
class NoiseModel:
    """Control-error and shot-noise configuration for objective evaluations.

    control_sigma is the standard deviation of the Gaussian perturbation
    added to every circuit parameter at application time; shot_epsilon,
    when set, turns on Hamiltonian-averaging shot noise at that target
    precision.
    """

    control_sigma: float = 0.0
    shot_epsilon: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.control_sigma < 0:
            raise ValueError("control_sigma must be nonnegative")
        if self.shot_epsilon is not None and self.shot_epsilon <= 0:
            raise ValueError("shot_epsilon must be positive")

    @property
    def sampling(self) -> bool:
        return self.shot_epsilon is not None


def perturb(t: np.ndarray, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Gaussian control errors to the parameters."""
    t = np.asarray(t, dtype=float)
    if noise.control_sigma == 0.0:
        return t.copy()
    return t + rng.normal(0.0, noise.control_sigma, size=t.shape)


# ---------------------------------------------------------------------------
# exact diagonalization oracle
# ---------------------------------------------------------------------------


def _popcount(idx: np.ndarray) -> np.ndarray:
    v = idx.astype(np.int64)
    count = np.zeros_like(v)
    while np.any(v):
        count += v & 1
        v >>= 1
    return count


def fci_solve(operator, system: SystemInfo) -> tuple[float, Statevector]:
    """Lowest eigenvalue and eigenvector in the eta-electron sector.

    Builds the dense 2^N matrix, restricts to the basis states with the
    right particle number, and diagonalizes.  Degenerate ground states
    resolve to the eigenvector eigh reports first; its global phase is
    fixed by making the largest-magnitude amplitude real positive.
    """
    n = system.n_spin_orbitals
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
    compiled = _as_compiled(operator, n)
    matrix = compiled.dense_matrix()
    if not np.allclose(matrix, matrix.conj().T, atol=1e-10):
        raise ValueError("operator is not Hermitian")
    sector = np.nonzero(_popcount(np.arange(2**n)) == system.n_electrons)[0]
    block = matrix[np.ix_(sector, sector)]
    eigenvalues, eigenvectors = np.linalg.eigh(block)
    ground = eigenvectors[:, 0]
    pivot = int(np.argmax(np.abs(ground)))
    phase = ground[pivot] / abs(ground[pivot])
    ground = ground / phase
    amplitudes = np.zeros(2**n, dtype=np.complex128)
    amplitudes[sector] = ground
    return float(eigenvalues[0]), Statevector(amplitudes, n)
