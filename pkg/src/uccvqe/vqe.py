"""The variational loop: energy objective, analytical and central-difference
gradients, measurement-cost estimators, and the end-to-end run driver.

The analytical gradient treats the trotterized ansatz as a product of
Pauli rotations: the derivative with respect to amplitude t_j is

    dE/dt_j = 2 sum_i h_i sum_k c_jk Im <Phi0| V_jk^dag O_i U |Phi0>

where V_jk equals U with the bare string P_jk inserted at its rotation.
On hardware each imaginary part would come from an ancilla interference
circuit measured in the Y basis; the simulator evaluates the identical
quantity as a statevector inner product, sweeping one forward state and
one Hamiltonian-weighted state backwards through the rotation product.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ansatz import Excitation, UccAnsatz
from .fermion import SystemInfo
from .optimizers import (
    CountingObjective,
    OptimizerConfig,
    VqeResult,
    lbfgs,
    nelder_mead,
)
from .pauli import QubitOperator
from .simulator import (
    CompiledAnsatz,
    CompiledOperator,
    MeasurementPlan,
    NoiseModel,
    Statevector,
    expectation,
    hf_state,
    perturb,
    sampled_expectation,
)

CHEMICAL_ACCURACY_HARTREE = 1.59e-3
RANDOM_GUESS_BOUND = 0.25


@dataclass(frozen=True)
class GradientConfig:
    """How the objective's gradient is evaluated.

    ``sample_epsilon`` sets the per-component precision target when the
    analytical gradient is estimated under shot noise; with ``adaptive``
    on, each call instead targets one tenth of the previous gradient's
    norm (never below ``adaptive_floor``), so early iterations spend
    fewer measurements than the endgame.
    """

    mode: str = "analytical"
    step: float = 1e-6
    sample_epsilon: float | None = None
    adaptive: bool = False
    adaptive_floor: float = 1e-4

    def __post_init__(self) -> None:
        if self.mode not in ("analytical", "central_difference"):
            raise ValueError(f"unknown gradient mode {self.mode!r}")
        if self.mode == "central_difference" and self.step <= 0:
            raise ValueError("central differences need a positive step")
        if self.sample_epsilon is not None and self.sample_epsilon <= 0:
            raise ValueError("gradient sampling precision must be positive")
        if self.adaptive_floor <= 0:
            raise ValueError("adaptive precision floor must be positive")


class Objective:
    """Stateful energy functional E(t) with evaluation counters.

    Every stochastic element (control-error draw, shot sampling) is seeded
    from the noise model's seed together with a digest of the amplitude
    vector, so evaluating the same t under the same seed is reproducible
    bit-for-bit while distinct t get independent draws.
    """

    def __init__(
        self,
        hamiltonian: QubitOperator | CompiledOperator,
        ansatz: UccAnsatz,
        system: SystemInfo,
        noise: NoiseModel | None = None,
        gradient_config: GradientConfig | None = None,
    ):
        n = system.n_spin_orbitals
        self.hamiltonian = (
            hamiltonian
            if isinstance(hamiltonian, CompiledOperator)
            else CompiledOperator(hamiltonian, n)
        )
        if not self.hamiltonian.is_hermitian:
            raise ValueError("objective needs a Hermitian Hamiltonian")
        self.ansatz = ansatz
        self.system = system
        self.compiled_ansatz = CompiledAnsatz(ansatz, system)
        self.reference = hf_state(system)
        self.noise = noise or NoiseModel()
        self.gradient_config = gradient_config or GradientConfig()
        self.plan = (
            MeasurementPlan.build(self.hamiltonian, self.noise.shot_epsilon)
            if self.noise.sampling
            else None
        )
        self._n_energy = 0
        self._n_gradient = 0
        self._sampler: GradientSampler | None = None
        self._last_gradient_norm: float | None = None

    @property
    def n_parameters(self) -> int:
        return self.compiled_ansatz.n_parameters

    @property
    def energy_evaluations(self) -> int:
        return self._n_energy

    @property
    def gradient_calls(self) -> int:
        return self._n_gradient

    def _rng(self, tag: str, t: np.ndarray) -> np.random.Generator:
        digest = hashlib.blake2b(
            tag.encode() + np.ascontiguousarray(t, dtype=float).tobytes(),
            digest_size=16,
        ).digest()
        words = [int.from_bytes(digest[k : k + 4], "little") for k in range(0, 16, 4)]
        return np.random.default_rng(
            np.random.SeedSequence([self.noise.seed & 0xFFFFFFFF, *words])
        )

    def _applied_parameters(self, t: np.ndarray, tag: str) -> np.ndarray:
        if self.noise.control_sigma > 0:
            return perturb(t, self.noise, self._rng(tag, t))
        return np.asarray(t, dtype=float)

    def prepare(self, t: np.ndarray, noiseless: bool = False) -> Statevector:
        """Reference state with the UCC unitary applied at t."""
        applied = np.asarray(t, dtype=float) if noiseless else self._applied_parameters(t, "control")
        state = self.reference.copy()
        return self.compiled_ansatz.apply(state, applied)

    def energy(self, t: np.ndarray) -> float:
        """One objective evaluation under the configured noise."""
        self._n_energy += 1
        state = self.prepare(t)
        if self.plan is not None:
            value, _ = sampled_expectation(
                state, self.hamiltonian, self.plan, self._rng("shots", t)
            )
            return value
        return expectation(state, self.hamiltonian)

    def exact_energy(self, t: np.ndarray) -> float:
        """Noiseless, exact-expectation evaluation (no counters)."""
        return expectation(self.prepare(t, noiseless=True), self.hamiltonian)

    @property
    def gradient_energy_cost(self) -> int:
        """Energy evaluations one gradient call will spend."""
        if self.gradient_config.mode == "central_difference":
            return 2 * self.n_parameters
        return 0

    def gradient(self, t: np.ndarray) -> np.ndarray:
        if self.gradient_config.mode == "analytical":
            return self.analytical_gradient(t)
        return self.numerical_gradient(t, self.gradient_config.step)

    def analytical_gradient(self, t: np.ndarray) -> np.ndarray:
        """Gradient from the interference-circuit expression.

        Counts as one gradient call and zero energy evaluations.  Control
        errors, when enabled, perturb the parameters once per call; shot
        noise, when enabled, samples every interference circuit at the
        configured (optionally adaptive) per-component precision.
        """
        if self.ansatz.mode != "trotterized":
            raise ValueError(
                "analytical gradient is derived for the trotterized product "
                "form only; use central differences for the exact unitary"
            )
        self._n_gradient += 1
        t = np.asarray(t, dtype=float)
        applied = self._applied_parameters(t, "control-grad")
        if self.noise.sampling:
            grad, _ = self._sampled_analytical(t, applied)
        else:
            grad = _product_form_gradient(
                self.compiled_ansatz, self.hamiltonian, self.reference, applied,
                self.ansatz.trotter_number,
            )
        self._last_gradient_norm = float(np.linalg.norm(grad))
        return grad

    def gradient_sample_epsilon(self) -> float:
        """Per-component precision for the next sampled gradient."""
        config = self.gradient_config
        base = config.sample_epsilon
        if base is None and self.noise.shot_epsilon is not None:
            base = self.noise.shot_epsilon
        if base is None:
            raise ValueError("no sampling precision configured for the gradient")
        if config.adaptive and self._last_gradient_norm is not None:
            return max(config.adaptive_floor, 0.1 * self._last_gradient_norm)
        return base

    def _sampled_analytical(self, t, applied) -> tuple[np.ndarray, int]:
        if self._sampler is None:
            self._sampler = GradientSampler(
                self.hamiltonian, self.ansatz, self.system
            )
        epsilon_j = self.gradient_sample_epsilon()
        return self._sampler.sample_analytical(
            applied, epsilon_j, self._rng("grad-shots", t)
        )

    def numerical_gradient(self, t: np.ndarray, step: float) -> np.ndarray:
        """Central differences; costs two energy evaluations per component."""
        self._n_gradient += 1
        grad = central_difference_gradient(
            self.energy, np.asarray(t, dtype=float), step
        )
        self._last_gradient_norm = float(np.linalg.norm(grad))
        return grad


def central_difference_gradient(fn, t: np.ndarray, step: float) -> np.ndarray:
    """Symmetric-difference gradient of a scalar function of a vector."""
    if step <= 0:
        raise ValueError("central differences need a positive step")
    t = np.asarray(t, dtype=float)
    grad = np.zeros_like(t)
    for j in range(t.size):
        shift = np.zeros_like(t)
        shift[j] = step
        grad[j] = (fn(t + shift) - fn(t - shift)) / (2.0 * step)
    return grad


def _product_form_gradient(
    compiled: CompiledAnsatz,
    hamiltonian: CompiledOperator,
    reference: Statevector,
    t: np.ndarray,
    trotter_number: int,
) -> np.ndarray:
    """Reverse sweep over the rotation product.

    Forward: u = U(t)|ref>, w = H u.  Walking the factors backwards,
    undoing each rotation on both states, the inner product <phi|P_m|w>
    at factor m equals <Phi0|V_m^dag H U|Phi0>, so each factor adds
    2 * (c_m / rho) * Im(...) to its parameter's derivative.
    """
    rho = trotter_number
    base_angles = compiled.angles(t) / rho
    n_factors = compiled.n_factors

    u = reference.copy()
    for _ in range(rho):
        _kernels.apply_rotations(
            u.amplitudes, compiled.x_masks, compiled.zy_masks, compiled.phases,
            base_angles,
        )
    w = hamiltonian.apply(u)

    grad = np.zeros(compiled.n_parameters)
    neg = np.empty(1, dtype=np.float64)
    x1 = np.empty(1, dtype=np.int64)
    zy1 = np.empty(1, dtype=np.int64)
    ph1 = np.empty(1, dtype=np.complex128)
    for _ in range(rho):
        for m in range(n_factors - 1, -1, -1):
            x1[0] = compiled.x_masks[m]
            zy1[0] = compiled.zy_masks[m]
            ph1[0] = compiled.phases[m]
            neg[0] = -base_angles[m]
            _kernels.apply_rotations(u.amplitudes, x1, zy1, ph1, neg)
            _kernels.apply_rotations(w.amplitudes, x1, zy1, ph1, neg)
            value = _kernels.term_overlaps(u.amplitudes, w.amplitudes, x1, zy1, ph1)[0]
            grad[compiled.parameter_index[m]] += (
                2.0 * compiled.subterm_coefficients[m] / rho * value.imag
            )
    return grad


# ---------------------------------------------------------------------------
# measurement-cost estimators
# ---------------------------------------------------------------------------


def measurement_cost_energy(
    one_norm_value: float,
    epsilon: float,
    coefficients: np.ndarray | None = None,
    variances: np.ndarray | None = None,
) -> int:
    """Shots to reach energy precision epsilon by Hamiltonian averaging.

    The bound is ceil((sum|h|)^2 / eps^2).  When per-term coefficient
    magnitudes and variances are supplied, the exact-variance count
    sum|h| * sum_i |h_i| Var_i / eps^2 is returned instead.
    """
    if epsilon <= 0:
        raise ValueError("target precision must be positive")
    if coefficients is None:
        return int(math.ceil(one_norm_value**2 / epsilon**2))
    coefficients = np.abs(np.asarray(coefficients, dtype=float))
    if variances is None:
        variances = np.ones_like(coefficients)
    total = one_norm_value * float(np.sum(coefficients * variances)) / epsilon**2
    return int(math.ceil(total))


def measurement_cost_gradient(
    one_norm_value: float,
    epsilon_j: float,
    mode: str = "analytical",
    step: float | None = None,
    n_parameters: int | None = None,
) -> int:
    """Per-component shot bound for gradient estimation.

    Analytical interference circuits cost at most 4 (sum|h|)^2 / eps_j^2;
    central differences multiply that by 1/(2 delta)^2, so the two match
    exactly at delta = 0.5.  With ``n_parameters`` given, the full-vector
    bound is returned using the uniform split eps_j^2 = eps^2 / N_P.
    """
    if epsilon_j <= 0:
        raise ValueError("target precision must be positive")
    if mode == "analytical":
        constant = 4.0
    elif mode == "central_difference":
        if step is None or step <= 0:
            raise ValueError("central differences need a positive step")
        constant = 4.0 / (2.0 * step) ** 2
    else:
        raise ValueError(f"unknown gradient mode {mode!r}")
    per_component = constant * one_norm_value**2 / epsilon_j**2
    if n_parameters is None:
        return int(math.ceil(per_component))
    return int(math.ceil(n_parameters * per_component))


def gradient_shot_allocation(
    hamiltonian: CompiledOperator,
    subterm_coefficients: np.ndarray,
    epsilon_j: float,
    variances: np.ndarray | None = None,
) -> np.ndarray:
    """Per-circuit shots for one gradient component.

    Circuit (i, k) pairs Hamiltonian term i with ansatz subterm k; its
    allocation is ceil(4 sum|h| * |h_i| * |c_k| * Var_ik / eps_j^2), the
    |h|- and |c|-proportional split of the variance budget.
    """
    if epsilon_j <= 0:
        raise ValueError("target precision must be positive")
    h_abs = np.abs(hamiltonian.coefficients)
    identity = (hamiltonian.x_masks == 0) & (hamiltonian.zy_masks == 0)
    h_abs = np.where(identity, 0.0, h_abs)
    c_abs = np.abs(np.asarray(subterm_coefficients, dtype=float))
    weights = 4.0 * hamiltonian.one_norm * np.outer(h_abs, c_abs)
    if variances is not None:
        weights = weights * np.asarray(variances, dtype=float)
    shots = np.ceil(weights / epsilon_j**2).astype(np.int64)
    shots[(shots == 0) & (weights > 0)] = 1
    return shots


# ---------------------------------------------------------------------------
# shot-noise simulation of gradient estimation
# ---------------------------------------------------------------------------


class GradientSampler:
    """Simulates gradient estimation from finite measurement budgets.

    Works from the exact per-circuit interference values: for Hamiltonian
    term i and ansatz subterm factor m, mu[m, i] is the Y-basis ancilla
    expectation the interference circuit would measure, bounded by one in
    magnitude.  Sampling replaces each value by a binomial average over
    its allocated shots; allocations follow the coefficient-proportional
    split with the per-circuit variances 1 - mu^2.
    """

    def __init__(
        self,
        hamiltonian: CompiledOperator,
        ansatz: UccAnsatz,
        system: SystemInfo,
    ):
        if ansatz.mode != "trotterized":
            raise ValueError("gradient sampling applies to the trotterized form")
        self.hamiltonian = hamiltonian
        self.ansatz = ansatz
        self.system = system
        self.compiled = CompiledAnsatz(ansatz, system)
        self.rho = ansatz.trotter_number
        self.reference = hf_state(system)
        rho = self.rho
        self.x_masks = np.tile(self.compiled.x_masks, rho)
        self.zy_masks = np.tile(self.compiled.zy_masks, rho)
        self.phases = np.tile(self.compiled.phases, rho)
        self.factor_coeffs = np.tile(self.compiled.subterm_coefficients / rho, rho)
        self.factor_param = np.tile(self.compiled.parameter_index, rho)
        self.term_identity = (hamiltonian.x_masks == 0) & (hamiltonian.zy_masks == 0)
        self.h_real = hamiltonian.coefficients.real

    @classmethod
    def from_problem(cls, problem: "VqeProblem") -> "GradientSampler":
        return cls(problem.hamiltonian, problem.make_ansatz(), problem.system)

    @property
    def n_parameters(self) -> int:
        return self.compiled.n_parameters

    def _angles(self, t: np.ndarray) -> np.ndarray:
        return self.factor_coeffs * np.asarray(t, dtype=float)[self.factor_param]

    def prepare(self, t: np.ndarray) -> Statevector:
        state = self.reference.copy()
        _kernels.apply_rotations(
            state.amplitudes, self.x_masks, self.zy_masks, self.phases,
            self._angles(t),
        )
        return state

    def exact_gradient(self, t: np.ndarray) -> np.ndarray:
        return _product_form_gradient(
            self.compiled, self.hamiltonian, self.reference,
            np.asarray(t, dtype=float), self.rho,
        )

    def interference_values(self, t: np.ndarray) -> np.ndarray:
        """mu[m, i] = Im <ref| V_m^dag P_i U |ref> for every circuit.

        Computed with one forward pass and a joint backward sweep of the
        per-term states P_i U|ref>.
        """
        ham = self.hamiltonian
        u = self.prepare(t)
        n_terms = len(ham)
        dim = u.amplitudes.shape[0]
        rows = np.empty((n_terms, dim), dtype=np.complex128)
        _kernels.pauli_rows(rows, u.amplitudes, ham.x_masks, ham.zy_masks, ham.phases)

        angles = self._angles(t)
        n_factors = angles.shape[0]
        mu = np.empty((n_factors, n_terms))
        x1 = np.empty(1, dtype=np.int64)
        zy1 = np.empty(1, dtype=np.int64)
        ph1 = np.empty(1, dtype=np.complex128)
        neg = np.empty(1, dtype=np.float64)
        pauli_u = np.empty((1, dim), dtype=np.complex128)
        for m in range(n_factors - 1, -1, -1):
            x1[0] = self.x_masks[m]
            zy1[0] = self.zy_masks[m]
            ph1[0] = self.phases[m]
            neg[0] = -angles[m]
            _kernels.apply_rotations(u.amplitudes, x1, zy1, ph1, neg)
            _kernels.apply_rotations_batch(rows, x1, zy1, ph1, neg)
            _kernels.pauli_rows(pauli_u, u.amplitudes, x1, zy1, ph1)
            mu[m] = (rows @ np.conj(pauli_u[0])).imag
        return mu

    def gradient_from_values(self, values: np.ndarray) -> np.ndarray:
        """Assemble gradient components from (sampled) circuit values."""
        grad = np.zeros(self.n_parameters)
        weighted = values @ self.h_real  # sum_i h_i * value[m, i]
        for m in range(values.shape[0]):
            grad[self.factor_param[m]] += 2.0 * self.factor_coeffs[m] * weighted[m]
        return grad

    def sample_analytical(
        self, t: np.ndarray, epsilon_j: float, rng: np.random.Generator,
        mu: np.ndarray | None = None,
    ) -> tuple[np.ndarray, int]:
        """Sampled gradient and its realized total shot count."""
        if mu is None:
            mu = self.interference_values(t)
        h_abs = np.where(self.term_identity, 0.0, np.abs(self.h_real))
        lam = self.hamiltonian.one_norm
        c_abs = np.abs(self.factor_coeffs)
        variances = 1.0 - mu**2
        weights = 4.0 * lam * np.outer(c_abs, h_abs) * variances
        shots = np.ceil(weights / epsilon_j**2).astype(np.int64)
        estimates = mu.copy()
        active = shots > 0
        if np.any(active):
            p = np.clip((1.0 + mu[active]) / 2.0, 0.0, 1.0)
            counts = rng.binomial(shots[active], p)
            estimates[active] = 2.0 * counts / shots[active] - 1.0
        return self.gradient_from_values(estimates), int(shots.sum())

    def sample_numerical(
        self, t: np.ndarray, delta: float, epsilon_j: float,
        rng: np.random.Generator,
    ) -> tuple[np.ndarray, int]:
        """Sampled central-difference gradient.

        Each energy in a numerator is estimated to the precision
        sqrt(2) * delta * epsilon_j that propagates to epsilon_j in the
        component, with per-term shots from the exact-variance count.
        """
        t = np.asarray(t, dtype=float)
        epsilon_energy = math.sqrt(2.0) * delta * epsilon_j
        h_abs = np.where(self.term_identity, 0.0, np.abs(self.h_real))
        lam = self.hamiltonian.one_norm
        grad = np.zeros(self.n_parameters)
        total = 0

        def sampled_energy(point: np.ndarray) -> float:
            nonlocal total
            state = self.prepare(point)
            means = self.hamiltonian.term_expectations(state)
            variances = 1.0 - means**2
            shots = np.ceil(
                h_abs * lam * variances / epsilon_energy**2
            ).astype(np.int64)
            estimates = means.copy()
            active = shots > 0
            if np.any(active):
                p = np.clip((1.0 + means[active]) / 2.0, 0.0, 1.0)
                counts = rng.binomial(shots[active], p)
                estimates[active] = 2.0 * counts / shots[active] - 1.0
            total += int(shots.sum())
            return float(np.sum(self.h_real * estimates))

        for j in range(self.n_parameters):
            shift = np.zeros_like(t)
            shift[j] = delta
            grad[j] = (sampled_energy(t + shift) - sampled_energy(t - shift)) / (
                2.0 * delta
            )
        return grad, total


# ---------------------------------------------------------------------------
# run driver
# ---------------------------------------------------------------------------


@dataclass
class VqeProblem:
    """Everything one variational minimization needs."""

    hamiltonian: CompiledOperator
    system: SystemInfo
    excitations: tuple[Excitation, ...]
    mp2_guess: np.ndarray | None = None
    trotter_number: int = 1
    mode: str = "trotterized"
    fci_energy: float | None = None
    fci_state: Statevector | None = None
    hf_energy: float | None = None

    def make_ansatz(self) -> UccAnsatz:
        return UccAnsatz(
            excitations=tuple(self.excitations),
            trotter_number=self.trotter_number,
            mode=self.mode,
        )


def initial_guess(problem: VqeProblem, guess_mode: str, seed: int) -> np.ndarray:
    """random (uniform in [-0.25, 0.25]), zeros, or the MP2 estimate."""
    n = len(problem.excitations)
    if guess_mode == "zeros":
        return np.zeros(n)
    if guess_mode == "random":
        rng = np.random.default_rng(seed)
        return rng.uniform(-RANDOM_GUESS_BOUND, RANDOM_GUESS_BOUND, size=n)
    if guess_mode == "mp2":
        if problem.mp2_guess is None:
            raise ValueError("problem carries no MP2 guess")
        return np.array(problem.mp2_guess, dtype=float)
    raise ValueError(f"unknown guess mode {guess_mode!r}")


def run_vqe(
    problem: VqeProblem,
    guess_mode: str = "mp2",
    optimizer_config: OptimizerConfig | None = None,
    gradient_config: GradientConfig | None = None,
    noise: NoiseModel | None = None,
    seed: int = 0,
) -> VqeResult:
    """Build the guess, minimize, and report against the exact oracle.

    The returned result carries the optimizer's best evaluation; when the
    problem includes the exact-diagonalization solution, the overlap and
    infidelity of the noiseless state at the optimal amplitudes are filled
    in, along with its exact energy.
    """
    config = optimizer_config or OptimizerConfig()
    noise = noise if noise is not None else NoiseModel(seed=seed)
    objective = Objective(
        problem.hamiltonian,
        problem.make_ansatz(),
        problem.system,
        noise=noise,
        gradient_config=gradient_config,
    )
    t0 = initial_guess(problem, guess_mode, seed)
    if config.method == "nelder_mead":
        result = nelder_mead(objective, t0, config)
    else:
        result = lbfgs(objective, t0, config)

    result.exact_energy = objective.exact_energy(result.optimal_t)
    if problem.fci_state is not None:
        final_state = objective.prepare(result.optimal_t, noiseless=True)
        result.overlap = abs(final_state.overlap(problem.fci_state))
        result.infidelity = float(
            min(1.0, max(0.0, 1.0 - result.overlap**2))
        )
    return result
