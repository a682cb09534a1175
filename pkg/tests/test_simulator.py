import numpy as np
import pytest
import scipy.linalg

from uccvqe.ansatz import Excitation, UccAnsatz, generate_uccsd
from uccvqe.fermion import SystemInfo
from uccvqe.pauli import PauliString, QubitOperator
from uccvqe.simulator import (
    CapacityError,
    CompiledAnsatz,
    CompiledOperator,
    MeasurementPlan,
    NoiseModel,
    Statevector,
    apply_pauli_rotation,
    apply_ucc,
    expectation,
    fci_solve,
    hf_state,
    infidelity,
    perturb,
    sampled_expectation,
)

from test_pauli import dense


def random_state(n_qubits: int, seed: int = 0) -> Statevector:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return Statevector(amps / np.linalg.norm(amps), n_qubits)


class TestReferenceState:
    def test_two_electron_index(self):
        state = hf_state(SystemInfo(4, 2))
        assert state.amplitudes[0b0011] == 1.0
        assert np.sum(np.abs(state.amplitudes)) == 1.0

    def test_no_electrons(self):
        state = hf_state(SystemInfo(4, 0))
        assert state.amplitudes[0] == 1.0

    def test_occupation_expectation(self):
        system = SystemInfo(8, 4)
        state = hf_state(system)
        number = QubitOperator.identity(4.0)
        for q in range(8):
            number = number + QubitOperator.from_term(PauliString(((q, "Z"),)), -0.5)
        assert expectation(state, number) == pytest.approx(4.0, abs=1e-12)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            hf_state(SystemInfo(17, 2))


class TestPauliRotation:
    def test_zero_angle_identity(self):
        state = random_state(4, 1)
        before = state.amplitudes.copy()
        apply_pauli_rotation(state, PauliString.parse("X0 Y2"), 0.0)
        assert np.allclose(state.amplitudes, before)

    def test_half_pi_gives_i_times_pauli(self):
        string = PauliString.parse("X0 Z1 Y3")
        state = random_state(4, 2)
        expected = 1j * dense(string, 4) @ state.amplitudes
        apply_pauli_rotation(state, string, np.pi / 2)
        assert np.allclose(state.amplitudes, expected, atol=1e-12)

    def test_matches_dense_exponential(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = 5
            pairs = [(q, rng.choice(["X", "Y", "Z"])) for q in range(n) if rng.random() < 0.5]
            string = PauliString.from_pairs(pairs)
            theta = rng.normal()
            state = random_state(n, int(rng.integers(1 << 30)))
            expected = scipy.linalg.expm(1j * theta * dense(string, n)) @ state.amplitudes
            apply_pauli_rotation(state, string, theta)
            assert np.allclose(state.amplitudes, expected, atol=1e-12)

    def test_commuting_rotations_compose_order_independently(self):
        # two subterms of one double-excitation generator on 8 qubits
        system = SystemInfo(8, 4)
        from uccvqe.ansatz import expand_generator

        expansion = expand_generator(Excitation((0, 3), (4, 7)), system)
        (s1, _), (s2, _) = expansion.subterms[0], expansion.subterms[5]
        a = random_state(8, 3)
        b = Statevector(a.amplitudes.copy(), 8)
        apply_pauli_rotation(apply_pauli_rotation(a, s1, 0.3), s2, -0.7)
        apply_pauli_rotation(apply_pauli_rotation(b, s2, -0.7), s1, 0.3)
        assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_norm_preserved_over_random_sequences(self):
        rng = np.random.default_rng(11)
        state = random_state(6, 4)
        for _ in range(200):
            pairs = [(q, rng.choice(["X", "Y", "Z"])) for q in range(6) if rng.random() < 0.5]
            apply_pauli_rotation(state, PauliString.from_pairs(pairs), rng.normal())
        assert abs(state.norm() - 1.0) < 1e-9


class TestUccApplication:
    def test_zero_amplitudes_do_nothing(self):
        system = SystemInfo(4, 2)
        ansatz = UccAnsatz(excitations=tuple(generate_uccsd(system)))
        state = hf_state(system)
        apply_ucc(state, ansatz, np.zeros(ansatz.n_parameters))
        assert state.amplitudes[0b0011] == 1.0

    def test_single_generator_trotterization_is_exact(self):
        system = SystemInfo(4, 2)
        excitations = (Excitation((0, 1), (2, 3)),)
        t = np.array([0.23])
        trotterized = UccAnsatz(excitations=excitations, trotter_number=1)
        exact = UccAnsatz(excitations=excitations, mode="exact")
        a = apply_ucc(hf_state(system), trotterized, t)
        b = apply_ucc(hf_state(system), exact, t)
        assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_trotter_error_decreases_to_zero(self):
        system = SystemInfo(8, 4)
        pool = tuple(generate_uccsd(system))
        rng = np.random.default_rng(5)
        t = 0.05 * rng.normal(size=len(pool))
        exact_state = apply_ucc(
            hf_state(system), UccAnsatz(excitations=pool, mode="exact"), t
        )
        errors = []
        for rho in (1, 2, 4, 8, 16):
            state = apply_ucc(
                hf_state(system),
                UccAnsatz(excitations=pool, trotter_number=rho),
                t,
            )
            errors.append(infidelity(exact_state, state))
        assert errors[-1] < 1e-6
        assert errors[-1] < errors[0]
        # overall decreasing trend
        assert all(late <= early * 1.5 for early, late in zip(errors, errors[1:]))

    def test_norm_preserved(self):
        system = SystemInfo(8, 4)
        pool = tuple(generate_uccsd(system))
        rng = np.random.default_rng(9)
        t = rng.uniform(-1, 1, len(pool))
        state = apply_ucc(hf_state(system), UccAnsatz(excitations=pool), t)
        assert abs(state.norm() - 1.0) < 1e-9


class TestExpectation:
    def test_z_sign_convention(self):
        z0 = QubitOperator.from_term(PauliString.parse("Z0"))
        assert expectation(Statevector.basis_state(2, 0b00), z0) == pytest.approx(1.0)
        assert expectation(Statevector.basis_state(2, 0b01), z0) == pytest.approx(-1.0)

    def test_identity_returns_coefficient(self):
        state = random_state(3, 8)
        assert expectation(state, QubitOperator.identity(-2.5)) == pytest.approx(-2.5)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(13)
        n = 4
        terms = {}
        for _ in range(6):
            pairs = [(q, rng.choice(["X", "Y", "Z"])) for q in range(n) if rng.random() < 0.5]
            terms[PauliString.from_pairs(pairs)] = rng.normal()
        op = QubitOperator(terms)
        state = random_state(n, 21)
        matrix = sum(c * dense(s, n) for s, c in op.items())
        expected = np.real(np.vdot(state.amplitudes, matrix @ state.amplitudes))
        assert expectation(state, op) == pytest.approx(expected, abs=1e-12)

    def test_non_hermitian_rejected(self):
        op = QubitOperator.from_term(PauliString.parse("X0"), 1j)
        with pytest.raises(ValueError, match="Hermitian"):
            expectation(random_state(2, 1), op)


class TestSampling:
    def test_plan_allocation(self):
        op = QubitOperator(
            {
                PauliString(): 0.7,
                PauliString.parse("Z0"): 0.5,
                PauliString.parse("X0 X1"): -0.25,
            }
        )
        compiled = CompiledOperator(op, 2)
        plan = MeasurementPlan.build(compiled, epsilon=0.1)
        lam = 0.75
        shots = {
            str(s): m
            for (s, _), m in zip(
                sorted(op.items(), key=lambda kv: (kv[0].weight, kv[0].ops)),
                plan.shots,
            )
        }
        assert shots["I"] == 0
        assert shots["Z0"] == int(np.ceil(0.5 * lam / 0.01))
        assert shots["X0 X1"] == int(np.ceil(0.25 * lam / 0.01))
        assert plan.total_shots == shots["Z0"] + shots["X0 X1"]

    def test_eigenstate_zero_variance(self):
        # basis state is an eigenstate of every Z string: estimate is exact
        op = QubitOperator(
            {PauliString.parse("Z0"): 0.3, PauliString.parse("Z0 Z1"): -1.1}
        )
        compiled = CompiledOperator(op, 2)
        plan = MeasurementPlan.build(compiled, epsilon=1.0)
        state = Statevector.basis_state(2, 0b01)
        rng = np.random.default_rng(0)
        value, total = sampled_expectation(state, compiled, plan, rng)
        assert value == pytest.approx(expectation(state, op), abs=1e-14)
        assert total == plan.total_shots

    def test_unbiased_and_within_plan_precision(self):
        op = QubitOperator(
            {
                PauliString.parse("X0"): 0.8,
                PauliString.parse("Z0"): -0.6,
                PauliString.parse("Y0"): 0.4,
            }
        )
        compiled = CompiledOperator(op, 1)
        state = random_state(1, 33)
        exact = expectation(state, op)
        plan = MeasurementPlan.build(compiled, epsilon=0.05)
        values = []
        for seed in range(2000):
            value, _ = sampled_expectation(
                state, compiled, plan, np.random.default_rng(seed)
            )
            values.append(value)
        values = np.asarray(values)
        standard_error = values.std() / np.sqrt(len(values))
        assert abs(values.mean() - exact) < 4 * standard_error + 1e-12
        assert values.std() <= 0.05

    def test_determinism_per_rng_seed(self):
        op = QubitOperator({PauliString.parse("X0"): 1.0})
        compiled = CompiledOperator(op, 1)
        state = random_state(1, 5)
        plan = MeasurementPlan.build(compiled, epsilon=0.3)
        v1, _ = sampled_expectation(state, compiled, plan, np.random.default_rng(42))
        v2, _ = sampled_expectation(state, compiled, plan, np.random.default_rng(42))
        assert v1 == v2


class TestPerturb:
    def test_zero_sigma_identity(self):
        t = np.linspace(-1, 1, 7)
        out = perturb(t, NoiseModel(control_sigma=0.0), np.random.default_rng(0))
        assert np.array_equal(out, t)

    def test_moments(self):
        noise = NoiseModel(control_sigma=0.02)
        rng = np.random.default_rng(123)
        t = np.zeros(100000)
        draws = perturb(t, noise, rng)
        assert abs(draws.mean()) < 4 * 0.02 / np.sqrt(draws.size)
        assert draws.std() == pytest.approx(0.02, rel=0.05)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(control_sigma=-0.1)


class TestFciSolve:
    def test_scalar_operator(self):
        op = QubitOperator.identity(-0.75)
        energy, state = fci_solve(op, SystemInfo(2, 1))
        assert energy == pytest.approx(-0.75)
        assert abs(state.norm() - 1.0) < 1e-12

    def test_matches_full_spectrum_oracle(self):
        # independent route: diagonalize the full dense matrix without any
        # sector restriction and classify eigenvectors by particle number
        from uccvqe.fermion import build_fermion_hamiltonian, jordan_wigner, spatial_to_spin_orbital

        from test_fermion import random_mo

        mh = spatial_to_spin_orbital(random_mo(2, seed=17))
        hamiltonian = jordan_wigner(build_fermion_hamiltonian(mh)).real_coefficients(1e-10)
        n = mh.system.n_spin_orbitals
        compiled = CompiledOperator(hamiltonian, n)
        matrix = compiled.dense_matrix()
        eigenvalues, eigenvectors = np.linalg.eigh(matrix)
        counts = np.array([bin(k).count("1") for k in range(2**n)])
        expected = min(
            value
            for value, vector in zip(eigenvalues, eigenvectors.T)
            if abs(np.sum(counts * np.abs(vector) ** 2) - 2.0) < 1e-8
        )
        energy, state = fci_solve(hamiltonian, SystemInfo(n, 2))
        assert energy == pytest.approx(float(expected), abs=1e-10)
        outside = state.amplitudes[counts != 2]
        assert np.allclose(outside, 0.0)

    def test_h2_reference_value(self):
        from uccvqe.chem import (
            BOHR_PER_ANGSTROM,
            Geometry,
            basis_for_geometry,
            build_integrals,
            run_rhf,
            transform_to_mo,
        )
        from uccvqe.fermion import compile_molecular_hamiltonian

        geometry = Geometry(
            atoms=((1, (0.0, 0.0, 0.0)), (1, (0.0, 0.0, 0.7414 * BOHR_PER_ANGSTROM)))
        )
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        scf = run_rhf(tables, 2)
        hamiltonian, system = compile_molecular_hamiltonian(transform_to_mo(tables, scf))
        energy, _ = fci_solve(hamiltonian, system)
        assert energy == pytest.approx(-1.1373, abs=2e-3)
        assert energy <= scf.hf_energy

    def test_capacity(self):
        with pytest.raises(CapacityError):
            fci_solve(QubitOperator.identity(1.0), SystemInfo(17, 2))


class TestInfidelity:
    def test_identical_states(self):
        a = random_state(3, 1)
        assert infidelity(a, a) == 0.0

    def test_orthogonal_states(self):
        a = Statevector.basis_state(2, 0)
        b = Statevector.basis_state(2, 3)
        assert infidelity(a, b) == 1.0

    def test_global_phase_invariant(self):
        a = random_state(3, 2)
        b = Statevector(np.exp(0.73j) * a.amplitudes, 3)
        assert infidelity(a, b) == pytest.approx(0.0, abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            infidelity(random_state(2, 1), random_state(3, 1))
