import numpy as np
import pytest

from uccvqe.chem import MoIntegrals
from uccvqe.fermion import (
    FermionOperator,
    MolecularHamiltonian,
    SystemInfo,
    build_fermion_hamiltonian,
    jordan_wigner,
    spatial_to_spin_orbital,
)
from uccvqe.pauli import PauliString, QubitOperator

from test_pauli import dense


def ladder_dense(index: int, create: bool, n: int) -> np.ndarray:
    """Independent dense Jordan-Wigner images for oracle checks."""
    op = jordan_wigner(FermionOperator.from_term(((index, create),), 1.0))
    return operator_dense(op, n)


def operator_dense(op: QubitOperator, n: int) -> np.ndarray:
    matrix = np.zeros((2**n, 2**n), dtype=complex)
    for string, coeff in op.items():
        matrix += coeff * dense(string, n)
    return matrix


def random_mo(n: int, seed: int = 0) -> MoIntegrals:
    """Symmetric fake integrals with the full 8-fold ERI symmetry."""
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n, n))
    h = 0.5 * (h + h.T)
    eri = rng.normal(size=(n, n, n, n))
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
        eri = 0.5 * (eri + eri.transpose(perm))
    # symmetrize over the full 8-element group
    group = [
        (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
        (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
    ]
    eri = sum(eri.transpose(p) for p in group) / 8.0
    return MoIntegrals(h_spatial=h, eri_mo=eri, h_nuc=0.3, n_orbitals=n, n_electrons=2)


class TestSpinOrbitalAssembly:
    def test_spin_selection_rule_one_orbital(self):
        mo = random_mo(1)
        mh = spatial_to_spin_orbital(mo)
        assert mh.system.n_spin_orbitals == 2
        assert mh.one_body[0, 1] == 0.0
        assert mh.one_body[1, 0] == 0.0

    def test_brute_force_index_oracle(self):
        mo = random_mo(2, seed=3)
        mh = spatial_to_spin_orbital(mo)
        n = 4
        expected = np.zeros((n, n, n, n))
        for p in range(n):
            for q in range(n):
                for r in range(n):
                    for s in range(n):
                        if p % 2 == s % 2 and q % 2 == r % 2:
                            expected[p, q, r, s] = mo.eri_mo[
                                p // 2, s // 2, q // 2, r // 2
                            ]
        assert np.allclose(mh.two_body, expected)

    def test_assembled_hamiltonian_is_hermitian(self):
        mh = spatial_to_spin_orbital(random_mo(3, seed=5))
        assert np.allclose(mh.one_body, mh.one_body.T)
        # hermiticity of the two-body operator: h_pqrs = h_srqp for real integrals
        assert np.allclose(mh.two_body, mh.two_body.transpose(3, 2, 1, 0), atol=1e-12)

    def test_electron_swap_consistency(self):
        mh = spatial_to_spin_orbital(random_mo(3, seed=8))
        assert np.allclose(mh.two_body, mh.two_body.transpose(1, 0, 3, 2), atol=1e-10)


class TestFermionHamiltonian:
    def test_identity_one_body_gives_number_operator(self):
        n_so = 4
        mh = MolecularHamiltonian(
            one_body=np.eye(n_so),
            two_body=np.zeros((n_so,) * 4),
            constant=0.0,
            system=SystemInfo(n_so, 2),
        )
        qubit_op = jordan_wigner(build_fermion_hamiltonian(mh))
        expected = QubitOperator.identity(n_so / 2)
        for q in range(n_so):
            expected = expected + QubitOperator.from_term(
                PauliString(((q, "Z"),)), -0.5
            )
        assert qubit_op.isclose(expected)

    def test_scalar_only(self):
        mh = MolecularHamiltonian(
            one_body=np.zeros((2, 2)),
            two_body=np.zeros((2, 2, 2, 2)),
            constant=1.25,
            system=SystemInfo(2, 2),
        )
        op = build_fermion_hamiltonian(mh)
        assert op.terms == {(): 1.25}

    def test_term_count_bound(self):
        mh = spatial_to_spin_orbital(random_mo(2, seed=2))
        op = build_fermion_hamiltonian(mh)
        n = mh.system.n_spin_orbitals
        assert len(op) <= n**2 + n**4 + 1


class TestJordanWigner:
    def test_number_operator_image(self):
        for p in range(3):
            op = jordan_wigner(
                FermionOperator.from_term(((p, True), (p, False)), 1.0)
            )
            expected = QubitOperator.identity(0.5) + QubitOperator.from_term(
                PauliString(((p, "Z"),)), -0.5
            )
            assert op.isclose(expected)

    def test_single_generator_pattern(self):
        # t (a^dag_a a_i - h.c.) -> (i t / 2) Z-string (Y_i X_a - X_i Y_a)
        t = 0.37
        i, a = 1, 4
        generator = FermionOperator(
            {((a, True), (i, False)): t, ((i, True), (a, False)): -t}
        )
        op = jordan_wigner(generator)
        zs = tuple((q, "Z") for q in range(i + 1, a))
        yx = PauliString.from_pairs(zs + ((i, "Y"), (a, "X")))
        xy = PauliString.from_pairs(zs + ((i, "X"), (a, "Y")))
        assert op.coefficient(yx) == pytest.approx(0.5j * t)
        assert op.coefficient(xy) == pytest.approx(-0.5j * t)
        assert len(op) == 2

    def test_double_generator_pattern(self):
        # eight subterms with coefficients +- t/8 and the fixed sign pattern
        t = 1.0
        i, j, a, b = 0, 1, 2, 3
        generator = FermionOperator(
            {
                ((b, True), (a, True), (j, False), (i, False)): t,
                ((i, True), (j, True), (a, False), (b, False)): -t,
            }
        )
        op = jordan_wigner(generator)
        assert len(op) == 8
        expected_signs = {
            "XXYX": 1, "YXYY": 1, "XYYY": 1, "XXXY": 1,
            "YXXX": -1, "XYXX": -1, "YYYX": -1, "YYXY": -1,
        }
        for pattern, sign in expected_signs.items():
            string = PauliString.from_pairs(zip((i, j, a, b), pattern))
            assert op.coefficient(string) == pytest.approx(sign * 1j * t / 8.0)

    def test_anticommutation_relations_as_matrices(self):
        n = 4
        for p in range(n):
            for q in range(n):
                ap = ladder_dense(p, False, n)
                aq = ladder_dense(q, False, n)
                aq_dag = ladder_dense(q, True, n)
                assert np.allclose(ap @ aq + aq @ ap, 0.0, atol=1e-12)
                expected = np.eye(2**n) if p == q else np.zeros((2**n, 2**n))
                assert np.allclose(
                    ap @ aq_dag + aq_dag @ ap, expected, atol=1e-12
                )

    def test_hermitian_input_gives_real_coefficients(self):
        mh = spatial_to_spin_orbital(random_mo(2, seed=9))
        op = jordan_wigner(build_fermion_hamiltonian(mh))
        assert op.is_hermitian(tol=1e-10)

    def test_number_operator_commutes_with_hamiltonian(self):
        mh = spatial_to_spin_orbital(random_mo(2, seed=4))
        hamiltonian = jordan_wigner(build_fermion_hamiltonian(mh))
        n = mh.system.n_spin_orbitals
        h_dense = operator_dense(hamiltonian, n)
        number = sum(
            ladder_dense(p, True, n) @ ladder_dense(p, False, n) for p in range(n)
        )
        commutator = h_dense @ number - number @ h_dense
        assert np.linalg.norm(commutator) < 1e-10
