"""Second-quantized operators and their compilation to qubit operators.

Builds the molecular Hamiltonian

    H = h_nuc + sum_pq h_pq a^dag_p a_q
             + 1/2 sum_pqrs h_pqrs a^dag_p a^dag_q a_r a_s

over spin orbitals and maps fermionic operators to Pauli strings with the
Jordan-Wigner transformation.  Spin orbitals are interleaved: even index
2k is the alpha spin of spatial orbital k, odd index 2k+1 the beta spin,
with spatial orbitals in ascending orbital-energy (canonical) order.  Under
this ordering the closed-shell reference occupies spin orbitals 0..eta-1.

Index convention for the two-body tensor: h_pqrs = <pq|sr>, i.e. the
chemist integral (p s|q r) with spin deltas delta(sp,ss)*delta(sq,sr),
paired with the operator order a^dag_p a^dag_q a_r a_s above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chem import MoIntegrals
from .pauli import PauliString, QubitOperator

# Ladder operators are products of (index, creation_flag) factors; the empty
# product holds the scalar part.
LadderTerm = tuple[tuple[int, bool], ...]

COEFF_PRUNE = 1e-12


@dataclass(frozen=True)
class SystemInfo:
    """Register bookkeeping: spin orbital count and electron count."""

    n_spin_orbitals: int
    n_electrons: int

    def __post_init__(self) -> None:
        if self.n_spin_orbitals < 0:
            raise ValueError("spin orbital count cannot be negative")
        if not 0 <= self.n_electrons <= self.n_spin_orbitals:
            raise ValueError(
                f"electron count {self.n_electrons} exceeds "
                f"{self.n_spin_orbitals} spin orbitals"
            )

    @property
    def occupied(self) -> range:
        return range(self.n_electrons)

    @property
    def virtual(self) -> range:
        return range(self.n_electrons, self.n_spin_orbitals)


class FermionOperator:
    """A real linear combination of products of ladder operators."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[LadderTerm, float] | None = None):
        self._terms: dict[LadderTerm, float] = dict(terms) if terms else {}

    @classmethod
    def from_term(cls, term: LadderTerm, coefficient: float) -> "FermionOperator":
        return cls({term: coefficient})

    @property
    def terms(self) -> dict[LadderTerm, float]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        terms = dict(self._terms)
        for term, coeff in other._terms.items():
            terms[term] = terms.get(term, 0.0) + coeff
        return FermionOperator(terms)

    def __mul__(self, scalar: float) -> "FermionOperator":
        return FermionOperator({t: c * scalar for t, c in self._terms.items()})

    __rmul__ = __mul__

    def hermitian_conjugate(self) -> "FermionOperator":
        terms: dict[LadderTerm, float] = {}
        for term, coeff in self._terms.items():
            conj = tuple((idx, not create) for idx, create in reversed(term))
            terms[conj] = terms.get(conj, 0.0) + coeff
        return FermionOperator(terms)


@dataclass(frozen=True)
class MolecularHamiltonian:
    """Spin-orbital integrals assembled for second quantization.

    Attributes:
        one_body: N x N matrix h_pq.
        two_body: N^4 tensor h_pqrs = <pq|sr> (see module docstring).
        constant: nuclear repulsion (plus any frozen-core shift).
        system: spin orbital / electron bookkeeping.
    """

    one_body: np.ndarray
    two_body: np.ndarray
    constant: float
    system: SystemInfo

    def __post_init__(self) -> None:
        n = self.system.n_spin_orbitals
        if self.one_body.shape != (n, n) or self.two_body.shape != (n, n, n, n):
            raise ValueError("integral tensor shapes do not match system size")


def spatial_to_spin_orbital(mo: MoIntegrals) -> MolecularHamiltonian:
    """Expand spatial MO integrals into interleaved spin orbitals.

    The chemist-convention spatial tensor (pq|rs) is rerouted into
    h_pqrs = <pq|sr>: the bra indices p,q sit on electrons 1,2 and the
    operator-ordered ket indices s,r close the same electrons, which brings
    in the spin selection rules delta(sp,ss) and delta(sq,sr).
    """
    n = mo.n_orbitals
    nso = 2 * n

    one = np.zeros((nso, nso))
    one[0::2, 0::2] = mo.h_spatial
    one[1::2, 1::2] = mo.h_spatial

    spin = np.arange(nso) % 2
    spatial = np.arange(nso) // 2
    same_spin = spin[:, None] == spin[None, :]
    # two[p,q,r,s] = (P S|Q R) * [sp==ss] * [sq==sr]
    chem = mo.eri_mo[np.ix_(spatial, spatial, spatial, spatial)]
    two = chem.transpose(0, 2, 3, 1) * (
        same_spin[:, None, None, :] * same_spin[None, :, :, None]
    )
    return MolecularHamiltonian(
        one_body=one,
        two_body=two,
        constant=mo.h_nuc,
        system=SystemInfo(nso, mo.n_electrons),
    )


def build_fermion_hamiltonian(mh: MolecularHamiltonian) -> FermionOperator:
    """Lay out the Hamiltonian as explicit ladder-operator terms."""
    terms: dict[LadderTerm, float] = {}
    if mh.constant != 0.0:
        terms[()] = mh.constant
    n = mh.system.n_spin_orbitals
    for p in range(n):
        for q in range(n):
            coeff = mh.one_body[p, q]
            if abs(coeff) > COEFF_PRUNE:
                terms[((p, True), (q, False))] = float(coeff)
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    coeff = mh.two_body[p, q, r, s]
                    if abs(coeff) > COEFF_PRUNE:
                        terms[((p, True), (q, True), (r, False), (s, False))] = (
                            0.5 * float(coeff)
                        )
    return FermionOperator(terms)


def _jordan_wigner_ladder(index: int, create: bool) -> QubitOperator:
    """JW image of a single ladder operator.

    a^dag_p -> 1/2 (X_p - i Y_p) Z_{p-1} ... Z_0, and the adjoint for a_p.
    """
    zs = tuple((q, "Z") for q in range(index))
    x_string = PauliString(zs + ((index, "X"),))
    y_string = PauliString(zs + ((index, "Y"),))
    sign = -1j if create else 1j
    return QubitOperator({x_string: 0.5, y_string: 0.5 * sign})


def jordan_wigner(op: FermionOperator) -> QubitOperator:
    """Compile a fermionic operator to a qubit operator.

    The Z parity string sits on indices below the target mode, so the
    occupation-number ordering of the register matches the bit ordering of
    the simulator (qubit q = bit q).  The result is simplified; Hermitian
    inputs compile to real coefficients.
    """
    result: dict[PauliString, complex] = {}
    for term, coeff in op.items():
        product = QubitOperator.identity(coeff)
        for index, create in term:
            product = product * _jordan_wigner_ladder(index, create)
        for string, value in product.items():
            result[string] = result.get(string, 0.0) + value
    return QubitOperator(result).simplify()


def compile_molecular_hamiltonian(mo: MoIntegrals) -> tuple[QubitOperator, SystemInfo]:
    """Convenience path from MO integrals to the qubit Hamiltonian."""
    mh = spatial_to_spin_orbital(mo)
    qubit_op = jordan_wigner(build_fermion_hamiltonian(mh))
    return qubit_op.real_coefficients(tol=1e-10), mh.system
