"""UCCSD excitation pool, classical amplitude estimates, and the expansion
of each cluster generator into commuting Pauli subterms.

A rank-l generator tau - tau^dag compiles under Jordan-Wigner to
2^(2l-1) Pauli strings ("subterms") of equal weight whose coefficients sum
to one in absolute value; all subterms of one generator commute, so the
exponential factorizes exactly into a product of Pauli rotations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .fermion import MolecularHamiltonian, SystemInfo
from .pauli import PauliString, pauli_product


class DegenerateOrbitalError(ValueError):
    """Vanishing orbital-energy denominator in a perturbative amplitude."""


@dataclass(frozen=True)
class Excitation:
    """A single or double excitation from the reference determinant.

    Indices are spin orbitals: ``occupied`` below the electron-count
    boundary, ``virtual`` above it, each tuple in ascending order.
    """

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.occupied) != len(self.virtual) or len(self.occupied) not in (1, 2):
            raise ValueError("excitation must be rank 1 or 2")
        if tuple(sorted(self.occupied)) != self.occupied or tuple(
            sorted(self.virtual)
        ) != self.virtual:
            raise ValueError("excitation indices must be ascending")
        if set(self.occupied) & set(self.virtual):
            raise ValueError("occupied and virtual indices must be disjoint")

    @property
    def rank(self) -> int:
        return len(self.occupied)

    def __str__(self) -> str:
        occ = ",".join(map(str, self.occupied))
        virt = ",".join(map(str, self.virtual))
        return f"{occ}->{virt}"


@dataclass(frozen=True)
class GeneratorExpansion:
    """The Pauli subterms of (tau - tau^dag)/i for one excitation."""

    excitation: Excitation
    subterms: tuple[tuple[PauliString, float], ...]

    @property
    def n_subterms(self) -> int:
        return len(self.subterms)


@dataclass
class UccAnsatz:
    """State-preparation program: ordered excitations plus trotter config.

    The product order inside the trotterized unitary is the excitation
    order recorded here (first excitation applied first), repeated
    ``trotter_number`` times with angles scaled by 1/trotter_number.
    """

    excitations: tuple[Excitation, ...]
    amplitudes: np.ndarray = field(default=None)  # type: ignore[assignment]
    trotter_number: int = 1
    mode: str = "trotterized"

    def __post_init__(self) -> None:
        if self.amplitudes is None:
            self.amplitudes = np.zeros(len(self.excitations))
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        if self.amplitudes.shape != (len(self.excitations),):
            raise ValueError("amplitude vector must align with the excitation list")
        if self.trotter_number < 1:
            raise ValueError("trotter number must be >= 1")
        if self.mode not in ("trotterized", "exact"):
            raise ValueError(f"unknown ansatz mode {self.mode!r}")

    @property
    def n_parameters(self) -> int:
        return len(self.excitations)


def generate_uccsd(system: SystemInfo) -> list[Excitation]:
    """All spin-orbital singles and doubles from the reference.

    No spin-symmetry filtering is applied, so the count is
    C(N-eta,1)*C(eta,1) + C(N-eta,2)*C(eta,2).  Order is deterministic:
    singles first, then doubles, each lexicographic.
    """
    occ = list(system.occupied)
    virt = list(system.virtual)
    pool: list[Excitation] = []
    for i in occ:
        for a in virt:
            pool.append(Excitation((i,), (a,)))
    for idx_i, i in enumerate(occ):
        for j in occ[idx_i + 1 :]:
            for idx_a, a in enumerate(virt):
                for b in virt[idx_a + 1 :]:
                    pool.append(Excitation((i, j), (a, b)))
    return pool


def spin_orbital_energies(orbital_energies: np.ndarray) -> np.ndarray:
    """Duplicate spatial orbital energies onto interleaved spin orbitals."""
    return np.repeat(np.asarray(orbital_energies, dtype=float), 2)


def mp2_amplitudes(
    mh: MolecularHamiltonian,
    orbital_energies_so: np.ndarray,
    excitations: list[Excitation] | None = None,
) -> np.ndarray:
    """Second-order perturbative guesses for the cluster amplitudes.

    Singles are zero.  For a double (i,j) -> (a,b) the amplitude is the
    antisymmetrized two-electron integral over the orbital-energy
    denominator, signed so that the first-order wavefunction correction
    it generates through the rank-2 generator lowers the energy.

    Raises:
        DegenerateOrbitalError: if a denominator magnitude falls below
            1e-8; amplitudes are not regularized.
    """
    if excitations is None:
        excitations = generate_uccsd(mh.system)
    eps = np.asarray(orbital_energies_so, dtype=float)
    if eps.shape != (mh.system.n_spin_orbitals,):
        raise ValueError("need one orbital energy per spin orbital")
    h = mh.two_body
    t = np.zeros(len(excitations))
    for idx, exc in enumerate(excitations):
        if exc.rank != 2:
            continue
        i, j = exc.occupied
        a, b = exc.virtual
        den = eps[i] + eps[j] - eps[a] - eps[b]
        if abs(den) < 1e-8:
            raise DegenerateOrbitalError(
                f"orbital-energy denominator {den:.3e} for quartet "
                f"(i={i}, j={j}, a={a}, b={b})"
            )
        t[idx] = (h[i, j, a, b] - h[i, j, b, a]) / den
    return t


def screen(
    amplitudes: np.ndarray,
    excitations: list[Excitation],
    threshold: float,
) -> tuple[list[Excitation], np.ndarray]:
    """Drop doubles whose guess amplitude is below the threshold.

    Singles are always retained (the estimate only informs doubles).
    Order is preserved, so screening commutes with ansatz construction.
    """
    if threshold < 0:
        raise ValueError("screening threshold must be nonnegative")
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape != (len(excitations),):
        raise ValueError("amplitude vector must align with the excitation list")
    keep = [
        k
        for k, exc in enumerate(excitations)
        if exc.rank == 1 or abs(amplitudes[k]) >= threshold
    ]
    return [excitations[k] for k in keep], amplitudes[keep]


# Sign pattern of the eight rank-2 subterms on positions (i, j, a, b),
# with b > a > j > i; X/Y counts are both odd in every string.
_DOUBLE_PATTERN: tuple[tuple[int, str], ...] = (
    (+1, "XXYX"),
    (+1, "YXYY"),
    (+1, "XYYY"),
    (+1, "XXXY"),
    (-1, "YXXX"),
    (-1, "XYXX"),
    (-1, "YYYX"),
    (-1, "YYXY"),
)


def expand_generator(excitation: Excitation, system: SystemInfo) -> GeneratorExpansion:
    """Pauli subterms of (tau - tau^dag)/i with unit coefficient one-norm.

    Rank 1 gives two subterms with coefficients +-1/2 and a Z parity
    string between the two indices; rank 2 gives the eight strings of the
    fixed sign pattern with coefficients +-1/8 and Z strings inside each
    index pair.
    """
    n = system.n_spin_orbitals
    if max(excitation.virtual) >= n:
        raise ValueError("excitation indices exceed the register size")
    if excitation.rank == 1:
        (i,), (a,) = excitation.occupied, excitation.virtual
        zs = tuple((q, "Z") for q in range(i + 1, a))
        subterms = (
            (PauliString.from_pairs(zs + ((i, "Y"), (a, "X"))), 0.5),
            (PauliString.from_pairs(zs + ((i, "X"), (a, "Y"))), -0.5),
        )
    else:
        (i, j), (a, b) = excitation.occupied, excitation.virtual
        zs = tuple((q, "Z") for q in range(i + 1, j)) + tuple(
            (q, "Z") for q in range(a + 1, b)
        )
        subterms = tuple(
            (
                PauliString.from_pairs(
                    zs + tuple(zip((i, j, a, b), pattern))
                ),
                sign / 8.0,
            )
            for sign, pattern in _DOUBLE_PATTERN
        )
    return GeneratorExpansion(excitation=excitation, subterms=subterms)


def verify_subterm_commutativity(expansion: GeneratorExpansion) -> bool:
    """Check pairwise commutativity of an expansion's Pauli strings.

    Uses the product phases directly: A and B commute iff AB and BA carry
    the same phase.
    """
    strings = [s for s, _ in expansion.subterms]
    for idx, a in enumerate(strings):
        for b in strings[idx + 1 :]:
            phase_ab, _ = pauli_product(a, b)
            phase_ba, _ = pauli_product(b, a)
            if phase_ab != phase_ba:
                return False
    return True


@dataclass(frozen=True)
class ActiveSpaceSpec:
    """A CAS(eta_A, N_A) selection over spatial orbitals.

    ``frozen_occupied`` spatial orbitals stay doubly occupied and
    ``discarded_virtual`` stay empty; the remainder is the active space.
    """

    n_active_electrons: int
    n_active_orbitals: int
    frozen_occupied: tuple[int, ...] = ()
    discarded_virtual: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n_active_electrons < 0 or self.n_active_orbitals < 0:
            raise ValueError("active-space sizes must be nonnegative")
        if self.n_active_electrons > 2 * self.n_active_orbitals:
            raise ValueError("active electrons exceed active-space capacity")
        if set(self.frozen_occupied) & set(self.discarded_virtual):
            raise ValueError("an orbital cannot be both frozen and discarded")

    @classmethod
    def from_counts(
        cls, n_electrons: int, n_orbitals: int, n_active_electrons: int,
        n_active_orbitals: int,
    ) -> "ActiveSpaceSpec":
        """Default selection: freeze the lowest occupied spatial orbitals,
        discard the highest virtuals."""
        if n_electrons % 2 or (n_electrons - n_active_electrons) % 2:
            raise ValueError("open-shell frozen cores are unsupported")
        n_frozen = (n_electrons - n_active_electrons) // 2
        if n_frozen < 0:
            raise ValueError("more active electrons than electrons")
        n_discard = n_orbitals - n_frozen - n_active_orbitals
        if n_discard < 0:
            raise ValueError("active space larger than the orbital basis")
        return cls(
            n_active_electrons=n_active_electrons,
            n_active_orbitals=n_active_orbitals,
            frozen_occupied=tuple(range(n_frozen)),
            discarded_virtual=tuple(range(n_orbitals - n_discard, n_orbitals)),
        )


def cas_reduce(
    mh: MolecularHamiltonian, spec: ActiveSpaceSpec
) -> tuple[MolecularHamiltonian, float]:
    """Fold a frozen core into an effective active-space Hamiltonian.

    The frozen determinant is integrated out analytically: its energy
    becomes a scalar shift (absorbed into the returned Hamiltonian's
    constant and also returned separately) and its mean field dresses the
    active one-body integrals with Coulomb-minus-exchange terms.
    """
    system = mh.system
    if system.n_electrons % 2:
        raise ValueError("open-shell frozen cores are unsupported")
    n_spatial = system.n_spin_orbitals // 2
    n_occ_spatial = system.n_electrons // 2
    for f in spec.frozen_occupied:
        if not 0 <= f < n_occ_spatial:
            raise ValueError(f"frozen orbital {f} is not doubly occupied in the reference")
    for v in spec.discarded_virtual:
        if not n_occ_spatial <= v < n_spatial:
            raise ValueError(f"discarded orbital {v} is not virtual in the reference")

    frozen_so = sorted(q for f in spec.frozen_occupied for q in (2 * f, 2 * f + 1))
    removed = set(frozen_so) | {
        q for v in spec.discarded_virtual for q in (2 * v, 2 * v + 1)
    }
    active_so = [q for q in range(system.n_spin_orbitals) if q not in removed]
    if len(active_so) != 2 * spec.n_active_orbitals:
        raise ValueError("active orbital count inconsistent with frozen/discarded lists")
    if system.n_electrons - len(frozen_so) != spec.n_active_electrons:
        raise ValueError("active electron count inconsistent with frozen list")

    h1, h2 = mh.one_body, mh.two_body
    shift = mh.constant
    shift += float(sum(h1[f, f] for f in frozen_so))
    shift += 0.5 * float(
        sum(h2[f, g, g, f] - h2[f, g, f, g] for f in frozen_so for g in frozen_so)
    )

    idx = np.array(active_so, dtype=int)
    dressed = h1[np.ix_(idx, idx)].copy()
    for f in frozen_so:
        dressed += h2[np.ix_(idx, [f], [f], idx)][:, 0, 0, :]
        dressed -= h2[np.ix_(idx, [f], idx, [f])][:, 0, :, 0]
    active_two = h2[np.ix_(idx, idx, idx, idx)].copy()

    active = MolecularHamiltonian(
        one_body=dressed,
        two_body=active_two,
        constant=shift,
        system=SystemInfo(len(active_so), spec.n_active_electrons),
    )
    return active, shift


def write_manifest(ansatz: UccAnsatz) -> str:
    """Serialize an ansatz (excitations, amplitudes, trotter config) to text."""
    out = io.StringIO()
    out.write(f"mode {ansatz.mode}\n")
    out.write(f"trotter {ansatz.trotter_number}\n")
    for exc, amp in zip(ansatz.excitations, ansatz.amplitudes):
        indices = " ".join(map(str, (*exc.occupied, *exc.virtual)))
        kind = "single" if exc.rank == 1 else "double"
        out.write(f"{kind} {indices} {float(amp)!r}\n")
    return out.getvalue()


def read_manifest(text: str) -> UccAnsatz:
    mode = "trotterized"
    trotter = 1
    excitations: list[Excitation] = []
    amplitudes: list[float] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            if fields[0] == "mode":
                mode = fields[1]
            elif fields[0] == "trotter":
                trotter = int(fields[1])
            elif fields[0] == "single":
                i, a = int(fields[1]), int(fields[2])
                excitations.append(Excitation((i,), (a,)))
                amplitudes.append(float(fields[3]))
            elif fields[0] == "double":
                i, j, a, b = (int(v) for v in fields[1:5])
                excitations.append(Excitation((i, j), (a, b)))
                amplitudes.append(float(fields[5]))
            else:
                raise ValueError(f"unknown record {fields[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad manifest line {lineno}: {line!r}") from exc
    return UccAnsatz(
        excitations=tuple(excitations),
        amplitudes=np.array(amplitudes),
        trotter_number=trotter,
        mode=mode,
    )
