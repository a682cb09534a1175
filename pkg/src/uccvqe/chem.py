"""Molecular integrals over s-type Gaussians, restricted Hartree-Fock, and
the transformation to the molecular-orbital basis.

Everything works in atomic units internally (lengths in bohr, energies in
hartree).  Only s-type contracted Gaussians are supported; richer basis
sets enter through FCIDUMP ingestion instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

logger = logging.getLogger(__name__)

BOHR_PER_ANGSTROM = 1.8897259886

# Published STO-nG hydrogen s exponents/coefficients (zeta = 1.24 scaling
# already applied, coefficients for normalized primitives).
HYDROGEN_BASES: dict[str, tuple[tuple[float, float], ...]] = {
    "sto-3g": (
        (3.42525091, 0.15432897),
        (0.62391373, 0.53532814),
        (0.16885540, 0.44463454),
    ),
    "sto-6g": (
        (35.52322122, 0.00916359628),
        (6.513143725, 0.04936149294),
        (1.822142904, 0.16853830490),
        (0.625955266, 0.37056279970),
        (0.243076747, 0.41649152980),
        (0.100112428, 0.13033408410),
    ),
}


class UnsupportedBasisError(ValueError):
    """Raised for shells or elements the integral engine cannot handle."""


class ScfConvergenceError(RuntimeError):
    """Raised when downstream steps require a converged SCF solution."""


@dataclass(frozen=True)
class Geometry:
    """Nuclear frame: charges and positions in bohr."""

    atoms: tuple[tuple[int, tuple[float, float, float]], ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("geometry needs at least one atom")
        positions = [np.asarray(pos) for _, pos in self.atoms]
        for charge, _ in self.atoms:
            if charge <= 0:
                raise ValueError("nuclear charges must be positive integers")
        for i in range(len(positions)):
            for j in range(i + 1, len(positions)):
                if np.allclose(positions[i], positions[j], atol=1e-12):
                    raise ValueError(f"atoms {i} and {j} coincide")

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def nuclear_repulsion(self) -> float:
        """Pairwise Z_i Z_j / |R_i - R_j| sum."""
        energy = 0.0
        for i, (zi, ri) in enumerate(self.atoms):
            for zj, rj in self.atoms[i + 1 :]:
                energy += zi * zj / float(np.linalg.norm(np.subtract(ri, rj)))
        return energy


@dataclass(frozen=True)
class ContractedGaussian:
    """An s-type contracted Gaussian: sum_k c_k exp(-alpha_k |r - center|^2).

    Coefficients are interpreted relative to normalized primitives; the
    contraction is renormalized to unit self-overlap on construction.
    """

    center: tuple[float, float, float]
    primitives: tuple[tuple[float, float], ...]
    _norm: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if not self.primitives:
            raise UnsupportedBasisError("contraction needs at least one primitive")
        if any(alpha <= 0 for alpha, _ in self.primitives):
            raise UnsupportedBasisError("primitive exponents must be positive")
        overlap = 0.0
        for a, ca in self.primitives:
            for b, cb in self.primitives:
                overlap += (
                    ca * cb * _prim_norm(a) * _prim_norm(b)
                    * (math.pi / (a + b)) ** 1.5
                )
        object.__setattr__(self, "_norm", 1.0 / math.sqrt(overlap))

    def contraction(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponents and fully normalized contraction coefficients."""
        alphas = np.array([a for a, _ in self.primitives])
        coeffs = np.array(
            [c * _prim_norm(a) * self._norm for a, c in self.primitives]
        )
        return alphas, coeffs


def _prim_norm(alpha: float) -> float:
    return (2.0 * alpha / math.pi) ** 0.75


def hydrogen_basis(name: str, center) -> ContractedGaussian:
    try:
        primitives = HYDROGEN_BASES[name.lower()]
    except KeyError:
        raise UnsupportedBasisError(f"unknown basis set {name!r}") from None
    return ContractedGaussian(tuple(float(x) for x in center), primitives)


def basis_for_geometry(geometry: Geometry, name: str) -> list[ContractedGaussian]:
    """One s contraction per atom; hydrogen only."""
    shells = []
    for charge, position in geometry.atoms:
        if charge != 1:
            raise UnsupportedBasisError(
                f"built-in bases cover hydrogen only (got Z={charge}); "
                "ingest an FCIDUMP file for other elements"
            )
        shells.append(hydrogen_basis(name, position))
    return shells


@dataclass(frozen=True)
class IntegralTables:
    """Atomic-orbital integrals: overlap, kinetic, nuclear attraction, ERI.

    The two-electron tensor is stored dense in chemist notation (pq|rs)
    with its full 8-fold permutational symmetry.
    """

    S: np.ndarray
    T_kin: np.ndarray
    V_nuc: np.ndarray
    eri: np.ndarray
    h_nuc: float

    @property
    def n_orbitals(self) -> int:
        return self.S.shape[0]

    def core_hamiltonian(self) -> np.ndarray:
        return self.T_kin + self.V_nuc


@dataclass(frozen=True)
class ScfResult:
    """Restricted Hartree-Fock output in the atomic-orbital basis."""

    mo_coefficients: np.ndarray
    orbital_energies: np.ndarray
    hf_energy: float
    converged: bool
    iterations: int
    n_electrons: int


@dataclass(frozen=True)
class MoIntegrals:
    """Core Hamiltonian and ERIs in the molecular-orbital basis."""

    h_spatial: np.ndarray
    eri_mo: np.ndarray
    h_nuc: float
    n_orbitals: int
    n_electrons: int


def boys_f0(x: float) -> float:
    """The zeroth Boys function F0(x) = integral_0^1 exp(-x t^2) dt.

    Closed form (1/2) sqrt(pi/x) erf(sqrt(x)) for x > 0; the x -> 0 limit
    is handled with the Taylor series to keep full precision.
    """
    if x < 0:
        raise ValueError(f"boys_f0 requires x >= 0, got {x}")
    if x < 1e-12:
        return 1.0 - x / 3.0
    return 0.5 * math.sqrt(math.pi / x) * math.erf(math.sqrt(x))


def build_integrals(
    geometry: Geometry, basis: list[ContractedGaussian]
) -> IntegralTables:
    """Fill all AO integral tables for an s-type basis.

    Uses the Gaussian product theorem; Coulomb-type integrals reduce to the
    Boys function F0.
    """
    if not basis:
        raise UnsupportedBasisError("empty basis")
    n = len(basis)
    centers = np.array([shell.center for shell in basis])
    contractions = [shell.contraction() for shell in basis]

    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    charges = np.array([float(z) for z, _ in geometry.atoms])
    nuclei = np.array([pos for _, pos in geometry.atoms])

    for i in range(n):
        ai, ci = contractions[i]
        for j in range(i, n):
            aj, cj = contractions[j]
            rij2 = float(np.sum((centers[i] - centers[j]) ** 2))
            p = ai[:, None] + aj[None, :]
            mu = ai[:, None] * aj[None, :] / p
            pref = ci[:, None] * cj[None, :] * np.exp(-mu * rij2)
            gauss = (np.pi / p) ** 1.5
            S[i, j] = S[j, i] = float(np.sum(pref * gauss))
            T[i, j] = T[j, i] = float(
                np.sum(pref * gauss * mu * (3.0 - 2.0 * mu * rij2))
            )
            # product centers, one per primitive pair
            pc = (
                ai[:, None, None] * centers[i][None, None, :]
                + aj[None, :, None] * centers[j][None, None, :]
            ) / p[:, :, None]
            v = 0.0
            for z, rn in zip(charges, nuclei):
                t = p * np.sum((pc - rn[None, None, :]) ** 2, axis=2)
                f0 = _boys_f0_array(t)
                v -= z * float(np.sum(pref * (2.0 * np.pi / p) * f0))
            V[i, j] = V[j, i] = v

    eri = np.zeros((n, n, n, n))
    for i in range(n):
        ai, ci = contractions[i]
        for j in range(i + 1):
            aj, cj = contractions[j]
            rij2 = float(np.sum((centers[i] - centers[j]) ** 2))
            p = ai[:, None] + aj[None, :]
            kab = ci[:, None] * cj[None, :] * np.exp(
                -ai[:, None] * aj[None, :] / p * rij2
            )
            pc = (
                ai[:, None, None] * centers[i][None, None, :]
                + aj[None, :, None] * centers[j][None, None, :]
            ) / p[:, :, None]
            for k in range(i + 1):
                ak, ck = contractions[k]
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    al, cl = contractions[l]
                    rkl2 = float(np.sum((centers[k] - centers[l]) ** 2))
                    q = ak[:, None] + al[None, :]
                    kcd = ck[:, None] * cl[None, :] * np.exp(
                        -ak[:, None] * al[None, :] / q * rkl2
                    )
                    qc = (
                        ak[:, None, None] * centers[k][None, None, :]
                        + al[None, :, None] * centers[l][None, None, :]
                    ) / q[:, :, None]
                    pq2 = np.sum(
                        (pc[:, :, None, None, :] - qc[None, None, :, :, :]) ** 2,
                        axis=4,
                    )
                    pp = p[:, :, None, None]
                    qq = q[None, None, :, :]
                    t = pp * qq / (pp + qq) * pq2
                    value = float(
                        np.sum(
                            kab[:, :, None, None]
                            * kcd[None, None, :, :]
                            * 2.0
                            * np.pi**2.5
                            / (pp * qq * np.sqrt(pp + qq))
                            * _boys_f0_array(t)
                        )
                    )
                    for a, b in ((i, j), (j, i)):
                        for c, d in ((k, l), (l, k)):
                            eri[a, b, c, d] = value
                            eri[c, d, a, b] = value

    return IntegralTables(
        S=S, T_kin=T, V_nuc=V, eri=eri, h_nuc=geometry.nuclear_repulsion()
    )


def _boys_f0_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 1e-12
    out[small] = 1.0 - x[small] / 3.0
    xs = x[~small]
    out[~small] = 0.5 * np.sqrt(np.pi / xs) * erf(np.sqrt(xs))
    return out


# SCF controls: tight fixed-point iteration with static density damping.
# The damping ladder starts light and retries heavier when the iteration
# oscillates (compressed geometries need more than 0.3).
SCF_MAX_ITERATIONS = 200
SCF_ENERGY_TOL = 1e-10
SCF_DENSITY_TOL = 1e-8
SCF_DAMPING_LADDER = (0.3, 0.5, 0.7)


def run_rhf(tables: IntegralTables, n_electrons: int) -> ScfResult:
    """Closed-shell SCF via symmetric orthogonalization and damping.

    Degenerate orbitals are ordered deterministically (ascending energy,
    then first significant coefficient made positive) so that occupations
    are reproducible at symmetric geometries.  A non-convergent result is
    returned flagged, never raised.
    """
    if n_electrons % 2 != 0 or n_electrons < 0:
        raise ValueError("restricted HF needs an even, nonnegative electron count")
    n = tables.n_orbitals
    n_occ = n_electrons // 2
    if n_occ > n:
        raise ValueError("more electron pairs than orbitals")

    s_vals, s_vecs = np.linalg.eigh(tables.S)
    if s_vals.min() <= 0:
        raise ValueError("overlap matrix is not positive definite")
    X = s_vecs @ np.diag(s_vals**-0.5) @ s_vecs.T
    hcore = tables.core_hamiltonian()

    def diagonalize(fock: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        eps, cprime = np.linalg.eigh(X.T @ fock @ X)
        C = X @ cprime
        return eps, _fix_column_signs(C)

    if n_electrons == 0:
        eps, C = diagonalize(hcore)
        return ScfResult(C, eps, tables.h_nuc, True, 0, 0)

    total_iterations = 0
    result = None
    for damping in SCF_DAMPING_LADDER:
        density = np.zeros((n, n))
        energy = 0.0
        converged = False
        eps = np.zeros(n)
        C = np.eye(n)
        for iteration in range(1, SCF_MAX_ITERATIONS + 1):
            fock = hcore + _two_electron_fock(tables.eri, density)
            eps, C = diagonalize(fock)
            occ = C[:, :n_occ]
            new_density = 2.0 * occ @ occ.T
            if iteration > 1:
                new_density = (1.0 - damping) * new_density + damping * density
            fock_new = hcore + _two_electron_fock(tables.eri, new_density)
            new_energy = 0.5 * float(np.sum(new_density * (hcore + fock_new)))
            delta_e = new_energy - energy
            delta_d = float(np.max(np.abs(new_density - density)))
            if iteration > 1 and delta_e > 1e-9:
                logger.debug(
                    "SCF energy rose by %.3e at iteration %d (damping %.2f)",
                    delta_e, iteration, damping,
                )
            density, energy = new_density, new_energy
            if iteration > 1 and abs(delta_e) < SCF_ENERGY_TOL and delta_d < SCF_DENSITY_TOL:
                converged = True
                break
        total_iterations += iteration
        result = ScfResult(
            mo_coefficients=C,
            orbital_energies=eps,
            hf_energy=energy + tables.h_nuc,
            converged=converged,
            iterations=total_iterations,
            n_electrons=n_electrons,
        )
        if converged:
            return result
        logger.warning(
            "SCF not converged after %d iterations at damping %.2f",
            SCF_MAX_ITERATIONS, damping,
        )
    return result


def _two_electron_fock(eri: np.ndarray, density: np.ndarray) -> np.ndarray:
    coulomb = np.einsum("pqrs,rs->pq", eri, density)
    exchange = np.einsum("prqs,rs->pq", eri, density)
    return coulomb - 0.5 * exchange


def _fix_column_signs(C: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    C = C.copy()
    for col in range(C.shape[1]):
        for value in C[:, col]:
            if abs(value) > tol:
                if value < 0:
                    C[:, col] = -C[:, col]
                break
    return C


def transform_to_mo(tables: IntegralTables, scf: ScfResult) -> MoIntegrals:
    """Rotate the AO integrals into the molecular-orbital basis."""
    if not scf.converged:
        raise ScfConvergenceError("cannot transform on an unconverged SCF solution")
    C = scf.mo_coefficients
    if C.shape[0] != tables.n_orbitals:
        raise ValueError("MO coefficient shape does not match integral tables")
    h_mo = C.T @ tables.core_hamiltonian() @ C
    eri_mo = np.einsum("pi,pqrs->iqrs", C, tables.eri, optimize=True)
    eri_mo = np.einsum("qj,iqrs->ijrs", C, eri_mo, optimize=True)
    eri_mo = np.einsum("rk,ijrs->ijks", C, eri_mo, optimize=True)
    eri_mo = np.einsum("sl,ijks->ijkl", C, eri_mo, optimize=True)
    return MoIntegrals(
        h_spatial=h_mo,
        eri_mo=eri_mo,
        h_nuc=tables.h_nuc,
        n_orbitals=tables.n_orbitals,
        n_electrons=scf.n_electrons,
    )


H4_FIXED_SIDE_ANGSTROM = 2.0


def h4_geometry(path_kind: str, parameter: float) -> Geometry:
    """Place four hydrogens on one of the benchmark distortion paths.

    All paths keep the intramolecular H-H distance d = 2.0 angstrom fixed:

    * ``rectangular``: two parallel H2 units (bond d) separated by r.
    * ``trapezoidal``: isosceles trapezoid with the three consecutive
      H-H bonds equal to d and interior angle theta (degrees); theta=90
      is the square, theta=180 the equally spaced collinear chain.
    * ``linear``: two collinear H2 units (bond d) with end-to-end gap r,
      i.e. spacings (d, r, d) along the axis.

    Parameters are r in angstrom within [0.6, 5.0] or theta in degrees
    within [90, 180]; output positions are in bohr.
    """
    d = H4_FIXED_SIDE_ANGSTROM * BOHR_PER_ANGSTROM
    kind = path_kind.lower()
    if kind in ("rectangular", "rect", "parallel"):
        r = _check_range("r", parameter, 0.6, 5.0) * BOHR_PER_ANGSTROM
        positions = [(0.0, 0.0), (0.0, d), (r, 0.0), (r, d)]
        label = f"h4-rectangular-r{parameter:g}"
    elif kind in ("trapezoidal", "trap"):
        theta = math.radians(_check_range("theta", parameter, 90.0, 180.0))
        positions = [
            (d * math.cos(theta), d * math.sin(theta)),
            (0.0, 0.0),
            (d, 0.0),
            (d - d * math.cos(theta), d * math.sin(theta)),
        ]
        label = f"h4-trapezoidal-theta{parameter:g}"
        if abs(parameter - 180.0) < 1e-9:
            label += "-collinear"
    elif kind in ("linear", "lin"):
        r = _check_range("r", parameter, 0.6, 5.0) * BOHR_PER_ANGSTROM
        positions = [(0.0, 0.0), (d, 0.0), (d + r, 0.0), (2 * d + r, 0.0)]
        label = f"h4-linear-r{parameter:g}"
    else:
        raise ValueError(f"unknown H4 path kind {path_kind!r}")
    atoms = tuple((1, (float(x), float(y), 0.0)) for x, y in positions)
    return Geometry(atoms=atoms, label=label)


def _check_range(name: str, value: float, low: float, high: float) -> float:
    if not low <= value <= high:
        raise ValueError(f"{name}={value} outside [{low}, {high}]")
    return float(value)


def read_geometry_file(path) -> Geometry:
    """Parse a plain-text geometry: a units header line (``bohr`` or
    ``angstrom``) followed by one ``Z x y z`` line per atom."""
    with open(path) as handle:
        lines = [
            line.strip()
            for line in handle
            if line.strip() and not line.strip().startswith("#")
        ]
    if not lines:
        raise ValueError(f"{path}: empty geometry file")
    unit = lines[0].lower()
    if unit not in ("bohr", "angstrom"):
        raise ValueError(f"{path}: first line must be 'bohr' or 'angstrom', got {lines[0]!r}")
    scale = 1.0 if unit == "bohr" else BOHR_PER_ANGSTROM
    atoms = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'Z x y z'")
        charge = int(fields[0])
        x, y, z = (float(v) * scale for v in fields[1:])
        atoms.append((charge, (x, y, z)))
    return Geometry(atoms=tuple(atoms), label=str(path))
