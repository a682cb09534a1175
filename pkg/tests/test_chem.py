import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uccvqe.chem import (
    BOHR_PER_ANGSTROM,
    ContractedGaussian,
    Geometry,
    ScfResult,
    UnsupportedBasisError,
    basis_for_geometry,
    boys_f0,
    build_integrals,
    h4_geometry,
    hydrogen_basis,
    read_geometry_file,
    run_rhf,
    transform_to_mo,
)

H2_BOND_ANGSTROM = 0.7414
H2_REFERENCE_HF = -1.1167     # restricted HF, STO-3G, textbook value
H2_BOND_TEXTBOOK_BOHR = 1.4   # geometry of the classic worked example
H2_S12_TEXTBOOK = 0.6593


def h2_geometry(distance_bohr: float) -> Geometry:
    return Geometry(
        atoms=((1, (0.0, 0.0, 0.0)), (1, (0.0, 0.0, distance_bohr))),
        label="h2",
    )


class TestBoysFunction:
    def test_zero_limit(self):
        assert boys_f0(0.0) == 1.0

    def test_continuity_at_zero(self):
        assert boys_f0(1e-8) == pytest.approx(1.0, abs=1e-8)

    def test_large_argument_closed_form(self):
        # erf(sqrt(30)) is 1 to machine precision
        assert boys_f0(30.0) == pytest.approx(0.5 * math.sqrt(math.pi / 30.0), abs=1e-12)

    def test_against_quadrature_oracle(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        for x in (1e-10, 1e-4, 0.5, 1.0, 7.3, 30.0):
            exact = float(mpmath.quad(lambda t, _x=x: mpmath.exp(-_x * t * t), [0, 1]))
            assert boys_f0(x) == pytest.approx(exact, abs=1e-13)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            boys_f0(-1e-3)


class TestBasis:
    def test_self_overlap_normalized(self):
        for name in ("sto-3g", "sto-6g"):
            shell = hydrogen_basis(name, (0.0, 0.0, 0.0))
            geometry = Geometry(atoms=((1, (0.0, 0.0, 0.0)),))
            tables = build_integrals(geometry, [shell])
            assert tables.S[0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_unknown_basis(self):
        with pytest.raises(UnsupportedBasisError):
            hydrogen_basis("cc-pvdz", (0, 0, 0))

    def test_non_hydrogen_rejected(self):
        geometry = Geometry(atoms=((2, (0.0, 0.0, 0.0)),))
        with pytest.raises(UnsupportedBasisError):
            basis_for_geometry(geometry, "sto-3g")

    def test_bad_primitives_rejected(self):
        with pytest.raises(UnsupportedBasisError):
            ContractedGaussian((0.0, 0.0, 0.0), ())
        with pytest.raises(UnsupportedBasisError):
            ContractedGaussian((0.0, 0.0, 0.0), ((-1.0, 1.0),))


class TestIntegrals:
    def test_h2_overlap_textbook_value(self):
        geometry = h2_geometry(H2_BOND_TEXTBOOK_BOHR)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        assert tables.S[0, 1] == pytest.approx(H2_S12_TEXTBOOK, abs=1e-3)

    def test_h2_overlap_extended_precision_oracle(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        geometry = h2_geometry(H2_BOND_TEXTBOOK_BOHR)
        shells = basis_for_geometry(geometry, "sto-3g")
        tables = build_integrals(geometry, shells)

        r2 = mpmath.mpf(H2_BOND_TEXTBOOK_BOHR) ** 2
        alphas, coeffs = shells[0].contraction()
        total = mpmath.mpf(0)
        for a, ca in zip(alphas, coeffs):
            for b, cb in zip(alphas, coeffs):
                a_, b_ = mpmath.mpf(float(a)), mpmath.mpf(float(b))
                total += (
                    mpmath.mpf(float(ca * cb))
                    * (mpmath.pi / (a_ + b_)) ** mpmath.mpf("1.5")
                    * mpmath.exp(-a_ * b_ / (a_ + b_) * r2)
                )
        assert tables.S[0, 1] == pytest.approx(float(total), abs=1e-10)

    def test_single_atom_no_nuclear_repulsion(self):
        geometry = Geometry(atoms=((1, (0.0, 0.0, 0.0)),))
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        assert tables.h_nuc == 0.0

    def test_h4_square_nuclear_repulsion_pair_sum(self):
        geometry = h4_geometry("rectangular", 2.0)
        expected = 0.0
        for i, (zi, ri) in enumerate(geometry.atoms):
            for zj, rj in geometry.atoms[i + 1 :]:
                expected += zi * zj / np.linalg.norm(np.subtract(ri, rj))
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        assert tables.h_nuc == pytest.approx(expected, abs=1e-12)

    def test_eri_eightfold_symmetry(self):
        geometry = h4_geometry("linear", 1.2)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        eri = tables.eri
        for perm in [
            (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
            (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
        ]:
            assert np.allclose(eri, eri.transpose(perm), atol=1e-12)

    def test_overlap_positive_definite(self):
        geometry = h4_geometry("trapezoidal", 100.0)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        np.linalg.cholesky(tables.S)  # raises if not positive definite


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(-3.0, 3.0, allow_nan=False),
            st.floats(-3.0, 3.0, allow_nan=False),
            st.floats(-3.0, 3.0, allow_nan=False),
        ),
        min_size=1,
        max_size=4,
    )
)
def test_overlap_positive_definite_property(positions):
    # enforce pairwise separation so the geometry is valid
    kept = []
    for pos in positions:
        if all(sum((a - b) ** 2 for a, b in zip(pos, other)) > 0.01 for other in kept):
            kept.append(pos)
    geometry = Geometry(atoms=tuple((1, p) for p in kept))
    tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
    np.linalg.cholesky(tables.S)


class TestScf:
    def test_h2_reference_energy(self):
        geometry = h2_geometry(H2_BOND_ANGSTROM * BOHR_PER_ANGSTROM)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        scf = run_rhf(tables, 2)
        assert scf.converged
        assert scf.hf_energy == pytest.approx(H2_REFERENCE_HF, abs=2e-3)

    def test_no_electrons_gives_nuclear_repulsion(self):
        geometry = h4_geometry("linear", 2.0)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        scf = run_rhf(tables, 0)
        assert scf.converged
        assert scf.hf_energy == tables.h_nuc

    def test_h4_linear_converges_with_sorted_energies(self):
        geometry = h4_geometry("linear", 1.2)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        scf = run_rhf(tables, 4)
        assert scf.converged
        assert np.all(np.diff(scf.orbital_energies) >= -1e-12)

    def test_compressed_linear_geometry_converges(self):
        # needs the heavier damping stages
        geometry = h4_geometry("linear", 0.6)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        scf = run_rhf(tables, 4)
        assert scf.converged

    def test_mo_orthonormality(self):
        geometry = h4_geometry("trapezoidal", 120.0)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        scf = run_rhf(tables, 4)
        gram = scf.mo_coefficients.T @ tables.S @ scf.mo_coefficients
        assert np.allclose(gram, np.eye(4), atol=1e-8)

    def test_odd_electron_count_rejected(self):
        geometry = h2_geometry(1.4)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        with pytest.raises(ValueError):
            run_rhf(tables, 3)


class TestMoTransform:
    def test_identity_coefficients_reproduce_ao_tables(self):
        geometry = h2_geometry(1.4)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        scf = ScfResult(
            mo_coefficients=np.eye(2),
            orbital_energies=np.zeros(2),
            hf_energy=0.0,
            converged=True,
            iterations=0,
            n_electrons=2,
        )
        mo = transform_to_mo(tables, scf)
        assert np.allclose(mo.h_spatial, tables.core_hamiltonian())
        assert np.allclose(mo.eri_mo, tables.eri)

    def test_trace_similarity_invariance(self):
        geometry = h2_geometry(1.4)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        scf = run_rhf(tables, 2)
        mo = transform_to_mo(tables, scf)
        # C C^T = S^{-1}, so tr(C^T h C) = tr(h S^{-1})
        expected = np.trace(tables.core_hamiltonian() @ np.linalg.inv(tables.S))
        assert np.trace(mo.h_spatial) == pytest.approx(expected, abs=1e-10)

    def test_mo_eri_eightfold_symmetry(self):
        geometry = h4_geometry("linear", 1.6)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-6g"))
        scf = run_rhf(tables, 4)
        mo = transform_to_mo(tables, scf)
        eri = mo.eri_mo
        for perm in [(1, 0, 2, 3), (2, 3, 0, 1), (1, 0, 3, 2)]:
            assert np.allclose(eri, eri.transpose(perm), atol=1e-10)

    def test_unconverged_scf_rejected(self):
        geometry = h2_geometry(1.4)
        tables = build_integrals(geometry, basis_for_geometry(geometry, "sto-3g"))
        bad = ScfResult(np.eye(2), np.zeros(2), 0.0, False, 200, 2)
        with pytest.raises(Exception, match="converge"):
            transform_to_mo(tables, bad)


class TestH4Geometry:
    def test_rectangular_at_fixed_side_is_square(self):
        geometry = h4_geometry("rectangular", 2.0)
        positions = [np.array(p) for _, p in geometry.atoms]
        d = 2.0 * BOHR_PER_ANGSTROM
        distances = sorted(
            float(np.linalg.norm(positions[i] - positions[j]))
            for i in range(4)
            for j in range(i + 1, 4)
        )
        assert distances[:4] == pytest.approx([d] * 4, abs=1e-10)
        assert distances[4:] == pytest.approx([d * math.sqrt(2)] * 2, abs=1e-10)

    def test_trapezoidal_collinear_limit_flagged(self):
        geometry = h4_geometry("trapezoidal", 180.0)
        positions = np.array([p for _, p in geometry.atoms])
        assert np.allclose(positions[:, 1], 0.0, atol=1e-9)
        assert "collinear" in geometry.label

    def test_trapezoidal_square_limit(self):
        geometry = h4_geometry("trapezoidal", 90.0)
        positions = [np.array(p) for _, p in geometry.atoms]
        d = 2.0 * BOHR_PER_ANGSTROM
        for i, j in [(0, 1), (1, 2), (2, 3), (3, 0)]:
            assert np.linalg.norm(positions[i] - positions[j]) == pytest.approx(d, abs=1e-9)

    def test_linear_spacing_pattern(self):
        geometry = h4_geometry("linear", 1.2)
        xs = sorted(p[0] for _, p in geometry.atoms)
        d = 2.0 * BOHR_PER_ANGSTROM
        r = 1.2 * BOHR_PER_ANGSTROM
        gaps = np.diff(xs)
        assert gaps == pytest.approx([d, r, d], abs=1e-9)

    @pytest.mark.parametrize(
        "kind,value",
        [("trapezoidal", 89.0), ("trapezoidal", 181.0), ("linear", 0.5),
         ("rectangular", 5.1), ("linear", -1.0)],
    )
    def test_out_of_range_rejected(self, kind, value):
        with pytest.raises(ValueError):
            h4_geometry(kind, value)

    def test_unknown_path_rejected(self):
        with pytest.raises(ValueError):
            h4_geometry("zigzag", 1.0)


class TestGeometryFile:
    def test_round_trip_units(self, tmp_path):
        path = tmp_path / "geom.txt"
        path.write_text("angstrom\n1 0.0 0.0 0.0\n1 0.0 0.0 0.7414\n")
        geometry = read_geometry_file(path)
        assert geometry.n_atoms == 2
        assert geometry.atoms[1][1][2] == pytest.approx(0.7414 * BOHR_PER_ANGSTROM)

    def test_bohr_header(self, tmp_path):
        path = tmp_path / "geom.txt"
        path.write_text("bohr\n1 0 0 0\n1 0 0 1.4\n")
        geometry = read_geometry_file(path)
        assert geometry.atoms[1][1][2] == pytest.approx(1.4)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "geom.txt"
        path.write_text("1 0 0 0\n")
        with pytest.raises(ValueError, match="bohr"):
            read_geometry_file(path)

    def test_duplicate_positions_rejected(self):
        with pytest.raises(ValueError, match="coincide"):
            Geometry(atoms=((1, (0.0, 0.0, 0.0)), (1, (0.0, 0.0, 0.0))))
