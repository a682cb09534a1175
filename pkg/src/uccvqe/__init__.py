"""VQE with a unitary coupled cluster ansatz on a dense statevector
simulator, from molecular integrals to benchmark experiment drivers."""

from .ansatz import (
    ActiveSpaceSpec,
    DegenerateOrbitalError,
    Excitation,
    GeneratorExpansion,
    UccAnsatz,
    cas_reduce,
    expand_generator,
    generate_uccsd,
    mp2_amplitudes,
    read_manifest,
    screen,
    spin_orbital_energies,
    verify_subterm_commutativity,
    write_manifest,
)
from .chem import (
    BOHR_PER_ANGSTROM,
    ContractedGaussian,
    Geometry,
    IntegralTables,
    MoIntegrals,
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
from .fcidump import FcidumpError, read_fcidump, write_fcidump
from .fermion import (
    FermionOperator,
    MolecularHamiltonian,
    SystemInfo,
    build_fermion_hamiltonian,
    compile_molecular_hamiltonian,
    jordan_wigner,
    spatial_to_spin_orbital,
)
from .optimizers import (
    CountingObjective,
    OptimizerConfig,
    VqeResult,
    lbfgs,
    nelder_mead,
)
from .pauli import PauliString, QubitOperator, one_norm, pauli_product
from .simulator import (
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
from .vqe import (
    CHEMICAL_ACCURACY_HARTREE,
    GradientConfig,
    GradientSampler,
    Objective,
    VqeProblem,
    central_difference_gradient,
    gradient_shot_allocation,
    initial_guess,
    measurement_cost_energy,
    measurement_cost_gradient,
    run_vqe,
)

__version__ = "0.1.0"
