"""Experiment drivers: PES scans over the H4 distortion paths, the
trotterization and screening studies, gradient sampling-cost curves, and
control-noise statistics.

Everything here is deterministic under fixed seeds: scan points get
``base_seed + point_index`` RNG streams, workers own their state, and rows
are merged in grid order, so reruns produce byte-identical CSV files.
All internal energies are hartree; kcal/mol appears only in reporting.
"""

from __future__ import annotations

import json
import math
import platform
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import __version__ as _package_version
from . import _kernels
from .ansatz import (
    generate_uccsd,
    mp2_amplitudes,
    screen,
    spin_orbital_energies,
)
from .chem import (
    MoIntegrals,
    basis_for_geometry,
    build_integrals,
    h4_geometry,
    read_geometry_file,
    run_rhf,
    transform_to_mo,
)
from .fermion import compile_molecular_hamiltonian, spatial_to_spin_orbital
from .optimizers import OptimizerConfig
from .pauli import one_norm
from .simulator import (
    CompiledOperator,
    NoiseModel,
    expectation,
    fci_solve,
    hf_state,
)
from .vqe import (
    GradientConfig,
    GradientSampler,
    Objective,
    VqeProblem,
    run_vqe,
)

KCAL_PER_HARTREE = 627.509

TRAPEZOIDAL_RANGE = (90.0, 180.0)
DISTANCE_RANGE = (0.6, 5.0)
TRAPEZOIDAL_POINTS = 19
DISTANCE_POINTS = 24


def default_grid(path_kind: str, n_points: int | None = None) -> tuple[float, ...]:
    """Uniform parameter grid over a path's standard range."""
    kind = path_kind.lower()
    if kind in ("trapezoidal", "trap"):
        low, high = TRAPEZOIDAL_RANGE
        count = n_points or TRAPEZOIDAL_POINTS
    elif kind in ("rectangular", "rect", "parallel", "linear", "lin"):
        low, high = DISTANCE_RANGE
        count = n_points or DISTANCE_POINTS
    else:
        raise ValueError(f"unknown path kind {path_kind!r}")
    return tuple(float(x) for x in np.linspace(low, high, count))


@dataclass(frozen=True)
class ScanSpec:
    """Configuration of one PES scan."""

    path_kind: str
    parameters: tuple[float, ...]
    basis: str = "sto-6g"
    trotter: int = 1                # ignored when mode == "exact"
    mode: str = "trotterized"
    guess: str = "mp2"
    optimizer: str = "lbfgs"
    gradient_mode: str = "analytical"
    gradient_step: float = 1e-6
    screen_threshold: float | None = None
    noise_sigma: float = 0.0
    shot_epsilon: float | None = None
    seeds: tuple[int, ...] = (0,)
    jobs: int = 1
    extend: bool = False
    geometry_file: str | None = None

    def __post_init__(self) -> None:
        if not self.extend and self.geometry_file is None:
            low, high = (
                TRAPEZOIDAL_RANGE
                if self.path_kind.lower().startswith("trap")
                else DISTANCE_RANGE
            )
            for p in self.parameters:
                if not low <= p <= high:
                    raise ValueError(
                        f"parameter {p} outside [{low}, {high}]; pass extend=True "
                        "to scan beyond the standard range"
                    )

    @property
    def ansatz_label(self) -> str:
        return "exact" if self.mode == "exact" else f"rho{self.trotter}"


@dataclass
class PointBundle:
    """Everything assembled for one geometry."""

    label: str
    parameter: float
    hf_energy: float
    fci_energy: float
    problem: VqeProblem
    scf_iterations: int
    full_pool_size: int


def prepare_point(
    path_kind: str | None,
    parameter: float,
    basis: str = "sto-6g",
    trotter: int = 1,
    mode: str = "trotterized",
    screen_threshold: float | None = None,
    geometry_file: str | None = None,
    mo: MoIntegrals | None = None,
    with_fci: bool = True,
) -> PointBundle:
    """Run the classical pipeline for a single geometry.

    Geometry -> integrals -> SCF -> MO transform -> spin orbitals -> qubit
    Hamiltonian (+ exact diagonalization), then the excitation pool with
    its MP2 guess, optionally screened.
    """
    if mo is None:
        if geometry_file is not None:
            geometry = read_geometry_file(geometry_file)
            n_electrons = sum(z for z, _ in geometry.atoms)
        else:
            geometry = h4_geometry(path_kind, parameter)
            n_electrons = 4
        tables = build_integrals(geometry, basis_for_geometry(geometry, basis))
        scf = run_rhf(tables, n_electrons)
        if not scf.converged:
            raise RuntimeError(f"SCF did not converge for {geometry.label}")
        mo = transform_to_mo(tables, scf)
        label = geometry.label
        scf_iterations = scf.iterations
        orbital_energies = scf.orbital_energies
    else:
        label = "fcidump"
        scf_iterations = 0
        orbital_energies = None

    mh = spatial_to_spin_orbital(mo)
    hamiltonian, system = compile_molecular_hamiltonian(mo)
    compiled = CompiledOperator(hamiltonian, system.n_spin_orbitals)

    reference = hf_state(system)
    hf_energy = expectation(reference, compiled)

    pool = generate_uccsd(system)
    full_pool_size = len(pool)
    if orbital_energies is not None:
        eps_so = spin_orbital_energies(orbital_energies)
    else:
        # FCIDUMP route: use the diagonal of the spin-orbital core matrix
        # dressed by the reference field (canonical orbitals assumed).
        eps_so = _reference_orbital_energies(mh)
    guess = mp2_amplitudes(mh, eps_so, pool)
    if screen_threshold is not None:
        pool, guess = screen(guess, pool, screen_threshold)

    fci_energy = math.nan
    fci_state = None
    if with_fci:
        fci_energy, fci_state = fci_solve(compiled, system)

    problem = VqeProblem(
        hamiltonian=compiled,
        system=system,
        excitations=tuple(pool),
        mp2_guess=guess,
        trotter_number=trotter,
        mode=mode,
        fci_energy=fci_energy,
        fci_state=fci_state,
        hf_energy=hf_energy,
    )
    return PointBundle(
        label=label,
        parameter=parameter,
        hf_energy=hf_energy,
        fci_energy=fci_energy,
        problem=problem,
        scf_iterations=scf_iterations,
        full_pool_size=full_pool_size,
    )


def _reference_orbital_energies(mh) -> np.ndarray:
    """Fock diagonal over the reference determinant, per spin orbital."""
    occupied = list(mh.system.occupied)
    h1, h2 = mh.one_body, mh.two_body
    n = mh.system.n_spin_orbitals
    eps = np.empty(n)
    for p in range(n):
        value = h1[p, p]
        for f in occupied:
            value += h2[p, f, f, p] - h2[p, f, p, f]
        eps[p] = value
    return eps


SCAN_COLUMNS = (
    "path", "parameter", "seed", "basis", "ansatz", "guess", "optimizer",
    "gradient", "screen_threshold", "n_parameters", "e_hf", "e_vqe",
    "e_vqe_exact", "e_fci", "error_vs_fci", "overlap", "infidelity",
    "energy_evaluations", "gradient_calls", "converged", "termination",
    "failure",
)


def scan_point(spec: ScanSpec, parameter: float, seed: int) -> dict:
    """One scan record; failures are captured in-row, never raised."""
    base = {
        "path": spec.path_kind,
        "parameter": repr(float(parameter)),
        "seed": str(seed),
        "basis": spec.basis,
        "ansatz": spec.ansatz_label,
        "guess": spec.guess,
        "optimizer": spec.optimizer,
        "gradient": (
            spec.gradient_mode
            if spec.gradient_mode == "analytical"
            else f"central:{spec.gradient_step:g}"
        ),
        "screen_threshold": "" if spec.screen_threshold is None else repr(spec.screen_threshold),
    }
    empty = {c: "" for c in SCAN_COLUMNS if c not in base}
    try:
        bundle = prepare_point(
            spec.path_kind, parameter, basis=spec.basis, trotter=spec.trotter,
            mode=spec.mode, screen_threshold=spec.screen_threshold,
            geometry_file=spec.geometry_file,
        )
        gradient_config = GradientConfig(
            mode=("analytical" if spec.gradient_mode == "analytical" else "central_difference"),
            step=spec.gradient_step,
        )
        noise = NoiseModel(
            control_sigma=spec.noise_sigma,
            shot_epsilon=spec.shot_epsilon,
            seed=seed,
        )
        result = run_vqe(
            bundle.problem,
            guess_mode=spec.guess,
            optimizer_config=OptimizerConfig(method=spec.optimizer),
            gradient_config=gradient_config,
            noise=noise,
            seed=seed,
        )
        row = dict(base)
        row.update(
            n_parameters=str(len(bundle.problem.excitations)),
            e_hf=repr(bundle.hf_energy),
            e_vqe=repr(result.optimal_energy),
            e_vqe_exact=repr(result.exact_energy),
            e_fci=repr(bundle.fci_energy),
            error_vs_fci=repr(result.exact_energy - bundle.fci_energy),
            overlap="" if result.overlap is None else repr(result.overlap),
            infidelity="" if result.infidelity is None else repr(result.infidelity),
            energy_evaluations=str(result.energy_evaluations),
            gradient_calls=str(result.gradient_calls),
            converged=str(result.converged),
            termination=result.termination,
            failure="",
        )
        return row
    except Exception as exc:  # per-point failure: record and continue
        row = dict(base)
        row.update(empty)
        row["failure"] = f"{type(exc).__name__}: {exc}"
        return row


def _scan_worker(args) -> dict:
    spec, parameter, seed = args
    return scan_point(spec, parameter, seed)


def run_scan(spec: ScanSpec) -> list[dict]:
    """All grid points x seeds, optionally on a worker pool, in grid order."""
    tasks = [
        (spec, parameter, seed + index)
        for index, parameter in enumerate(spec.parameters)
        for seed in spec.seeds
    ]
    if spec.jobs > 1:
        with get_context("spawn").Pool(spec.jobs) as pool:
            rows = pool.map(_scan_worker, tasks)
    else:
        rows = [_scan_worker(task) for task in tasks]
    return rows


def write_csv(rows: list[dict], columns: tuple[str, ...], path) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in columns))
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


def read_csv(path) -> list[dict]:
    with open(path) as handle:
        lines = [line.rstrip("\n") for line in handle if line.strip()]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def write_run_manifest(path, command: str, config: dict) -> None:
    manifest = {
        "command": command,
        "config": config,
        "package_version": _package_version,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "kernel_backend": _kernels.BACKEND,
    }
    with open(path, "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


# ---------------------------------------------------------------------------
# non-parallelism error
# ---------------------------------------------------------------------------


def npe_kcal(parameters, e_method, e_reference) -> float:
    """max minus min of the method-vs-reference error along a path."""
    params = np.asarray(parameters, dtype=float)
    diff = np.asarray(e_method, dtype=float) - np.asarray(e_reference, dtype=float)
    if params.size == 0:
        raise ValueError("no points to compute a non-parallelism error over")
    return float((diff.max() - diff.min()) * KCAL_PER_HARTREE)


def npe_from_rows(rows: list[dict], reference_rows: list[dict] | None = None) -> float:
    """Non-parallelism error from scan CSV rows.

    Uses the exact re-evaluated variational energy and the in-row exact
    diagonalization reference (or a second, grid-aligned CSV).  Rows with
    recorded failures are skipped; multi-seed rows average per parameter.
    """
    def collect(source, column):
        values: dict[float, list[float]] = {}
        for row in source:
            if row.get("failure"):
                continue
            text = row.get(column) or row.get("e_vqe") or ""
            if not text:
                continue
            values.setdefault(float(row["parameter"]), []).append(float(text))
        return {p: float(np.mean(v)) for p, v in values.items()}

    method = collect(rows, "e_vqe_exact")
    if reference_rows is None:
        reference = collect(rows, "e_fci")
    else:
        reference = collect(reference_rows, "e_fci")
    shared = sorted(set(method) & set(reference))
    if not shared:
        raise ValueError("no shared grid points between method and reference")
    if reference_rows is not None and len(shared) != len(method):
        raise ValueError("method and reference grids are not aligned")
    return npe_kcal(
        shared, [method[p] for p in shared], [reference[p] for p in shared]
    )


# ---------------------------------------------------------------------------
# screening study
# ---------------------------------------------------------------------------

SCREENING_COLUMNS = (
    "path", "threshold", "n_parameters_min", "n_parameters_max",
    "n_points", "max_deviation_kcal", "mean_evaluations", "std_evaluations",
)


def screening_study(
    path_kind: str,
    thresholds: tuple[float, ...],
    parameters: tuple[float, ...] | None = None,
    basis: str = "sto-6g",
    gradient_step: float = 1e-6,
    jobs: int = 1,
) -> list[dict]:
    """Pre-screened vs full-pool scans along one path.

    Every threshold (plus the unscreened baseline) is scanned with the
    gradient-based optimizer and central differences so that evaluation
    counts reflect the parameter count.  Deviation is the maximum
    energy difference against the unscreened PES, in kcal/mol; points
    whose classical pipeline fails (degenerate orbitals) are dropped from
    every variant.
    """
    parameters = parameters or default_grid(path_kind)

    def scan_with(threshold: float | None) -> list[dict]:
        spec = ScanSpec(
            path_kind=path_kind,
            parameters=parameters,
            basis=basis,
            screen_threshold=threshold,
            gradient_mode="central",
            gradient_step=gradient_step,
            jobs=jobs,
        )
        return run_scan(spec)

    full_rows = scan_with(None)
    ok_params = {
        float(r["parameter"]) for r in full_rows if not r.get("failure")
    }
    full_energy = {
        float(r["parameter"]): float(r["e_vqe_exact"])
        for r in full_rows
        if not r.get("failure")
    }

    out: list[dict] = []

    def summarize(threshold_label: str, rows: list[dict]) -> dict:
        good = [r for r in rows if not r.get("failure") and float(r["parameter"]) in ok_params]
        params_list = [int(r["n_parameters"]) for r in good]
        evals = np.array([int(r["energy_evaluations"]) for r in good], dtype=float)
        deviation = max(
            abs(float(r["e_vqe_exact"]) - full_energy[float(r["parameter"])])
            for r in good
        )
        return {
            "path": path_kind,
            "threshold": threshold_label,
            "n_parameters_min": str(min(params_list)),
            "n_parameters_max": str(max(params_list)),
            "n_points": str(len(good)),
            "max_deviation_kcal": repr(deviation * KCAL_PER_HARTREE),
            "mean_evaluations": repr(float(np.mean(evals))),
            "std_evaluations": repr(float(np.std(evals))),
        }

    for d in thresholds:
        out.append(summarize(repr(float(d)), scan_with(float(d))))
    out.append(summarize("all", full_rows))
    return out


# ---------------------------------------------------------------------------
# gradient sampling study
# ---------------------------------------------------------------------------

GRADIENT_COST_COLUMNS = (
    "method", "delta", "epsilon_j", "mean_shots", "mean_dg", "std_dg", "n_samples",
)


def gradient_cost_study(
    problem: VqeProblem,
    deltas: tuple[float, ...] = (0.5, 0.1, 0.05),
    epsilon_grid: tuple[float, ...] = (0.3, 0.1, 0.03, 0.01, 0.003),
    n_samples: int = 100,
    seed: int = 0,
    amplitude_high: float = 2.0 * math.pi,
) -> list[dict]:
    """Mean gradient error vs sampling cost over random amplitude vectors.

    Amplitudes are drawn uniformly from [0, 2*pi).  The error is the
    2-norm distance to the machine-precision analytical gradient.
    """
    sampler = GradientSampler.from_problem(problem)
    rng_amplitudes = np.random.default_rng(seed)
    samples = [
        rng_amplitudes.uniform(0.0, amplitude_high, sampler.n_parameters)
        for _ in range(n_samples)
    ]
    exact = [sampler.exact_gradient(t) for t in samples]
    mus = [sampler.interference_values(t) for t in samples]

    rows: list[dict] = []
    for eps in epsilon_grid:
        dg, shots = [], []
        for k, t in enumerate(samples):
            rng = np.random.default_rng(np.random.SeedSequence([seed, 1, k]))
            g_est, m = sampler.sample_analytical(t, eps, rng, mu=mus[k])
            dg.append(float(np.linalg.norm(g_est - exact[k])))
            shots.append(m)
        rows.append({
            "method": "analytical", "delta": "",
            "epsilon_j": repr(float(eps)),
            "mean_shots": repr(float(np.mean(shots))),
            "mean_dg": repr(float(np.mean(dg))),
            "std_dg": repr(float(np.std(dg))),
            "n_samples": str(n_samples),
        })
    for delta in deltas:
        for eps in epsilon_grid:
            dg, shots = [], []
            for k, t in enumerate(samples):
                rng = np.random.default_rng(np.random.SeedSequence([seed, 2, k]))
                g_est, m = sampler.sample_numerical(t, delta, eps, rng)
                dg.append(float(np.linalg.norm(g_est - exact[k])))
                shots.append(m)
            rows.append({
                "method": "numerical", "delta": repr(float(delta)),
                "epsilon_j": repr(float(eps)),
                "mean_shots": repr(float(np.mean(shots))),
                "mean_dg": repr(float(np.mean(dg))),
                "std_dg": repr(float(np.std(dg))),
                "n_samples": str(n_samples),
            })
    return rows


# ---------------------------------------------------------------------------
# control-noise study
# ---------------------------------------------------------------------------

CONTROL_NOISE_COLUMNS = (
    "system", "method", "delta", "sigma", "runs",
    "grad_calls_mean", "grad_calls_std", "energy_error_mean", "energy_error_std",
)

NOISE_SLOPE_COLUMNS = (
    "system", "method", "delta", "sigma", "mean_dg", "std_dg", "n_samples",
)


def control_noise_study(
    bundles: list[PointBundle],
    sigma: float = 0.01,
    n_runs: int = 150,
    deltas: tuple[float, ...] = (0.05, 0.1),
    seed: int = 0,
) -> list[dict]:
    """Optimization statistics under Gaussian control errors.

    For every system instance, the noiseless analytical-gradient optimum
    is the energy reference; each noisy run reports its gradient-call
    count and the exact energy of its returned amplitudes relative to that
    reference.
    """
    rows: list[dict] = []
    for bundle in bundles:
        baseline = run_vqe(bundle.problem, guess_mode="mp2")
        reference_energy = baseline.exact_energy
        configs = [("analytical", None)] + [("numerical", d) for d in deltas]
        for method, delta in configs:
            gradient_config = (
                GradientConfig(mode="analytical")
                if delta is None
                else GradientConfig(mode="central_difference", step=delta)
            )
            calls, errors = [], []
            for run in range(n_runs):
                noise = NoiseModel(control_sigma=sigma, seed=seed + 7919 * run)
                result = run_vqe(
                    bundle.problem, guess_mode="mp2",
                    gradient_config=gradient_config, noise=noise,
                    seed=seed + 7919 * run,
                )
                calls.append(result.gradient_calls)
                errors.append(result.exact_energy - reference_energy)
            rows.append({
                "system": bundle.label,
                "method": method,
                "delta": "" if delta is None else repr(float(delta)),
                "sigma": repr(float(sigma)),
                "runs": str(n_runs),
                "grad_calls_mean": repr(float(np.mean(calls))),
                "grad_calls_std": repr(float(np.std(calls))),
                "energy_error_mean": repr(float(np.mean(errors))),
                "energy_error_std": repr(float(np.std(errors))),
            })
    return rows


def noise_scaling_study(
    problem: VqeProblem,
    sigmas: tuple[float, ...] = (0.003, 0.01, 0.03, 0.1),
    n_samples: int = 100,
    delta: float = 0.05,
    seed: int = 0,
    label: str = "",
) -> tuple[list[dict], dict[str, float]]:
    """Gradient error against the control-error scale.

    Amplitudes are random in [0, 2*pi); for each draw the perturbed
    gradient (analytical, and central differences with per-evaluation
    perturbations) is compared with the noiseless analytical gradient.
    Returns the rows plus the fitted log-log slope per method.
    """
    system = problem.system
    ansatz = problem.make_ansatz()
    rng_amp = np.random.default_rng(seed)
    n_params = len(problem.excitations)
    samples = [
        rng_amp.uniform(0.0, 2.0 * math.pi, n_params) for _ in range(n_samples)
    ]
    clean = Objective(problem.hamiltonian, ansatz, system)
    exact = [clean.analytical_gradient(t) for t in samples]

    rows: list[dict] = []
    curves: dict[str, list[float]] = {"analytical": [], "numerical": []}
    for sigma in sigmas:
        for method in ("analytical", "numerical"):
            gradient_config = (
                GradientConfig(mode="analytical")
                if method == "analytical"
                else GradientConfig(mode="central_difference", step=delta)
            )
            dg = []
            for k, t in enumerate(samples):
                noise = NoiseModel(control_sigma=sigma, seed=seed + 104729 * k)
                noisy = Objective(
                    problem.hamiltonian, ansatz, system,
                    noise=noise, gradient_config=gradient_config,
                )
                g = noisy.gradient(t)
                dg.append(float(np.linalg.norm(g - exact[k])))
            curves[method].append(float(np.mean(dg)))
            rows.append({
                "system": label,
                "method": method,
                "delta": "" if method == "analytical" else repr(float(delta)),
                "sigma": repr(float(sigma)),
                "mean_dg": repr(float(np.mean(dg))),
                "std_dg": repr(float(np.std(dg))),
                "n_samples": str(n_samples),
            })
    slopes = {
        method: float(
            np.polyfit(np.log10(np.asarray(sigmas)), np.log10(values), 1)[0]
        )
        for method, values in curves.items()
    }
    return rows, slopes


def fcidump_summary(mo: MoIntegrals, with_fci: bool = True) -> dict:
    """Headline numbers for an ingested integral file."""
    hamiltonian, system = compile_molecular_hamiltonian(mo)
    compiled = CompiledOperator(hamiltonian, system.n_spin_orbitals)
    reference = hf_state(system)
    info = {
        "n_orbitals": mo.n_orbitals,
        "n_electrons": mo.n_electrons,
        "n_qubits": system.n_spin_orbitals,
        "h_nuc": mo.h_nuc,
        "jw_terms": len(compiled),
        "one_norm": one_norm(hamiltonian),
        "reference_energy": expectation(reference, compiled),
        "uccsd_parameters": len(generate_uccsd(system)),
    }
    from .vqe import CHEMICAL_ACCURACY_HARTREE, measurement_cost_energy

    info["measurement_bound_chemical_accuracy"] = measurement_cost_energy(
        info["one_norm"], CHEMICAL_ACCURACY_HARTREE
    )
    if with_fci and system.n_spin_orbitals <= 16:
        info["fci_energy"], _ = fci_solve(compiled, system)
    return info
