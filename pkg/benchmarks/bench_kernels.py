"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the hot statevector kernels on an 8-qubit register shaped like the
H4 workload (52-parameter UCCSD product, 185-term Hamiltonian) and a
16-qubit stress case, then times a full energy evaluation both ways.

The packaged code picks its backend at import time from the
UCCVQE_PURE_NUMPY environment variable; here both implementations are
imported directly so one process can compare them.
"""

import time

import numpy as np

from uccvqe import _kernels
from uccvqe._kernels import (
    _apply_operator_numba,
    _apply_operator_numpy,
    _apply_rotations_numba,
    _apply_rotations_numpy,
    _term_overlaps_numba,
    _term_overlaps_numpy,
)


def random_state(n_qubits: int, rng) -> np.ndarray:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return (amps / np.linalg.norm(amps)).astype(np.complex128)


def random_terms(n_terms: int, n_qubits: int, rng):
    x = rng.integers(0, 2**n_qubits, size=n_terms, dtype=np.int64)
    zy = rng.integers(0, 2**n_qubits, size=n_terms, dtype=np.int64)
    phases = np.exp(0.5j * np.pi * rng.integers(0, 4, size=n_terms)).astype(np.complex128)
    coeffs = rng.normal(size=n_terms).astype(np.complex128)
    angles = rng.normal(scale=0.1, size=n_terms)
    return x, zy, phases, coeffs, angles


def timeit(fn, repeats: int) -> float:
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_case(n_qubits: int, n_factors: int, n_terms: int, repeats: int) -> None:
    rng = np.random.default_rng(42)
    psi = random_state(n_qubits, rng)
    xf, zyf, phf, _, angles = random_terms(n_factors, n_qubits, rng)
    xt, zyt, pht, coeffs, _ = random_terms(n_terms, n_qubits, rng)
    out = np.zeros_like(psi)

    cases = {
        f"rotations x{n_factors}": (
            lambda: _apply_rotations_numba(psi.copy(), xf, zyf, phf, angles),
            lambda: _apply_rotations_numpy(psi.copy(), xf, zyf, phf, angles),
        ),
        f"operator x{n_terms}": (
            lambda: _apply_operator_numba(out * 0, psi, xt, zyt, pht, coeffs),
            lambda: _apply_operator_numpy(out * 0, psi, xt, zyt, pht, coeffs),
        ),
        f"overlaps x{n_terms}": (
            lambda: _term_overlaps_numba(psi, psi, xt, zyt, pht),
            lambda: _term_overlaps_numpy(psi, psi, xt, zyt, pht),
        ),
    }
    print(f"\n{n_qubits} qubits (dim {2**n_qubits}), {repeats} repeats")
    for name, (numba_fn, numpy_fn) in cases.items():
        numba_fn()  # warm the JIT cache before timing
        t_numba = timeit(numba_fn, repeats)
        t_numpy = timeit(numpy_fn, repeats)
        print(
            f"  {name:<18} numba {t_numba * 1e6:9.1f} us   "
            f"numpy {t_numpy * 1e6:9.1f} us   speedup {t_numpy / t_numba:5.1f}x"
        )


def bench_energy() -> None:
    """Full H4-sized objective evaluation with the active backend."""
    import uccvqe as uv
    from uccvqe import experiments as exx

    bundle = exx.prepare_point("trapezoidal", 135.0)
    objective = uv.Objective(
        bundle.problem.hamiltonian, bundle.problem.make_ansatz(), bundle.problem.system
    )
    t = bundle.problem.mp2_guess
    objective.energy(t)
    objective.analytical_gradient(t)
    t_energy = timeit(lambda: objective.energy(t), 200)
    t_grad = timeit(lambda: objective.analytical_gradient(t), 50)
    print(
        f"\nH4 objective ({_kernels.BACKEND} backend): "
        f"energy {t_energy * 1e3:.3f} ms, analytical gradient {t_grad * 1e3:.3f} ms"
    )
    print("rerun with UCCVQE_PURE_NUMPY=1 to time the fallback end to end")


if __name__ == "__main__":
    print(f"active package backend: {_kernels.BACKEND}")
    bench_case(n_qubits=8, n_factors=320, n_terms=185, repeats=50)
    bench_case(n_qubits=16, n_factors=320, n_terms=185, repeats=3)
    bench_energy()
