"""Benchmark the jit-compiled kernels against the pure-numpy fallbacks.

Times the three hot kernels on five-qutrit (243-dimensional) workloads and
one full noisy teleportation run with the active backend.  The active
backend follows QUTRITSIM_PURE_NUMPY; the kernel micro-benchmarks always
time both implementations in-process.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats N] [--protocol]
"""

import argparse
import time

import numpy as np

import qutritsim.kernels as kernels


def timeit(fn, repeats):
    fn()  # warm up (jit compilation, caches)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--protocol", action="store_true", help="also time one noisy protocol run")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rho = rng.standard_normal((243, 243)) + 1j * rng.standard_normal((243, 243))
    rho = rho + rho.conj().T
    kraus = rng.standard_normal((8, 3, 3)) + 1j * rng.standard_normal((8, 3, 3))
    phases = rng.standard_normal(243)
    probs = rng.random(243)
    probs /= probs.sum()
    mats = np.array([np.eye(3) * 0.9 + np.full((3, 3), 0.05) for _ in range(5)])

    print(f"active backend: {kernels.backend_name()}")
    rows = [
        (
            "apply_site_kraus (8 ops, site 3 of 5)",
            lambda: kernels.apply_site_kraus(rho, kraus, 9, 3, 9),
            lambda: kernels.apply_site_kraus_numpy(rho, kraus, 9, 3, 9),
        ),
        (
            "apply_diag_phases (243-dim)",
            lambda: kernels.apply_diag_phases(rho, phases),
            lambda: kernels.apply_diag_phases_numpy(rho, phases),
        ),
        (
            "confusion_mix (5 sites)",
            lambda: kernels.confusion_mix(probs, mats),
            lambda: kernels.confusion_mix_numpy(probs, mats),
        ),
    ]
    print(f"{'kernel':42s} {'active':>12s} {'numpy':>12s} {'speedup':>9s}")
    for name, active, reference in rows:
        t_active = timeit(active, args.repeats)
        t_numpy = timeit(reference, args.repeats)
        print(f"{name:42s} {t_active * 1e6:9.1f} us {t_numpy * 1e6:9.1f} us {t_numpy / t_active:8.2f}x")

    if args.protocol:
        from qutritsim.scrambling import design_states
        from qutritsim.teleport import ScramblerSpec, run_teleportation

        state = design_states()[0].state
        spec = ScramblerSpec("maximally_scrambling")
        run_teleportation(spec, state, noise_scale=1.0)  # warm up
        t0 = time.perf_counter()
        out = run_teleportation(spec, state, noise_scale=1.0)
        dt = time.perf_counter() - t0
        print(f"\nnoisy teleportation run ({kernels.backend_name()}): {dt:.2f} s, F = {out.fidelity:.4f}")
        print("rerun with QUTRITSIM_PURE_NUMPY=1 to compare the fallback path")


if __name__ == "__main__":
    main()
