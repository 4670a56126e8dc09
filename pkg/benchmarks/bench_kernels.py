"""Time the numba and numpy kernel backends on default-size inputs.

    python benchmarks/bench_kernels.py [--reps N] [--seed S]

Both backends get the same pre-drawn inputs; the script checks their outputs
match exactly before reporting timings. The first numba call per kernel
(compilation or cache load) is timed separately.
"""
import argparse
import time

import numpy as np

from interdiff import kernels
from interdiff.dynamics import SimConfig, assign_independent_susceptibility, initial_population


def sweep_inputs(seed: int, independent: bool, n_steps: int = 10):
    rng = np.random.default_rng(seed)
    pop = initial_population(SimConfig(), rng)
    if independent:
        pop = assign_independent_susceptibility(pop, 0.2, rng)
    n, u = pop.n_agents, pop.universe.shape[0]
    steps = [(rng.permutation(n).astype(np.int64),
              rng.permuted(np.tile(np.arange(u, dtype=np.int64), (n, 1)), axis=1))
             for _ in range(n_steps)]
    susc = pop.susceptibility if independent else np.zeros((1, 1, 1), dtype=np.bool_)
    return pop, susc, steps


def run_sweeps(mod, pop, susc, steps, independent):
    minds = pop.minds.copy()
    net = pop.network
    ulo, uhi = pop.universe[:, 0].copy(), pop.universe[:, 1].copy()
    for order, perms in steps:
        mod.sweep(minds, susc, independent, net.indptr, net.indices, ulo, uhi, order, perms)
    return minds


def shuffle_inputs(seed: int):
    rng = np.random.default_rng(seed)
    mat = rng.random((60, 300)) < 0.3
    r, c = np.nonzero(mat)
    picks = rng.integers(0, r.shape[0], size=(200_000, 2))
    return mat, r, c, picks


def run_shuffle(mod, mat, r, c, picks):
    m = mat.copy()
    done, used = mod.checkerboard_swaps(m, r.copy(), c.copy(), picks, 10 * r.shape[0])
    return m, done, used


def timed(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = {"numpy": kernels.load("numpy"), "numba": kernels.load("numba")}
    cases = {}
    for independent in (False, True):
        pop, susc, steps = sweep_inputs(args.seed, independent)
        name = "10 sweeps, " + ("independent" if independent else "interdependent")
        cases[name] = lambda mod, a=(pop, susc, steps, independent): run_sweeps(mod, *a)
    minds = run_sweeps(backends["numpy"], *sweep_inputs(args.seed, False), False)
    universe = sweep_inputs(args.seed, False)[0].universe
    ulo, uhi = universe[:, 0].copy(), universe[:, 1].copy()
    cases["susceptibility matrix"] = lambda mod: mod.interdependent_susceptibility(minds, ulo, uhi)
    sh = shuffle_inputs(args.seed)
    cases["checkerboard swaps 60x300"] = lambda mod: run_shuffle(mod, *sh)

    t = time.perf_counter()
    for fn in cases.values():
        fn(backends["numba"])
    print(f"numba first-call overhead: {time.perf_counter() - t:.2f} s")
    print(f"{'kernel':32s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}  match")
    for name, fn in cases.items():
        tn, out_n = timed(lambda: fn(backends["numpy"]), args.reps)
        tb, out_b = timed(lambda: fn(backends["numba"]), args.reps)
        a = out_n if isinstance(out_n, tuple) else (out_n,)
        b = out_b if isinstance(out_b, tuple) else (out_b,)
        same = all(np.array_equal(x, y) for x, y in zip(a, b))
        print(f"{name:32s} {tn:10.4f} {tb:10.4f} {tn / tb:8.1f}x  {'yes' if same else 'NO'}")
        if not same:
            raise SystemExit(f"backends disagree on {name}")


if __name__ == "__main__":
    main()
