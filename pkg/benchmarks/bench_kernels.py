"""Timing comparison of the numba kernels against the pure-Python path.

Run from the repo root after installing the package:

    python3 benchmarks/bench_kernels.py

The kernel rows time the same compiled function against its uncompiled
``py_func``; the simulate row re-launches this script in a subprocess
with ALKASIM_DISABLE_JIT=1 because the dispatch mode is fixed at import.
"""

import os
import subprocess
import sys
import time
from importlib import resources

import numpy as np

from alkasim import correlations, kernels
from alkasim._accel import JIT_ENABLED, python_impl
from alkasim.dae import SolverSettings, consistent_init, pack_params, simulate
from alkasim.scenario import initial_state, load_scenario

SIM_HORIZON = 600.0  # s


def bench(fn, args, min_time=0.2):
    """Best-of-3 mean call time, calibrated to run at least min_time."""
    fn(*args)  # warm up (JIT compile on first call)
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn(*args)
        dt = time.perf_counter() - t0
        if dt >= min_time:
            break
        n = max(n * 2, int(n * min_time / max(dt, 1e-9)))
    best = dt / n
    for _ in range(2):
        t0 = time.perf_counter()
        for _ in range(n):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / n)
    return best


def scenario_config():
    ref = resources.files("alkasim") / "data" / "feasible_step.scenario"
    with resources.as_file(ref) as path:
        return load_scenario(path)


def run_simulation(config):
    tab = correlations.default_table()
    x0 = initial_state(config, tab)
    settings = SolverSettings(h=1.0, sample_interval=60.0)
    t0 = time.perf_counter()
    simulate(x0, config.u_of_t, config.d_of_t, SIM_HORIZON,
             plant=config.plant, settings=settings, table=tab,
             breakpoints=config.breakpoints)
    return time.perf_counter() - t0


def main():
    config = scenario_config()
    if "--simulate-only" in sys.argv:
        # warm once so JIT compile time stays out of the number
        run_simulation(config)
        print(repr(run_simulation(config)))
        return

    tab = correlations.default_table()
    tabp = tab.pack()
    par = pack_params(config.plant)
    x0 = initial_state(config, tab)
    u = config.u_of_t(0.0)
    d = config.d_of_t(0.0)
    state = consistent_init(x0, u, d, plant=config.plant, table=tab)
    x, y = state.x, state.y
    xdot = np.zeros(x.size)
    w = np.concatenate([x, y])
    h = 1.0
    f0 = kernels.step_residual_kernel(w, x, h, u, d, par, *tabp)
    deltas = 1e-7 * np.maximum(np.abs(w), 1.0)

    if not JIT_ENABLED:
        print("numba path unavailable (ALKASIM_DISABLE_JIT set or numba "
              "missing); nothing to compare")
        return

    rows = []
    for name, fn, args in [
        ("plant residual (24 eqs)", kernels.plant_residual_kernel,
         (x, xdot, y, u, d, par) + tabp),
        ("step residual", kernels.step_residual_kernel,
         (w, x, h, u, d, par) + tabp),
        ("step jacobian (24x24 FD)", kernels.step_jacobian_kernel,
         (w, f0, x, h, u, d, par, deltas) + tabp),
        ("derived outputs", kernels.derived_outputs_kernel,
         (x, y, u, d, par) + tabp),
    ]:
        t_jit = bench(fn, args)
        t_py = bench(python_impl(fn), args)
        rows.append((name, t_jit, t_py))

    # full integrations: this process is the numba path
    run_simulation(config)  # warm
    t_sim_jit = run_simulation(config)
    env = dict(os.environ, ALKASIM_DISABLE_JIT="1")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--simulate-only"],
        env=env, capture_output=True, text=True, check=True)
    t_sim_py = float(out.stdout.strip())
    rows.append(("simulate %.0f s, h=1 s" % SIM_HORIZON, t_sim_jit, t_sim_py))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numba':>12}  {'python':>12}  {'speedup':>8}")
    for name, t_jit, t_py in rows:
        print(f"{name:<{width}}  {t_jit * 1e6:>10.2f}us  "
              f"{t_py * 1e6:>10.2f}us  {t_py / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
