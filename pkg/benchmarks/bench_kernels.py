"""Compare the numba and pure-numpy kernel implementations.

    python3 benchmarks/bench_kernels.py [--n 1000000] [--repeat 3]

Both flavours are imported directly from ``infoenv._kernels`` so the
``INFOENV_NO_NUMBA`` setting does not matter here.  Each kernel is called
once before timing so that numba compilation is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from infoenv import _kernels as K
from infoenv._accel import HAVE_NUMBA


def _cases(n: int, rng: np.random.Generator):
    arrivals = rng.geometric(0.5, n).astype(float)
    service = np.full(n, 2.2)
    cum_a, cum_d = K.departures_np(arrivals, service)
    q = np.array([[0.9, 0.1], [1 / 6, 5 / 6]])
    cum = np.ascontiguousarray(np.cumsum(q, axis=1))
    u = rng.random(n)
    symbols = rng.integers(0, 256, n)
    m = 64
    big = rng.random((m, m))
    big /= big.sum(axis=1, keepdims=True)
    lsc = np.exp(0.3 * (rng.random(m) * 4 - 4))
    v0 = np.full(m, 1.0 / m) * lsc
    mat = np.ascontiguousarray(lsc[:, None] * big)
    steps = max(1000, n // 100)
    return {
        "departures": lambda f: f(arrivals, service),
        "delays": lambda f: f(cum_a, cum_d, 1e-9),
        "markov_sample": lambda f: f(cum, 0, u),
        "recurrence": lambda f: f(symbols, 256),
        f"markov_log_path(m={m}, {steps} steps)": lambda f: f(v0, big, lsc, steps, 0.0, True),
        f"perron_root(m={m})": lambda f: f(mat, 1e-10, 1_000_000),
    }


def _time(call, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        call()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000, help="slots per trace")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':42s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}")
    for name, run in _cases(args.n, rng).items():
        base = name.split("(")[0]
        nb = getattr(K, f"{base}_nb")
        npf = getattr(K, f"{base}_np")
        run(nb)  # compile
        t_nb = _time(lambda: run(nb), args.repeat)
        t_np = _time(lambda: run(npf), args.repeat)
        print(f"{name:42s} {t_nb:11.4f} {t_np:11.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
