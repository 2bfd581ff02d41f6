"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from ipd_lab import _pykernels
from ipd_lab.game import build_markov
from ipd_lab.rng import PCG64

try:
    from ipd_lab import _ckernels
except ImportError:
    _ckernels = None


def _cases(scale: float):
    rng = np.random.default_rng(0)
    M = build_markov(rng.random(4), rng.random(4))
    v1 = np.array([1.0, 0.0, 0.0, 0.0])
    w = rng.normal(size=4)
    A = rng.normal(size=(6, 6))
    pi0 = rng.dirichlet(np.ones(6))
    n_roll = int(100_000 * scale)
    n_path = int(100_000 * scale)
    n_ode = int(20_000 * scale)
    state = PCG64(1).split_state()
    return {
        f"cesaro_exact n={n_roll}": lambda k: k.cesaro_exact(M, v1, n_roll, w),
        f"markov_path n={n_path}": lambda k: k.markov_path(M, v1, n_path, *state),
        f"replicator_rk4 N=6 steps={n_ode}": lambda k: k.replicator_rk4(A, pi0, 0.01, n_ode, 100, 0.0),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes")
    args = ap.parse_args(argv)
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':36s}" + "".join(f"{name:>12s}" for name, _ in backends) + f"{'speedup':>10s}")
    for label, fn in _cases(args.scale).items():
        times = [min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for _, k in backends]
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) == 2 else ""
        print(f"{label:36s}" + "".join(f"{t:11.4f}s" for t in times) + f" {speed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
