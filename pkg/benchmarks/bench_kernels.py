"""Compare the numba and pure-numpy paths of the hot kernels.

    python benchmarks/bench_kernels.py [--blocks 2000] [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from cuebar import _kernels, ecc


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (includes JIT compilation for numba)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--blocks", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    words = ecc.ecc_encode_blocks(rng.integers(0, 2, (args.blocks, ecc.K), dtype=np.uint8))
    noisy = words.copy()
    for row in noisy:
        row[rng.choice(ecc.N, size=rng.integers(0, 6), replace=False)] ^= 1

    img = rng.integers(0, 3, (400, 300, 3), dtype=np.uint8)
    th = np.deg2rad(3.0)
    inv = np.array([[np.cos(th), -np.sin(th), 5.0], [np.sin(th), np.cos(th), -4.0]])
    fill = np.zeros(3, dtype=np.uint8)

    cases = {
        f"bch decode x{args.blocks}": (
            lambda: _kernels.decode_blocks_numpy(noisy, ecc.GF_EXP, ecc.GF_LOG),
            lambda: _kernels.decode_blocks_numba(noisy, ecc.GF_EXP, ecc.GF_LOG),
        ),
        "nn warp 400x300x3": (
            lambda: _kernels.warp_nn_numpy(img, inv, (400, 300), fill),
            lambda: _kernels.warp_nn_numba(img, inv, (400, 300), fill),
        ),
    }
    a, b = cases[f"bch decode x{args.blocks}"]
    assert all(np.array_equal(x, y) for x, y in zip(a(), b())), "kernels disagree"

    print(f"{'kernel':<24}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (f_np, f_nb) in cases.items():
        t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
        print(f"{name:<24}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
