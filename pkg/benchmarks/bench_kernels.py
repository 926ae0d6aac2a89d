"""Time the numba kernels against their pure-numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each numba kernel is called once before timing so compilation is excluded.
Both paths are also checked for agreement on the same inputs (largest
difference relative to the largest magnitude).
"""

import argparse
import time

import numpy as np

from impa import _kernels
from impa._accel import USE_NUMBA, configure_threads


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(1)
    z_seg = 18 + 32 * rng.random(400)
    theta = np.linspace(0.001, 2.0, 2001)
    xs = np.linspace(-1, 1, 401)
    ks = rng.uniform(0.05, 0.95, 2000)
    kps = np.sqrt(1 - ks * ks)

    def ellipk_nb():
        return np.array([_kernels.ellipk_pair_nb(k, kp) for k, kp in zip(ks, kps)])

    def ellipk_np():
        return np.array([_kernels.ellipk_pair_np(k, kp) for k, kp in zip(ks, kps)])

    return [
        ("cascade 400 seg x 2001 f",
         lambda: _kernels.cascade_segments_nb(z_seg, theta),
         lambda: _kernels.cascade_segments_np(z_seg, theta)),
        ("phi 401 points, A=1.06",
         lambda: _kernels.klopfenstein_phi_nb(xs, 1.0592, 1e-10),
         lambda: _kernels.klopfenstein_phi_np(xs, 1.0592, 1e-10)),
        ("ellipk pair x 2000 scalar calls", ellipk_nb, ellipk_np),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if not USE_NUMBA:
        raise SystemExit("numba disabled (IMPA_DISABLE_NUMBA set); nothing to compare")
    print(f"threads: {configure_threads()}")
    print(f"{'kernel':34s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s} {'rel diff':>10s}")
    for name, nb, npy in cases():
        a = nb()  # compile
        b = npy()
        a, b = np.asarray(a), np.asarray(b)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
        t_nb = best_of(nb, args.repeat)
        t_np = best_of(npy, args.repeat)
        print(f"{name:34s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
