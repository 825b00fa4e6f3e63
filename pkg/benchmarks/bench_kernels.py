"""Compare the compiled and pure-Python simulation kernels.

Times (1) the raw ``advance`` hot loop over 20,000 open-loop physics ticks and
(2) the full closed-loop LQR run of the 20,000-tick course, for every
available backend, and checks that the backends produce the same trajectory.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from rotvlab import kernels
from rotvlab.config import load_config
from rotvlab.model import compute_added_mass_coefficients
from rotvlab.params import ServoParams, VehicleParams
from rotvlab.scenarios import long_course_scenario, run

TICKS = 20_000


def bench_advance(backend: str, repeat: int) -> tuple[float, np.ndarray]:
    params = VehicleParams.from_config(load_config())
    prm = kernels.pack_vehicle(params, compute_added_mass_coefficients(params))
    sprm = kernels.pack_servo(ServoParams())
    cmd = np.zeros(3)                      # fins hold neutral; gentle free response
    dist = np.zeros(3)
    best = math.inf
    for _ in range(repeat):
        y = np.array([0.0, 17.0, 0.0, 0.01, 0.0, 0.01, 0.0])
        defl = np.zeros(3)
        out = np.zeros((TICKS, kernels.N_REC))
        t0 = time.perf_counter()
        done = kernels.advance(y, defl, cmd, dist, prm, sprm, 5.0, 0.0, TICKS, 1.0 / 200, out, 0,
                               backend=backend)
        best = min(best, time.perf_counter() - t0)
        if done != TICKS:
            raise RuntimeError(f"{backend} kernel stopped after {done} ticks")
    return best, y


def bench_course(backend: str, repeat: int) -> tuple[float, np.ndarray]:
    cfg = load_config()
    sc = long_course_scenario("lqr", TICKS)
    run(sc, cfg, backend=backend)          # warm the gain-schedule cache
    best, data = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj, _ = run(sc, cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
        data = traj.data
    return best, data


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default: {kernels.BACKEND})")
    adv, course = {}, {}
    for b in backends:
        adv[b] = bench_advance(b, args.repeat)
        course[b] = bench_course(b, args.repeat)
        print(f"{b:>7}: advance {TICKS} ticks {adv[b][0] * 1e3:8.1f} ms | "
              f"closed-loop course {course[b][0] * 1e3:8.1f} ms")
    if "cython" in adv:
        print(f"speed-up: advance x{adv['python'][0] / adv['cython'][0]:.1f}, "
              f"course x{course['python'][0] / course['cython'][0]:.1f}")
        d_adv = np.max(np.abs(adv["python"][1] - adv["cython"][1]))
        d_course = np.max(np.abs(course["python"][1] - course["cython"][1]))
        print(f"max backend difference: advance {d_adv:.3g}, course {d_course:.3g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
