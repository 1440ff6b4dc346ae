"""Convergence study for the 1D reference obstacle problem.

Solves the problem with obstacle 1/2 - x^2 on (-1, 1) at a sequence of
resolutions and reports the sup error against the closed-form solution
(contact on [-a, a], a = 1 - sqrt(2)/2, linear continuation outside).
"""
import argparse

import numpy as np

import qvigrid as q

A = 1.0 - np.sqrt(2.0) / 2.0


def exact(x):
    return np.where(np.abs(x) <= A, 0.5 - x ** 2,
                    (0.5 + A * A) - 2.0 * A * np.abs(x))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--resolutions", type=int, nargs="+",
                        default=[51, 101, 201, 401, 801])
    args = parser.parse_args()

    print(f"{'m':>6} {'h':>10} {'sup error':>12} {'order':>7}")
    prev = None
    for m in args.resolutions:
        g = q.build_grid([-1.0], [1.0], [m])
        d = q.preset("oracle1d", g)
        prob = q.ObstacleProblem(d["spec"], d["side"], d["obstacle"],
                                 d["f"], d["boundary_data"])
        u, rep = q.solve_obstacle(prob)
        err = float(np.max(np.abs(u.values - exact(g.axes[0]))))
        order = np.log2(prev / err) if prev else float("nan")
        print(f"{m:>6} {g.h:>10.5f} {err:>12.3e} {order:>7.2f}"
              f"   ({rep.iterations} sweeps)")
        prev = err


if __name__ == "__main__":
    main()
