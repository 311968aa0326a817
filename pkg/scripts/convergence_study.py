#!/usr/bin/env python3
"""Refinement studies: observed order of the marching schemes, and optionally
the weak-residual ladder of the monotone-asymptotics scenario.

The order study solves a smooth heat problem and a smooth competition problem
on a 2N-1 grid ladder (time step quartered per level) and reports the slope
of the successive differences.  ``--residuals`` additionally reruns the
steady-state scenario at three (h, dt) levels and prints the worst
weak-form residual per level, which should fall by about 4x per halving.
"""

import argparse
import sys

import numpy as np

from parapos.analysis import elliptic_weak_residual, extract_steady_state
from parapos.coefficients import build_initial_field
from parapos.config import load_config_data
from parapos.fdm import Grid, SchemeConfig, estimate_order, solve
from parapos.model import LVCoefficients, SpatialDomain, build_lv_problem
from parapos.scenarios import s4_asymptotics

UNIT = SpatialDomain(((0.0, 1.0),))


def order_study(base_nodes, levels):
    grids = tuple(Grid(UNIT, ((base_nodes - 1) * 2**j + 1,))
                  for j in range(levels))

    def sine(amp):
        return lambda g: build_initial_field(
            g, [{"kind": "sine", "amplitude": amp}])

    def problem(d, beta, gamma, amp, horizon):
        lv = LVCoefficients(np.array([d]), (lambda t, x: beta,),
                            ((lambda t, x: gamma,),))
        return build_lv_problem(lv, UNIT, sine(amp)(grids[0]), horizon)

    cases = [
        ("heat / implicit Euler", problem(1.0, 0.0, 0.0, 1.0, 0.05),
         SchemeConfig(scheme="imex_be", dt=1e-3), sine(1.0)),
        ("competition / Heun", problem(0.01, 1.0, 1.0, 0.5, 1.0),
         SchemeConfig(scheme="erk2", dt=1e-2), sine(0.5)),
    ]
    for label, spec, scheme, rebuild in cases:
        est = estimate_order(spec, scheme, grids, rebuild_initial=rebuild)
        diffs = "  ".join(f"{d:.3e}" for d in est.diffs)
        print(f"{label:28s} nodes {est.nodes}  diffs {diffs}  "
              f"order {est.order:.3f}")


def residual_ladder():
    for nodes, dt in ((201, 0.01), (401, 0.005), (801, 0.0025)):
        data = s4_asymptotics()
        data["problem"]["grid"]["nodes"] = [nodes]
        data["scheme"]["dt"] = dt
        config = load_config_data(data)
        prob = config.build_problem()
        steady = extract_steady_state(solve(prob, config.scheme()))
        res = elliptic_weak_residual(
            steady.values[0], steady.values[1],
            tuple(config.analysis_data["limits"]), config.battery(),
            tuple(prob.lv.diffusion), grid=prob.initial.grid)
        print(f"steady-state battery  nodes={nodes:4d} dt={dt:<7g} "
              f"max|residual| = {np.abs(res).max():.3e}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--base-nodes", type=int, default=21,
                        help="coarsest grid size (default 21)")
    parser.add_argument("--levels", type=int, default=3,
                        help="ladder length, each level doubling (default 3)")
    parser.add_argument("--residuals", action="store_true",
                        help="also run the steady-state residual ladder")
    args = parser.parse_args(argv)

    order_study(args.base_nodes, args.levels)
    if args.residuals:
        residual_ladder()
    return 0


if __name__ == "__main__":
    sys.exit(main())
