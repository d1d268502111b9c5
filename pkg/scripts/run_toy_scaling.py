#!/usr/bin/env python3
"""Scaling dichotomy on the 3-point line dataset.

The blocked target (twice the stationary point, threshold ~0.66) plateaus
at every learning rate; scaling it down by 1.1 drops the threshold below
the 0.52 budget and the attack converges immediately.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

import poisonlab as pl

if __name__ == "__main__":
    toy = pl.toy_three_points()
    spec = pl.ModelSpec("logistic_binary", 2)
    w_star = np.array([0.0, np.log(2.0)])
    for label, target in (("2*w_star", 2 * w_star),
                          ("(2/1.1)*w_star", (2 / 1.1) * w_star)):
        rep = pl.tau_threshold(spec, target, toy)
        print(f"{label}: tau={rep.tau:.4f} alignment={rep.alignment:.6f}")
        for lr in (0.01, 0.1, 1.0):
            res = pl.gradient_canceling(toy, spec, target, 0.52,
                                        pl.AttackOptions(lr=lr, seed=2))
            print(f"  lr={lr}: initial merit={res.merit_trace[0]:.3e} "
                  f"final={res.final_merit:.3e}")
