#!/usr/bin/env python3
"""Run every shipped synthetic experiment config in sequence.

The MNIST variants are skipped unless an IDX directory exists at
data/mnist relative to the repository root.
"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from poisonlab.cli import run
from poisonlab.serialize import read_json

ROOT = os.path.join(os.path.dirname(__file__), "..")
SYNTHETIC = [
    "fig1_small.json",
    "fig1_or_sweep.json",
    "fig2_gauss10.json",
    "fig3_curves_gauss.json",
    "d3_leastsq_gc.json",
    "d3_leastsq_gm.json",
    "d6_toy_blocked.json",
    "d6_toy_reachable.json",
    "d8_replacing.json",
    "defense_sever.json",
    "defense_dpa.json",
    "select_target.json",
]
MNIST = ["fig2_mnist17.json"]

if __name__ == "__main__":
    names = list(SYNTHETIC)
    if os.path.isdir(os.path.join(ROOT, "data", "mnist")):
        names += MNIST
    for name in names:
        path = os.path.join(ROOT, "configs", name)
        print(f"== {name}")
        outputs = run(read_json(path), base_dir=os.path.dirname(path))
        for key, out in outputs.items():
            print(f"   {key}: {out}")
