#!/usr/bin/env python3
"""OR heatmap sweep: threshold vs accuracy drop vs mixture gradient norm."""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from poisonlab.cli import run
from poisonlab.serialize import read_json

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs",
                      "fig1_or_sweep.json")

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=CONFIG)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    outputs = run(read_json(args.config), jobs=args.jobs,
                  base_dir=os.path.dirname(os.path.abspath(args.config)))
    for key, path in outputs.items():
        print(f"{key}: {path}")
