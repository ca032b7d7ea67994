"""Full-scale sweep matching the complete experimental protocol.

This is the offline companion to the acceptance suite: it regenerates all
ten instance classes up to N=500/E=1000/R=100, then runs the full vehicle
grid (K in 1..3, M in 1..3) and the endurance ladder (tau in 0.5..2.0 h)
at the default search budget.  Expect multi-hour wall-clock on the large
classes; nothing here runs in CI.

Usage:
    python demos/offline_benchmark.py --out results/ [--jobs N] [--quick]

--quick trims the grid to a single seed and the three smallest classes,
useful for a dry run of the plumbing.
"""

import argparse
import os
import subprocess
import sys

CLASSES = [
    (50, 100, 15),
    (50, 100, 20),
    (100, 200, 25),
    (100, 200, 30),
    (200, 400, 40),
    (200, 400, 50),
    (300, 600, 50),
    (300, 700, 70),
    (400, 800, 80),
    (500, 1000, 100),
]


def run(cmd):
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="offline_results")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    classes = CLASSES[:3] if args.quick else CLASSES
    seeds = "1" if args.quick else "1..5"
    inst_dir = os.path.join(args.out, "instances")
    os.makedirs(inst_dir, exist_ok=True)

    for n, e, r in classes:
        run([
            sys.executable, "-m", "rppmtd.cli", "generate",
            "--nodes", str(n), "--edges", str(e), "--required", str(r),
            "--count", "5", "--seed", "1", "--out", inst_dir,
        ])

    # Vehicle-composition grid at fixed endurance.
    run([
        sys.executable, "-m", "rppmtd.cli", "benchmark",
        "--instances", os.path.join(inst_dir, "*.rpp"),
        "--grid", "K=1,2,3;M=1,2,3", "--delta", "5", "--tau-list", "1.0",
        "--seeds", seeds, "--jobs", str(args.jobs),
        "--out", os.path.join(args.out, "vehicle_grid.csv"),
    ])

    # Endurance ladder at the two-truck, two-drone fleet.
    run([
        sys.executable, "-m", "rppmtd.cli", "benchmark",
        "--instances", os.path.join(inst_dir, "*.rpp"),
        "--grid", "K=2;M=2", "--delta", "5",
        "--tau-list", "0.5,1.0,1.5,2.0",
        "--seeds", seeds, "--jobs", str(args.jobs),
        "--out", os.path.join(args.out, "endurance.csv"),
    ])

    print(f"results under {args.out}/")


if __name__ == "__main__":
    main()
