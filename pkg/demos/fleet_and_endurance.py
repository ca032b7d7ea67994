"""Sweep fleet composition, endurance, and the hop window on one instance.

Reproduces the three qualitative effects the solver is built around:
more trucks cut the makespan roughly in proportion, longer endurance
helps until sorties stop hitting the budget, and widening the hop window
never hurts.
"""

import math

from rppmtd import FleetConfig, GaConfig, build_metrics, generate_instance, solve

inst = generate_instance(50, 100, 15, grid_size=10.0, seed=21)
metrics = build_metrics(inst)
budget = dict(population_min=40, population_max=80, generations=40, ls_steps=8)

print(f"instance {inst.name}\n")

print("trucks x drones grid (makespan, minutes; delta=5, tau=1.0h)")
print("        M=1     M=2")
for trucks in (1, 2, 3):
    row = []
    for drones in (1, 2):
        fleet = FleetConfig(trucks=trucks, drones=drones, delta=5, tau=1.0)
        res = solve(inst, fleet, GaConfig(seed=1, **budget), metrics=metrics)
        row.append(res.best.evaluation.makespan * 60)
    print(f"K={trucks}   {row[0]:6.1f}  {row[1]:6.1f}")

print("\nendurance ladder (K=2, M=2, delta=5)")
for tau in (0.5, 1.0, 1.5, 2.0):
    fleet = FleetConfig(trucks=2, drones=2, delta=5, tau=tau)
    res = solve(inst, fleet, GaConfig(seed=1, **budget), metrics=metrics)
    print(f"tau={tau:>3}h  ->  {res.best.evaluation.makespan * 60:6.1f} min")

print("\nhop window (K=2, M=2, tau=1.0h); best-known accumulates since any")
print("plan legal under a small window stays legal under a larger one")
best = math.inf
for delta in (1, 2, 3, 5, 8, None):
    fleet = FleetConfig(trucks=2, drones=2, delta=delta, tau=1.0)
    res = solve(inst, fleet, GaConfig(seed=1, **budget), metrics=metrics)
    best = min(best, res.best.evaluation.makespan * 60)
    label = "inf" if delta is None else delta
    print(f"delta={label:>3}  ->  run {res.best.evaluation.makespan * 60:6.1f} min, "
          f"best-known {best:6.1f} min")
