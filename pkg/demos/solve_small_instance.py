"""Run the hybrid genetic search end to end on a small instance and check
it against the exhaustive reference solver.

Also prints the convergence trace columns that the trace CSV carries.
"""

import math

from rppmtd import FleetConfig, GaConfig, build_metrics, exhaustive_solve, generate_instance, solve

inst = generate_instance(10, 16, 4, grid_size=10.0, seed=105)
metrics = build_metrics(inst)
fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=0.25)
config = GaConfig(population_min=60, population_max=120, generations=40, ls_steps=8, seed=3)

print(f"instance {inst.name}: {inst.n_required} required arcs, tight 15 min endurance")
result = solve(inst, fleet, config, metrics=metrics)
ev = result.best.evaluation
print(f"search best: {ev.makespan * 60:.2f} min, feasible {result.feasible}")

optimum = exhaustive_solve(inst, fleet, metrics=metrics)
print(f"exhaustive optimum over {optimum.n_plans} plans: {optimum.makespan * 60:.2f} min")
print(f"search matches optimum exactly: {ev.makespan == optimum.makespan}")

print("\nconvergence trace (every 5th generation):")
print("gen  best_cost_h  best_feasible_min  p_mut  w_inf")
for row in result.trace.rows[::5]:
    feas = "-" if math.isnan(row.best_feasible_makespan) else f"{row.best_feasible_makespan * 60:.2f}"
    print(
        f"{row.generation:>3}  {row.best_cost:>11.4f}  {feas:>17}  "
        f"{row.mutation_rate:>5.2f}  {row.penalty_weight:>5.2f}"
    )
