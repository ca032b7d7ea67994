"""Exhaustive reference solver for desk-scale instances.

Enumerates every signed service permutation and vehicle assignment,
decoding each chromosome with the production decoder under every
co-optimal path combination, so the result bounds anything the heuristic
search can produce with the same arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

from .instances import Instance, MetricTables, build_metrics
from .routing import Chromosome, Evaluation, FleetConfig, RoutePlan, decode_best, plan_rank

SEARCH_SPACE_LIMIT = 10_000_000


class OracleSizeError(ValueError):
    """Search space too large to enumerate."""


@dataclass
class OracleResult:
    makespan: float
    violation: float
    feasible: bool
    chromosome: Chromosome
    plan: RoutePlan
    evaluation: Evaluation
    n_plans: int


def search_space_size(n_required: int, n_vehicles: int) -> int:
    return math.factorial(n_required) * 2 ** n_required * n_vehicles ** n_required


def exhaustive_solve(
    instance: Instance,
    fleet: FleetConfig,
    tau: float | None = None,
    delta: int | None = None,
    metrics: MetricTables | None = None,
) -> OracleResult:
    """Exact optimum by full enumeration.

    Returns the minimum feasible makespan; if nothing is feasible, the
    minimum-violation plan flagged infeasible.  Refuses instances whose
    plan count exceeds SEARCH_SPACE_LIMIT (or R > 5, or more than 4
    vehicles).
    """
    if tau is not None or delta is not None:
        fleet = replace(
            fleet,
            tau=fleet.tau if tau is None else tau,
            delta=fleet.delta if delta is None else delta,
        )
    R = instance.n_required
    nv = fleet.n_vehicles
    size = search_space_size(R, nv)
    if R > 5 or nv > 4 or size > SEARCH_SPACE_LIMIT:
        raise OracleSizeError(
            f"search space has {size} decoded plans "
            f"(R={R}, vehicles={nv}); limit is {SEARCH_SPACE_LIMIT} with R <= 5 "
            f"and at most 4 vehicles"
        )
    if metrics is None:
        metrics = build_metrics(instance)

    best_key = None
    best: OracleResult | None = None
    count = 0
    for perm in itertools.permutations(range(1, R + 1)):
        for signs in itertools.product((1, -1), repeat=R):
            seq = [g * s for g, s in zip(perm, signs)]
            for asg in itertools.product(range(1, nv + 1), repeat=R):
                count += 1
                ch = Chromosome(list(seq), list(asg))
                plan, ev = decode_best(ch, instance, metrics, fleet)
                key = plan_rank(ev)
                if best_key is None or key < best_key:
                    best_key = key
                    best = OracleResult(
                        makespan=ev.makespan,
                        violation=ev.violation,
                        feasible=ev.feasible,
                        chromosome=ch,
                        plan=plan,
                        evaluation=ev,
                        n_plans=0,
                    )
    best.n_plans = count
    return best
