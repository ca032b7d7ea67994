"""Hybrid genetic search over two-part chromosomes.

Fitness combines the penalized makespan with a diversity niche bonus:
F(I) = cost(I) * elite_ratio ** div(I), where div(I) is the normalized
Hamming distance to the individual's two nearest population neighbors.
Lower fitness is better.  The mutation rate and the endurance penalty
weight adapt over the run (stagnation boost, feasibility band controller).
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import local_search
from .instances import Instance, MetricTables, build_metrics
from .routing import (
    Chromosome,
    Evaluation,
    FleetConfig,
    RoutePlan,
    decode,
    decode_best,
    evaluate,
    penalized_cost,
    plan_rank,
    random_chromosome,
)


@dataclass
class GaConfig:
    """Search hyperparameters; defaults match the benchmark protocol."""

    population_min: int = 100
    population_max: int = 200
    elite_ratio: float = 0.8
    generations: int = 100
    stagnation_window: int = 10
    targeted_fraction: float = 0.1
    mutation_rate: float = 0.1
    mutation_rate_boost: float = 0.3
    penalty_init: float = 1.0
    penalty_min: float = 0.01
    penalty_max: float = 100.0
    ruin_fraction: float = 0.2
    ls_steps: int = 30
    or_opt_block: int = 3
    elite_keep_fraction: float = 0.01
    tournament_size: int = 2
    refine_fraction: float = 0.2
    sortie_min_arcs: int = 3
    sortie_exhaustive_max: int = 6
    sortie_shuffle_tries: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_min > self.population_max:
            raise ValueError("population_min must not exceed population_max")
        if not (0.0 < self.mutation_rate <= self.mutation_rate_boost <= 1.0):
            raise ValueError("need 0 < mutation_rate <= mutation_rate_boost <= 1")
        if not (self.penalty_min <= self.penalty_init <= self.penalty_max):
            raise ValueError("penalty_init outside [penalty_min, penalty_max]")
        if not (0.0 < self.ruin_fraction < 1.0):
            raise ValueError("ruin_fraction must be in (0, 1)")
        if self.ls_steps < 1 or self.or_opt_block < 1:
            raise ValueError("ls_steps and or_opt_block must be at least 1")

    def replace(self, **overrides) -> "GaConfig":
        return replace(self, **overrides)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(slots=True)
class Individual:
    chromosome: Chromosome
    plan: RoutePlan
    evaluation: Evaluation
    cost: float = math.inf
    div: float = 0.0
    fitness: float = math.inf


@dataclass(slots=True)
class GenerationStat:
    generation: int
    best_cost: float
    best_feasible_makespan: float  # nan until a feasible solution exists
    mean_fitness: float
    mutation_rate: float
    penalty_weight: float
    elapsed_s: float


CSV_COLUMNS = (
    "generation",
    "best_cost_h",
    "best_feasible_makespan_h",
    "mean_fitness",
    "mutation_rate",
    "penalty_weight",
)


@dataclass
class RunTrace:
    rows: list[GenerationStat] = field(default_factory=list)

    def append(self, row: GenerationStat) -> None:
        self.rows.append(row)

    def write_csv(self, path) -> None:
        """Deterministic per-generation trace; wall clock goes to the timing sidecar."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in self.rows:
                feas = "" if math.isnan(r.best_feasible_makespan) else repr(r.best_feasible_makespan)
                fh.write(
                    f"{r.generation},{r.best_cost!r},{feas},"
                    f"{r.mean_fitness!r},{r.mutation_rate!r},{r.penalty_weight!r}\n"
                )

    def write_timing_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("generation,elapsed_s\n")
            for r in self.rows:
                fh.write(f"{r.generation},{r.elapsed_s!r}\n")

    @classmethod
    def read_csv(cls, path) -> "RunTrace":
        trace = cls()
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != ",".join(CSV_COLUMNS):
                raise ValueError(f"{path}: unexpected trace header '{header}'")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                gen, cost, feas, fit, pm, w = line.split(",")
                trace.append(
                    GenerationStat(
                        generation=int(gen),
                        best_cost=float(cost),
                        best_feasible_makespan=float(feas) if feas else math.nan,
                        mean_fitness=float(fit),
                        mutation_rate=float(pm),
                        penalty_weight=float(w),
                        elapsed_s=0.0,
                    )
                )
        return trace


class Evaluator:
    """Decodes chromosomes into evaluated individuals with a shared RNG."""

    def __init__(self, instance: Instance, metrics: MetricTables, fleet: FleetConfig,
                 rng: random.Random):
        self.instance = instance
        self.metrics = metrics
        self.fleet = fleet
        self.rng = rng

    def build(self, chromosome: Chromosome) -> Individual:
        plan = decode(chromosome, self.instance, self.metrics, self.fleet, self.rng)
        return Individual(chromosome=chromosome, plan=plan,
                          evaluation=evaluate(plan, self.fleet))

    def build_best(self, chromosome: Chromosome) -> Individual:
        """Individual under the best co-optimal path combination."""
        plan, ev = decode_best(chromosome, self.instance, self.metrics, self.fleet)
        return Individual(chromosome=chromosome.copy(), plan=plan, evaluation=ev)


def diversity(individual: Individual, population: list[Individual]) -> float:
    """Mean normalized Hamming distance to the two nearest other members."""
    others = [ind for ind in population if ind is not individual]
    if len(others) < 2:
        return 1.0
    seq = individual.chromosome.service_seq
    asg = individual.chromosome.assignment
    norm = 2 * len(seq)
    dists = []
    for other in others:
        d = sum(a != b for a, b in zip(seq, other.chromosome.service_seq))
        d += sum(a != b for a, b in zip(asg, other.chromosome.assignment))
        dists.append(d / norm)
    dists.sort()
    return (dists[0] + dists[1]) / 2.0


def _population_diversity(population: list[Individual]) -> list[float]:
    """Vectorized diversity for a whole population (same definition as diversity)."""
    n = len(population)
    if n < 3:
        return [1.0] * n
    seq = np.array([ind.chromosome.service_seq for ind in population], dtype=np.int64)
    asg = np.array([ind.chromosome.assignment for ind in population], dtype=np.int64)
    dmat = (seq[:, None, :] != seq[None, :, :]).sum(axis=2)
    dmat += (asg[:, None, :] != asg[None, :, :]).sum(axis=2)
    dmat = dmat / (2.0 * seq.shape[1])
    np.fill_diagonal(dmat, np.inf)
    nearest = np.partition(dmat, 1, axis=1)[:, :2]
    return ((nearest[:, 0] + nearest[:, 1]) / 2.0).tolist()


def fitness(individual: Individual, population: list[Individual], config: GaConfig) -> float:
    """Penalized cost contracted by the diversity niche factor."""
    div = diversity(individual, population)
    return individual.cost * config.elite_ratio ** div


def _annotate(population: list[Individual], config: GaConfig, w_inf: float) -> None:
    divs = _population_diversity(population)
    ratio = config.elite_ratio
    for ind, div in zip(population, divs):
        ind.cost = penalized_cost(ind.evaluation, w_inf)
        ind.div = div
        ind.fitness = ind.cost * ratio ** div


def feasible_fraction(population: list[Individual]) -> float:
    if not population:
        return 0.0
    return sum(1 for ind in population if ind.evaluation.feasible) / len(population)


def targeted_chromosome(
    instance: Instance,
    metrics: MetricTables,
    fleet: FleetConfig,
    rng: random.Random,
    noise: float = 0.0,
) -> Chromosome:
    """Two-step greedy seed: nearest-endpoint ordering, then a projected
    makespan-minimizing vehicle scan.

    ``noise`` perturbs greedy comparisons multiplicatively so repeated seeds
    differ; 0 gives the deterministic greedy.
    """
    R = instance.n_required
    dist = metrics.truck_node_dist
    eu = metrics.euclid_dist
    endpoints = metrics.req_endpoint_index
    rlen = metrics.req_length
    depot = instance.depot
    inv_vt = 1.0 / instance.truck_speed
    inv_vd = 1.0 / instance.drone_speed

    unserved = set(range(1, R + 1))
    seq: list[int] = []
    cur = depot
    while unserved:
        best_key = None
        best = None
        for task in sorted(unserved):
            u, v = endpoints[task]
            for entry, leave, gene in ((u, v, task), (v, u, -task)):
                inc = dist[cur][entry]
                if noise:
                    inc *= 1.0 + noise * rng.random()
                key = (inc, task, 0 if gene > 0 else 1)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (gene, leave)
        gene, cur = best
        seq.append(gene)
        unserved.discard(abs(gene))

    K, M = fleet.trucks, fleet.drones
    V = M + 1
    truck_time = [0.0] * K
    truck_node = [depot] * K
    # Per drone: (busy-until time, airborne node or -1, flight used this sortie).
    drone_state: dict[int, tuple[float, int, float]] = {}
    assignment: list[int] = []

    def fleet_completion(skip_truck: int | None, skip_drone: int | None) -> float:
        comp = 0.0
        for j in range(K):
            if j == skip_truck:
                continue
            c = truck_time[j] + dist[truck_node[j]][depot] * inv_vt
            if c > comp:
                comp = c
        for vid, (busy, node, _used) in drone_state.items():
            if vid == skip_drone:
                continue
            if node >= 0:
                busy += eu[node][depot] * inv_vd
            if busy > comp:
                comp = busy
        return comp

    for gene in seq:
        u, v = endpoints[abs(gene)]
        entry, leave = (u, v) if gene > 0 else (v, u)
        length = rlen[abs(gene)]
        best_key = None
        best_pick = None
        for k in range(K):
            tid = k * V + 1
            new_t = truck_time[k] + (dist[truck_node[k]][entry] + length) * inv_vt
            completion = max(
                fleet_completion(k, None), new_t + dist[leave][depot] * inv_vt
            )
            if noise:
                completion *= 1.0 + noise * rng.random()
            key = (completion, tid)
            if best_key is None or key < best_key:
                best_key = key
                best_pick = ("truck", k, tid, new_t)
            base = truck_node[k]
            others = fleet_completion(None, -1)
            for d in range(M):
                dvid = tid + 1 + d
                busy, airborne, used = drone_state.get(dvid, (0.0, -1, 0.0))
                if airborne >= 0:
                    # Extend the open sortie if the budget still allows a return.
                    hop = (eu[airborne][entry] + length) * inv_vd
                    new_used = used + hop
                    if new_used + eu[leave][base] * inv_vd > fleet.tau:
                        airborne = -1  # close it and start fresh below
                    else:
                        ready = busy + hop
                        completion = max(
                            fleet_completion(None, dvid),
                            ready + eu[leave][base] * inv_vd,
                        )
                        if noise:
                            completion *= 1.0 + noise * rng.random()
                        key = (completion, dvid)
                        if best_key is None or key < best_key:
                            best_key = key
                            best_pick = ("extend", k, dvid, (ready, leave, new_used))
                        continue
                flight = (eu[base][entry] + length) * inv_vd
                if flight + eu[leave][base] * inv_vd > fleet.tau:
                    continue
                ready = max(truck_time[k], busy) + flight
                completion = max(
                    fleet_completion(None, dvid), ready + eu[leave][base] * inv_vd
                )
                if noise:
                    completion *= 1.0 + noise * rng.random()
                key = (completion, dvid)
                if best_key is None or key < best_key:
                    best_key = key
                    best_pick = ("launch", k, dvid, (ready, leave, flight))
        kind, k, vid, value = best_pick
        if kind == "truck":
            truck_time[k] = value
            truck_node[k] = leave
        else:
            drone_state[vid] = value
        assignment.append(vid)

    return Chromosome(seq, assignment)


def targeted_individual(
    instance: Instance,
    metrics: MetricTables,
    fleet: FleetConfig,
    rng: random.Random,
    noise: float = 0.0,
) -> Individual:
    ch = targeted_chromosome(instance, metrics, fleet, rng, noise=noise)
    plan = decode(ch, instance, metrics, fleet, rng)
    return Individual(chromosome=ch, plan=plan, evaluation=evaluate(plan, fleet))


def initial_population(
    instance: Instance,
    config: GaConfig,
    fleet: FleetConfig,
    rng: random.Random,
    metrics: MetricTables | None = None,
    evaluator: Evaluator | None = None,
) -> list[Individual]:
    """targeted_fraction of the population is greedy-seeded, the rest random."""
    if metrics is None:
        metrics = build_metrics(instance)
    if evaluator is None:
        evaluator = Evaluator(instance, metrics, fleet, rng)
    n = config.population_min
    n_targeted = math.ceil(config.targeted_fraction * n)
    population: list[Individual] = []
    for i in range(min(n_targeted, n)):
        noise = 0.0 if i == 0 else 0.25
        ch = targeted_chromosome(instance, metrics, fleet, rng, noise=noise)
        population.append(evaluator.build(ch))
    while len(population) < n:
        population.append(evaluator.build(random_chromosome(instance.n_required, fleet, rng)))
    return population


def tournament_select(population: list[Individual], rng: random.Random) -> Individual:
    """Binary tournament on fitness; exact ties are broken uniformly."""
    a = population[rng.randrange(len(population))]
    b = population[rng.randrange(len(population))]
    if a.fitness < b.fitness:
        return a
    if b.fitness < a.fitness:
        return b
    return a if rng.random() < 0.5 else b


def crossover_ox(p1: Chromosome, p2: Chromosome, rng: random.Random,
                 cuts: tuple[int, int] | None = None) -> Chromosome:
    """Order crossover: keep p1's segment, fill from p2 cyclically after the
    second cut, skipping ids already present.  Assignments travel with genes."""
    n = len(p1.service_seq)
    if cuts is None:
        i, j = rng.randrange(n), rng.randrange(n)
        if i > j:
            i, j = j, i
    else:
        i, j = cuts
    child_seq = [0] * n
    child_asg = [0] * n
    used = set()
    for p in range(i, j + 1):
        child_seq[p] = p1.service_seq[p]
        child_asg[p] = p1.assignment[p]
        used.add(abs(p1.service_seq[p]))
    slots = list(range(j + 1, n)) + list(range(0, i))
    filled = 0
    for off in range(n):
        src = (j + 1 + off) % n
        gene = p2.service_seq[src]
        if abs(gene) in used:
            continue
        pos = slots[filled]
        child_seq[pos] = gene
        child_asg[pos] = p2.assignment[src]
        used.add(abs(gene))
        filled += 1
    return Chromosome(child_seq, child_asg)


def crossover_pmx(p1: Chromosome, p2: Chromosome, rng: random.Random,
                  cuts: tuple[int, int] | None = None) -> Chromosome:
    """Partially mapped crossover on absolute ids; duplicate ids outside the
    exchanged segment are resolved through the segment mapping.  Signs and
    assignments come from whichever parent donates the gene."""
    n = len(p1.service_seq)
    if cuts is None:
        i, j = rng.randrange(n), rng.randrange(n)
        if i > j:
            i, j = j, i
    else:
        i, j = cuts
    child_seq = [0] * n
    child_asg = [0] * n
    seg_pos = {abs(p1.service_seq[p]): p for p in range(i, j + 1)}
    p2_pos = {abs(g): p for p, g in enumerate(p2.service_seq)}
    for p in range(i, j + 1):
        child_seq[p] = p1.service_seq[p]
        child_asg[p] = p1.assignment[p]
    for p in list(range(0, i)) + list(range(j + 1, n)):
        cand = abs(p2.service_seq[p])
        while cand in seg_pos:
            cand = abs(p2.service_seq[seg_pos[cand]])
        src = p2_pos[cand]
        child_seq[p] = p2.service_seq[src]
        child_asg[p] = p2.assignment[src]
    return Chromosome(child_seq, child_asg)


def _system_positions(ch: Chromosome, lo: int, hi: int) -> list[int]:
    return [p for p, v in enumerate(ch.assignment) if lo <= v <= hi]


def crossover_segment_preserving(
    p1: Chromosome,
    p2: Chromosome,
    fleet: FleetConfig,
    rng: random.Random,
    system: int | None = None,
) -> tuple[Chromosome, Chromosome]:
    """Recombine only one truck system's task subsequence.

    The two extracted segments are extended to their id union (missing ids
    appended in the opposite segment's order), recombined with OX or PMX,
    and projected back onto each parent's own id set at the original
    positions.  Assignments outside the chosen system are clamped to the
    base parent's, so untouched systems keep their task multisets.
    """
    V = fleet.drones + 1
    s = rng.randrange(fleet.trucks) if system is None else system
    lo, hi = s * V + 1, (s + 1) * V
    pos1 = _system_positions(p1, lo, hi)
    pos2 = _system_positions(p2, lo, hi)
    if not pos1 or not pos2:
        return crossover_ox(p1, p2, rng), crossover_ox(p2, p1, rng)

    seg1 = Chromosome([p1.service_seq[p] for p in pos1], [p1.assignment[p] for p in pos1])
    seg2 = Chromosome([p2.service_seq[p] for p in pos2], [p2.assignment[p] for p in pos2])
    ids1 = {abs(g) for g in seg1.service_seq}
    ids2 = {abs(g) for g in seg2.service_seq}
    ext1 = Chromosome(list(seg1.service_seq), list(seg1.assignment))
    ext2 = Chromosome(list(seg2.service_seq), list(seg2.assignment))
    for g, a in zip(seg2.service_seq, seg2.assignment):
        if abs(g) not in ids1:
            ext1.service_seq.append(g)
            ext1.assignment.append(a)
    for g, a in zip(seg1.service_seq, seg1.assignment):
        if abs(g) not in ids2:
            ext2.service_seq.append(g)
            ext2.assignment.append(a)

    cross = crossover_ox if rng.random() < 0.5 else crossover_pmx
    rec1 = cross(ext1, ext2, rng)
    rec2 = cross(ext2, ext1, rng)

    out = []
    for base, own_ids, positions, rec in ((p1, ids1, pos1, rec1), (p2, ids2, pos2, rec2)):
        base_asg = {abs(g): a for g, a in zip(base.service_seq, base.assignment)}
        child = base.copy()
        picked = [(g, a) for g, a in zip(rec.service_seq, rec.assignment) if abs(g) in own_ids]
        for p, (g, a) in zip(positions, picked):
            child.service_seq[p] = g
            child.assignment[p] = a if lo <= a <= hi else base_asg[abs(g)]
        out.append(child)
    return out[0], out[1]


def mutate(chromosome: Chromosome, p_now: float, fleet: FleetConfig,
           rng: random.Random) -> Chromosome:
    """With probability p_now apply one of: swap, inversion (signs flipped),
    or reassignment to a different vehicle."""
    if rng.random() >= p_now:
        return chromosome
    ch = chromosome.copy()
    n = len(ch.service_seq)
    op = rng.randrange(3)
    if op == 0 and n >= 2:
        i, j = rng.sample(range(n), 2)
        ch.service_seq[i], ch.service_seq[j] = ch.service_seq[j], ch.service_seq[i]
        ch.assignment[i], ch.assignment[j] = ch.assignment[j], ch.assignment[i]
    elif op == 1 and n >= 2:
        i, j = sorted(rng.sample(range(n), 2))
        ch.service_seq[i:j + 1] = [-g for g in reversed(ch.service_seq[i:j + 1])]
        ch.assignment[i:j + 1] = ch.assignment[i:j + 1][::-1]
    elif op == 2:
        nv = fleet.n_vehicles
        if nv >= 2:
            p = rng.randrange(n)
            alt = rng.randint(1, nv - 1)
            if alt >= ch.assignment[p]:
                alt += 1
            ch.assignment[p] = alt
    return ch


@dataclass
class ScheduleState:
    """Running mutation-rate and penalty-weight schedules."""

    config: GaConfig
    best_cost: float = math.inf
    stagnation: int = 0
    p_now: float = field(init=False)
    w_inf: float = field(init=False)

    def __post_init__(self) -> None:
        self.p_now = self.config.mutation_rate
        self.w_inf = self.config.penalty_init


def adapt_schedules(state: ScheduleState, gen_best_cost: float,
                    feas_fraction: float) -> tuple[float, float]:
    """Boost mutation after stagnation_window unimproved generations; steer
    the penalty weight toward a 20..80% feasible population."""
    cfg = state.config
    if gen_best_cost < state.best_cost - 1e-12:
        state.best_cost = gen_best_cost
        state.stagnation = 0
        state.p_now = cfg.mutation_rate
    else:
        state.stagnation += 1
        if state.stagnation >= cfg.stagnation_window:
            state.p_now = cfg.mutation_rate_boost
    if feas_fraction < 0.2:
        state.w_inf = min(cfg.penalty_max, state.w_inf * 1.2)
    elif feas_fraction > 0.8:
        state.w_inf = max(cfg.penalty_min, state.w_inf / 1.2)
    return state.p_now, state.w_inf


@dataclass
class SearchContext:
    instance: Instance
    metrics: MetricTables
    fleet: FleetConfig
    config: GaConfig
    rng: random.Random
    evaluator: Evaluator
    schedule: ScheduleState


def generation_step(population: list[Individual], context: SearchContext) -> list[Individual]:
    """One generation: breed offspring up to the pool cap, refine the top
    fitness share, then retain population_min individuals (cost elites are
    kept unconditionally)."""
    cfg = context.config
    rng = context.rng
    w_inf = context.schedule.w_inf
    p_now = context.schedule.p_now
    fleet = context.fleet

    _annotate(population, cfg, w_inf)
    n_offspring = cfg.population_max - len(population)
    offspring: list[Individual] = []
    while len(offspring) < n_offspring:
        pa = tournament_select(population, rng)
        pb = tournament_select(population, rng)
        pick = rng.randrange(3)
        if pick == 0:
            children = [crossover_ox(pa.chromosome, pb.chromosome, rng)]
        elif pick == 1:
            children = [crossover_pmx(pa.chromosome, pb.chromosome, rng)]
        else:
            children = list(
                crossover_segment_preserving(pa.chromosome, pb.chromosome, fleet, rng)
            )
        for ch in children:
            ch = mutate(ch, p_now, fleet, rng)
            offspring.append(context.evaluator.build(ch))
    del offspring[n_offspring:]

    pool = population + offspring
    _annotate(pool, cfg, w_inf)

    n_refine = int(round(cfg.refine_fraction * len(pool)))
    if n_refine:
        ls_ctx = local_search.LsContext(
            instance=context.instance,
            metrics=context.metrics,
            fleet=fleet,
            config=cfg,
            w_inf=w_inf,
            rng=rng,
            build=context.evaluator.build,
        )
        order = sorted(range(len(pool)), key=lambda i: (pool[i].fitness, i))
        for i in order[:n_refine]:
            pool[i] = local_search.refine(pool[i], ls_ctx)
        _annotate(pool, cfg, w_inf)

    n_elite = max(1, math.ceil(cfg.elite_keep_fraction * cfg.population_min))
    by_cost = sorted(range(len(pool)), key=lambda i: (pool[i].cost, i))
    chosen = by_cost[:n_elite]
    chosen_set = set(chosen)
    genotypes = {
        (tuple(pool[i].chromosome.service_seq), tuple(pool[i].chromosome.assignment))
        for i in chosen
    }
    by_fitness = sorted(range(len(pool)), key=lambda i: (pool[i].fitness, i))
    # First pass skips exact duplicates so the bounded pool stays spread out;
    # a second pass tops the population up if distinct genotypes run short.
    for i in by_fitness:
        if len(chosen) >= cfg.population_min:
            break
        if i in chosen_set:
            continue
        key = (
            tuple(pool[i].chromosome.service_seq),
            tuple(pool[i].chromosome.assignment),
        )
        if key in genotypes:
            continue
        genotypes.add(key)
        chosen.append(i)
        chosen_set.add(i)
    for i in by_fitness:
        if len(chosen) >= cfg.population_min:
            break
        if i not in chosen_set:
            chosen.append(i)
            chosen_set.add(i)
    return [pool[i] for i in chosen]


@dataclass
class SolveResult:
    best: Individual
    trace: RunTrace
    feasible: bool


def solve(
    instance: Instance,
    fleet: FleetConfig,
    config: GaConfig,
    metrics: MetricTables | None = None,
) -> SolveResult:
    """Run the full hybrid search and return the best individual found.

    The returned best is re-decoded under the best co-optimal path
    combination, so repeated runs with one seed are reproducible and final
    plans do not depend on a lucky path sample.  If no feasible solution is
    found the lowest-violation individual is returned with feasible=False.
    """
    if metrics is None:
        metrics = build_metrics(instance)
    rng = random.Random(config.seed)
    evaluator = Evaluator(instance, metrics, fleet, rng)
    schedule = ScheduleState(config)
    context = SearchContext(
        instance=instance,
        metrics=metrics,
        fleet=fleet,
        config=config,
        rng=rng,
        evaluator=evaluator,
        schedule=schedule,
    )
    trace = RunTrace()
    t0 = time.perf_counter()

    best_any: Individual | None = None
    best_feasible: Individual | None = None
    best_cost_running = math.inf

    def consider(ind: Individual) -> None:
        nonlocal best_any, best_feasible
        key = plan_rank(ind.evaluation)
        if best_any is None or key < plan_rank(best_any.evaluation):
            polished = evaluator.build_best(ind.chromosome)
            if plan_rank(polished.evaluation) > key:
                polished = Individual(
                    chromosome=ind.chromosome.copy(), plan=ind.plan,
                    evaluation=ind.evaluation,
                )
            if best_any is None or plan_rank(polished.evaluation) < plan_rank(best_any.evaluation):
                best_any = polished
            if polished.evaluation.feasible and (
                best_feasible is None
                or polished.evaluation.makespan < best_feasible.evaluation.makespan
            ):
                best_feasible = polished

    def record(generation: int, population: list[Individual]) -> None:
        nonlocal best_cost_running
        gen_best = min(ind.cost for ind in population)
        champion_idx = min(range(len(population)), key=lambda i: (population[i].cost, i))
        consider(population[champion_idx])
        feas_idx = [i for i, ind in enumerate(population) if ind.evaluation.feasible]
        if feas_idx:
            pick = min(feas_idx, key=lambda i: (population[i].evaluation.makespan, i))
            consider(population[pick])
        if gen_best < best_cost_running:
            best_cost_running = gen_best
        trace.append(
            GenerationStat(
                generation=generation,
                best_cost=best_cost_running,
                best_feasible_makespan=(
                    best_feasible.evaluation.makespan if best_feasible else math.nan
                ),
                mean_fitness=sum(ind.fitness for ind in population) / len(population),
                mutation_rate=schedule.p_now,
                penalty_weight=schedule.w_inf,
                elapsed_s=time.perf_counter() - t0,
            )
        )
        adapt_schedules(schedule, gen_best, feasible_fraction(population))

    population = initial_population(
        instance, config, fleet, rng, metrics=metrics, evaluator=evaluator
    )
    _annotate(population, config, schedule.w_inf)
    record(0, population)
    for gen in range(1, config.generations + 1):
        population = generation_step(population, context)
        record(gen, population)

    best = best_feasible if best_feasible is not None else best_any
    best.cost = penalized_cost(best.evaluation, schedule.w_inf)
    return SolveResult(best=best, trace=trace, feasible=best_feasible is not None)
