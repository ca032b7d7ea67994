"""Bounded first-improvement refinement with five neighborhood moves.

Each refinement step draws one operator uniformly, re-evaluates, and keeps
the move only when the penalized cost strictly decreases, so refine is
cost-monotone.  All operators map valid chromosomes to valid chromosomes.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Callable

from .instances import Instance, MetricTables
from .routing import Chromosome, FleetConfig, penalized_cost


@dataclass
class LsContext:
    """Everything a refinement pass needs, including an individual builder."""

    instance: Instance
    metrics: MetricTables
    fleet: FleetConfig
    config: object  # GaConfig; duck-typed to avoid a circular import
    w_inf: float
    rng: random.Random
    build: Callable[[Chromosome], object]


def refine(individual, context: LsContext):
    """Up to ls_steps first-improvement iterations over the five operators."""
    cfg = context.config
    rng = context.rng
    current = individual
    current.cost = penalized_cost(current.evaluation, context.w_inf)
    for _ in range(cfg.ls_steps):
        op = rng.randrange(5)
        candidate = None
        if op == 0:
            ch = op_subseq_reversal(current.chromosome, rng)
            if ch is not None:
                candidate = context.build(ch)
        elif op == 1:
            ch = op_or_opt(current.chromosome, cfg.or_opt_block, rng)
            if ch is not None:
                candidate = context.build(ch)
        elif op == 2:
            ch = op_sortie_opt(current, context, rng)
            if ch is not None:
                candidate = context.build(ch)
        elif op == 3:
            candidate = op_greedy_reassign(current, context, rng)
        else:
            candidate = context.build(op_ruin_construct(current, context, rng))
        if candidate is None:
            continue
        candidate.cost = penalized_cost(candidate.evaluation, context.w_inf)
        if candidate.cost < current.cost:
            current = candidate
    return current


def op_subseq_reversal(
    chromosome: Chromosome,
    rng: random.Random,
    span: tuple[int, int] | None = None,
) -> Chromosome | None:
    """Reverse a random subsequence of both parts, flipping traversal signs."""
    n = len(chromosome.service_seq)
    if span is None:
        i, j = rng.randrange(n), rng.randrange(n)
        if i > j:
            i, j = j, i
    else:
        i, j = span
    if i == j:
        return None
    ch = chromosome.copy()
    ch.service_seq[i:j + 1] = [-g for g in reversed(ch.service_seq[i:j + 1])]
    ch.assignment[i:j + 1] = ch.assignment[i:j + 1][::-1]
    return ch


def op_or_opt(chromosome: Chromosome, block_max: int, rng: random.Random) -> Chromosome | None:
    """Relocate a contiguous block of up to block_max tasks, order intact."""
    n = len(chromosome.service_seq)
    size = rng.randint(1, min(block_max, n))
    if n - size == 0:
        return None
    start = rng.randrange(n - size + 1)
    target = rng.randrange(n - size)
    if target >= start:
        target += 1
    seq = list(chromosome.service_seq)
    asg = list(chromosome.assignment)
    block_seq = seq[start:start + size]
    block_asg = asg[start:start + size]
    del seq[start:start + size]
    del asg[start:start + size]
    seq[target:target] = block_seq
    asg[target:target] = block_asg
    return Chromosome(seq, asg)


def op_sortie_opt(individual, context: LsContext, rng: random.Random) -> Chromosome | None:
    """Re-sequence one multi-arc sortie by flight time.

    Sorties with at least sortie_min_arcs tasks are candidates; orders and
    orientations are enumerated exhaustively up to sortie_exhaustive_max
    arcs, otherwise best-of-N random shuffles.  Launch and recovery nodes
    stay fixed for the comparison.
    """
    cfg = context.config
    sorties = [s for s in individual.plan.sorties if len(s.genes) >= cfg.sortie_min_arcs]
    if not sorties:
        return None
    sortie = sorties[rng.randrange(len(sorties))]
    genes = list(sortie.genes)
    n = len(genes)
    eu = context.metrics.euclid_dist
    endpoints = context.metrics.req_endpoint_index
    rlen = context.metrics.req_length
    inv_vd = 1.0 / context.instance.drone_speed
    launch = sortie.launch_node
    recovery = sortie.recovery_node

    def best_oriented(perm: tuple[int, ...]) -> tuple[float, tuple[int, ...]]:
        """Minimum flight over the 2^n orientation choices of a fixed order,
        via a two-state chain DP (state = exit endpoint of the last arc)."""
        states = []  # per task: ((cost_fwd, cost_rev), (choice_fwd, choice_rev))
        prev_fwd = prev_rev = 0.0
        prev_exit_fwd = prev_exit_rev = launch
        for g in perm:
            u, v = endpoints[abs(g)]
            length = rlen[abs(g)]
            # Forward orientation enters at u, leaves at v; reverse swaps.
            via_fwd_in = (prev_fwd + eu[prev_exit_fwd][u],
                          prev_rev + eu[prev_exit_rev][u])
            via_rev_in = (prev_fwd + eu[prev_exit_fwd][v],
                          prev_rev + eu[prev_exit_rev][v])
            pick_f = 0 if via_fwd_in[0] <= via_fwd_in[1] else 1
            pick_r = 0 if via_rev_in[0] <= via_rev_in[1] else 1
            cost_f = via_fwd_in[pick_f] + length
            cost_r = via_rev_in[pick_r] + length
            states.append((pick_f, pick_r))
            prev_fwd, prev_rev = cost_f, cost_r
            prev_exit_fwd, prev_exit_rev = v, u
        end_fwd = prev_fwd + eu[prev_exit_fwd][recovery]
        end_rev = prev_rev + eu[prev_exit_rev][recovery]
        choice = 0 if end_fwd <= end_rev else 1
        total = (end_fwd if choice == 0 else end_rev) * inv_vd
        orient = [0] * n
        for i in range(n - 1, -1, -1):
            orient[i] = choice
            choice = states[i][choice]
        order = tuple(
            g if o == 0 else -g for g, o in zip((abs(x) for x in perm), orient)
        )
        return total, order

    best_flight = sortie.travel_time
    best_order = None
    if n <= cfg.sortie_exhaustive_max:
        for perm in itertools.permutations(genes):
            f, order = best_oriented(perm)
            if f < best_flight:
                best_flight = f
                best_order = order
    else:
        for _ in range(cfg.sortie_shuffle_tries):
            shuffled = list(genes)
            rng.shuffle(shuffled)
            f, order = best_oriented(tuple(shuffled))
            if f < best_flight:
                best_flight = f
                best_order = order
    if best_order is None:
        return None

    ids = {abs(g) for g in genes}
    ch = individual.chromosome.copy()
    positions = [p for p, g in enumerate(ch.service_seq) if abs(g) in ids]
    for p, g in zip(positions, best_order):
        ch.service_seq[p] = g
    return ch


def op_greedy_reassign(individual, context: LsContext, rng: random.Random):
    """Try every alternative vehicle for one random task; return the best
    strictly improving reassignment, else None."""
    fleet = context.fleet
    nv = fleet.n_vehicles
    if nv < 2:
        return None
    ch = individual.chromosome
    pos = rng.randrange(len(ch.service_seq))
    current_vid = ch.assignment[pos]
    best = None
    best_cost = penalized_cost(individual.evaluation, context.w_inf)
    for vid in range(1, nv + 1):
        if vid == current_vid:
            continue
        alt = ch.copy()
        alt.assignment[pos] = vid
        candidate = context.build(alt)
        cost = penalized_cost(candidate.evaluation, context.w_inf)
        if cost < best_cost:
            best_cost = cost
            best = candidate
            best.cost = cost
    return best


def op_ruin_construct(individual, context: LsContext, rng: random.Random) -> Chromosome:
    """Remove a fraction of the tasks and greedily reinsert them.

    Each removed task is placed at the (position, vehicle, orientation)
    minimizing a fast makespan surrogate: per-truck chain times plus
    per-drone out-and-back flight loads anchored at the preceding truck
    stop, with the endurance penalty applied to each drone's worst single
    flight.  Reinsertion order equals removal order.
    """
    cfg = context.config
    fleet = context.fleet
    ch = individual.chromosome
    n = len(ch.service_seq)
    n_remove = min(n, math.ceil(cfg.ruin_fraction * n))
    removed_pos = rng.sample(range(n), n_remove)
    removed = [ch.service_seq[p] for p in removed_pos]
    removed_set = set(removed_pos)
    seq = [g for p, g in enumerate(ch.service_seq) if p not in removed_set]
    asg = [a for p, a in enumerate(ch.assignment) if p not in removed_set]

    for gene in removed:
        _greedy_insert(seq, asg, abs(gene), context)
    return Chromosome(seq, asg)


def _greedy_insert(seq: list[int], asg: list[int], task: int, context: LsContext) -> None:
    """Insert one task into (seq, asg) in place, minimizing the surrogate score."""
    fleet = context.fleet
    metrics = context.metrics
    instance = context.instance
    dist = metrics.truck_node_dist
    eu = metrics.euclid_dist
    endpoints = metrics.req_endpoint_index
    rlen = metrics.req_length
    depot = instance.depot
    inv_vt = 1.0 / instance.truck_speed
    inv_vd = 1.0 / instance.drone_speed
    tau = fleet.tau
    w_inf = context.w_inf
    K, M = fleet.trucks, fleet.drones
    V = M + 1
    n = len(seq)
    nv = fleet.n_vehicles

    # Surrounding truck stops per gap and per system, plus current loads.
    prev_exit = [[depot] * K]
    cur = [depot] * K
    loads = [0.0] * (nv + 1)  # index by vehicle id; trucks hold chain time
    worst = [0.0] * (nv + 1)  # per-drone worst single flight
    for g, a in zip(seq, asg):
        u, v = endpoints[abs(g)]
        entry, leave = (u, v) if g > 0 else (v, u)
        k = (a - 1) // V
        if (a - 1) % V == 0:
            loads[a] += (dist[cur[k]][entry] + rlen[abs(g)]) * inv_vt
            cur = list(cur)
            cur[k] = leave
        else:
            anchor = cur[k]
            flight = (eu[anchor][entry] + rlen[abs(g)] + eu[leave][anchor]) * inv_vd
            loads[a] += flight
            if flight > worst[a]:
                worst[a] = flight
        prev_exit.append(cur)
    for k in range(K):
        tid = k * V + 1
        loads[tid] += dist[cur[k]][depot] * inv_vt

    next_entry = [[depot] * K for _ in range(n + 1)]
    upcoming = [depot] * K
    for p in range(n - 1, -1, -1):
        g, a = seq[p], asg[p]
        if (a - 1) % V == 0:
            u, v = endpoints[abs(g)]
            entry = u if g > 0 else v
            upcoming = list(upcoming)
            upcoming[(a - 1) // V] = entry
        next_entry[p] = upcoming
    next_entry[n] = [depot] * K

    base_pen = 0.0
    for vid in range(1, nv + 1):
        if worst[vid] > tau:
            base_pen += worst[vid] - tau
    top = 0.0
    second = 0.0
    top_vid = 0
    for vid in range(1, nv + 1):
        if loads[vid] > top:
            second = top
            top = loads[vid]
            top_vid = vid
        elif loads[vid] > second:
            second = loads[vid]

    u, v = endpoints[task]
    length = rlen[task]
    best_key = None
    best_pick = None
    for vid in range(1, nv + 1):
        k = (vid - 1) // V
        is_truck = (vid - 1) % V == 0
        others_max = second if vid == top_vid else top
        for gene in (task, -task):
            entry, leave = (u, v) if gene > 0 else (v, u)
            for p in range(n + 1):
                a_node = prev_exit[p][k]
                if is_truck:
                    b_node = next_entry[p][k]
                    delta = (
                        dist[a_node][entry] + length + dist[leave][b_node]
                        - dist[a_node][b_node]
                    ) * inv_vt
                    new_load = loads[vid] + delta
                    pen = base_pen
                else:
                    flight = (eu[a_node][entry] + length + eu[leave][a_node]) * inv_vd
                    new_load = loads[vid] + flight
                    new_worst = flight if flight > worst[vid] else worst[vid]
                    pen = base_pen
                    if worst[vid] > tau:
                        pen -= worst[vid] - tau
                    if new_worst > tau:
                        pen += new_worst - tau
                score = (new_load if new_load > others_max else others_max) + w_inf * pen
                key = (score, vid, p, 0 if gene > 0 else 1)
                if best_key is None or key < best_key:
                    best_key = key
                    best_pick = (p, gene, vid)

    p, gene, vid = best_pick
    seq.insert(p, gene)
    asg.insert(p, vid)
