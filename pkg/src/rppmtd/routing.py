"""Chromosome representation, route decoding, and makespan evaluation.

A solution is a two-part chromosome: a signed permutation of service ids
1..R (sign = traversal direction of the stored edge) plus a parallel
vehicle-assignment vector.  Vehicle ids pack truck systems contiguously:
truck k is (k-1)(M+1)+1 and its M drones follow it.

Decoding turns the chromosome into per-truck node routes and drone
sorties.  A maximal consecutive run of tasks on one drone forms a sortie
anchored between the truck-route nodes surrounding that run; the launch
and recovery nodes are picked by enumerating route positions at most
``delta`` truck arcs apart and minimizing the system's completion time.
At a rendezvous the later party waits.  A waiting truck just parks, but a
drone can only land on its truck, so a drone that arrives early hovers
and keeps consuming battery: the endurance budget covers the whole
launch-to-recovery span.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .instances import Instance, MetricTables


@dataclass(slots=True)
class Chromosome:
    service_seq: list[int]
    assignment: list[int]

    def copy(self) -> "Chromosome":
        return Chromosome(list(self.service_seq), list(self.assignment))


@dataclass(frozen=True)
class FleetConfig:
    """Fleet composition: K trucks each carrying M drones.

    ``delta`` is the hop window (max truck arcs between launch and
    recovery); None means unbounded.  ``tau`` is the per-sortie flight
    budget in hours.
    """

    trucks: int
    drones: int
    delta: int | None = None
    tau: float = 1.0

    def __post_init__(self) -> None:
        if self.trucks < 1:
            raise ValueError("need at least one truck")
        if self.drones < 0:
            raise ValueError("drones per truck cannot be negative")
        if self.delta is not None and self.delta < 1:
            raise ValueError("delta must be at least 1 (or None for unbounded)")
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def n_vehicles(self) -> int:
        return self.trucks * (self.drones + 1)

    def truck_id(self, k: int) -> int:
        """Vehicle id of truck k (0-based system index)."""
        return k * (self.drones + 1) + 1

    def system_of(self, vehicle: int) -> int:
        return (vehicle - 1) // (self.drones + 1)

    def is_truck(self, vehicle: int) -> bool:
        return (vehicle - 1) % (self.drones + 1) == 0


@dataclass(slots=True)
class Sortie:
    """One drone flight from launch on its truck to recovery on the same truck.

    ``travel_time`` is the geometric flight (straight legs plus shadow
    traversals); ``flight_time`` is the full airborne span from launch to
    recovery.  Drones can land only on their truck, so arriving early means
    hovering: flight_time >= travel_time, and the endurance budget applies
    to flight_time.  Launches are as late as possible, so hover occurs only
    when the truck's transit outlasts the drone's travel.
    """

    drone: int
    truck: int
    genes: tuple[int, ...]
    launch_pos: int
    recovery_pos: int
    launch_node: int
    recovery_node: int
    travel_time: float
    flight_time: float = 0.0
    launch_time: float = 0.0
    recovery_time: float = 0.0


@dataclass(slots=True)
class TruckRoute:
    index: int
    truck_id: int
    nodes: list[int]
    genes: tuple[int, ...]
    arrival: list[float]
    departure: list[float]

    @property
    def return_time(self) -> float:
        return self.departure[-1]


@dataclass(slots=True)
class RoutePlan:
    trucks: list[TruckRoute]
    sorties: list[Sortie]

    def serviced_ids(self) -> list[int]:
        """Absolute service ids covered by the plan, in no particular order."""
        out = [abs(g) for tr in self.trucks for g in tr.genes]
        for s in self.sorties:
            out.extend(abs(g) for g in s.genes)
        return out

    def to_dict(self) -> dict:
        return {
            "trucks": [
                {
                    "truck": tr.truck_id,
                    "nodes": list(tr.nodes),
                    "serviced": list(tr.genes),
                    "arrival_h": list(tr.arrival),
                    "departure_h": list(tr.departure),
                    "return_h": tr.return_time,
                }
                for tr in self.trucks
            ],
            "sorties": [
                {
                    "drone": s.drone,
                    "truck": s.truck,
                    "serviced": list(s.genes),
                    "launch_pos": s.launch_pos,
                    "launch_node": s.launch_node,
                    "launch_h": s.launch_time,
                    "recovery_pos": s.recovery_pos,
                    "recovery_node": s.recovery_node,
                    "rendezvous_h": s.recovery_time,
                    "travel_h": s.travel_time,
                    "flight_h": s.flight_time,
                }
                for s in self.sorties
            ],
        }


@dataclass(slots=True)
class Evaluation:
    makespan: float
    tau_max: dict[int, float]
    violation: float
    feasible: bool


def random_chromosome(n_required: int, fleet: FleetConfig, rng: random.Random) -> Chromosome:
    """Uniform signed permutation with uniform vehicle assignments."""
    if n_required < 1:
        raise ValueError("need at least one required edge")
    seq = list(range(1, n_required + 1))
    rng.shuffle(seq)
    seq = [g if rng.random() < 0.5 else -g for g in seq]
    nv = fleet.n_vehicles
    assignment = [rng.randint(1, nv) for _ in range(n_required)]
    return Chromosome(seq, assignment)


def is_valid_chromosome(ch: Chromosome, n_required: int, n_vehicles: int) -> bool:
    if len(ch.service_seq) != n_required or len(ch.assignment) != n_required:
        return False
    if sorted(abs(g) for g in ch.service_seq) != list(range(1, n_required + 1)):
        return False
    return all(1 <= v <= n_vehicles for v in ch.assignment)


def _pick_path(metrics, u, v, rng, path_choice):
    options = metrics.shortest_paths(u, v)
    if len(options) == 1:
        return options[0]
    if path_choice is not None:
        return options[path_choice(u, v, len(options))]
    if rng is None:
        return options[0]
    return options[rng.randrange(len(options))]


def decode(
    chromosome: Chromosome,
    instance: Instance,
    metrics: MetricTables,
    fleet: FleetConfig,
    rng: random.Random | None = None,
    path_choice=None,
) -> RoutePlan:
    """Build the synchronized route plan a chromosome encodes.

    Co-optimal connecting paths are sampled with ``rng`` unless
    ``path_choice(u, v, n_options) -> index`` pins them.  Every chromosome
    decodes; endurance violations are recorded, not rejected.
    """
    K, M = fleet.trucks, fleet.drones
    V = M + 1
    depot = instance.depot
    inv_vt = 1.0 / instance.truck_speed
    inv_vd = 1.0 / instance.drone_speed
    eu = metrics.euclid_dist
    elen = metrics.edge_length
    endpoints = metrics.req_endpoint_index
    rlen = metrics.req_length

    systems: list[list[tuple[int, int]]] = [[] for _ in range(K)]
    for g, vid in zip(chromosome.service_seq, chromosome.assignment):
        systems[(vid - 1) // V].append((g, vid))

    trucks_out: list[TruckRoute] = []
    sorties_out: list[Sortie] = []

    for k in range(K):
        truck_vid = k * V + 1
        items = systems[k]
        truck_genes = [g for g, vid in items if vid == truck_vid]

        # Maximal consecutive same-drone runs, positioned by how many truck
        # tasks of this system precede them.
        runs: list[tuple[int, list[int], int]] = []
        prior = 0
        for g, vid in items:
            if vid == truck_vid:
                prior += 1
            elif runs and runs[-1][0] == vid and runs[-1][2] == prior:
                runs[-1][1].append(g)
            else:
                runs.append((vid, [g], prior))

        # Truck route: depot -> chained service traversals -> depot.
        route = [depot]
        entry_pos: list[int] = []
        exit_pos: list[int] = []
        for g in truck_genes:
            u, v = endpoints[abs(g)]
            a, b = (u, v) if g > 0 else (v, u)
            if route[-1] != a:
                route.extend(_pick_path(metrics, route[-1], a, rng, path_choice)[1:])
            entry_pos.append(len(route) - 1)
            route.append(b)
            exit_pos.append(len(route) - 1)
        if route[-1] != depot:
            route.extend(_pick_path(metrics, route[-1], depot, rng, path_choice)[1:])
        L = len(route) - 1
        drive = [elen[route[i], route[i + 1]] * inv_vt for i in range(L)]
        cum = [0.0] * (L + 1)
        for i in range(L):
            cum[i + 1] = cum[i] + drive[i]
        dmax = L if fleet.delta is None else fleet.delta

        # Sorties fixed so far for this truck, as parallel lists.
        s_drone: list[int] = []
        s_genes: list[tuple[int, ...]] = []
        s_l: list[int] = []
        s_r: list[int] = []
        s_flight: list[float] = []
        s_pred: list[int] = []
        last_sortie_of: dict[int, int] = {}
        arrival = list(cum)
        launch_t: list[float] = []
        rendez_t: list[float] = []

        for dvid, genes, prior in runs:
            win_a = exit_pos[prior - 1] if prior > 0 else 0
            win_b = entry_pos[prior] if prior < len(truck_genes) else L
            pred = last_sortie_of.get(dvid, -1)
            lo = win_a
            if pred >= 0 and s_r[pred] > lo:
                lo = s_r[pred]

            # Flight geometry: entry leg + fixed core + exit leg.
            core = 0.0
            prev_exit = -1
            first_in = -1
            for g in genes:
                u, v = endpoints[abs(g)]
                e_in, e_out = (u, v) if g > 0 else (v, u)
                if prev_exit < 0:
                    first_in = e_in
                else:
                    core += eu[prev_exit][e_in]
                core += rlen[abs(g)]
                prev_exit = e_out
            eu_first = eu[first_in]
            eu_last = eu[prev_exit]

            # Replayable window events from already-fixed sorties.
            win_ev = []
            for i in range(len(s_l)):
                if s_l[i] >= win_a:
                    win_ev.append((s_l[i], i, 0))
                if s_r[i] >= win_a:
                    win_ev.append((s_r[i], i, 1))
            win_ev.sort()
            t_base = arrival[win_a]
            tail_after = cum[L]

            best = None
            for l in range(lo, win_b + 1):
                head = eu_first[route[l]]
                r_hi = min(win_b, l + dmax)
                for r in range(l, r_hi + 1):
                    flight = (head + core + eu_last[route[r]]) * inv_vd
                    completion = _window_completion(
                        win_ev, t_base, win_a, cum, tail_after,
                        l, r, flight, pred,
                        s_flight, s_pred, launch_t,
                    )
                    key = (completion, flight, l, r)
                    if best is None or key < best:
                        best = key
            _, flight, l, r = best

            idx = len(s_l)
            s_drone.append(dvid)
            s_genes.append(tuple(genes))
            s_l.append(l)
            s_r.append(r)
            s_flight.append(flight)
            s_pred.append(pred)
            last_sortie_of[dvid] = idx
            arrival, departure, launch_t, rendez_t = _timeline(
                L, drive, s_l, s_r, s_flight, s_pred
            )

        arrival, departure, launch_t, rendez_t = _timeline(
            L, drive, s_l, s_r, s_flight, s_pred
        )
        trucks_out.append(
            TruckRoute(
                index=k,
                truck_id=truck_vid,
                nodes=route,
                genes=tuple(truck_genes),
                arrival=arrival,
                departure=departure,
            )
        )
        for i in range(len(s_l)):
            # Launch as late as the rendezvous allows while the truck is
            # still present, so hover time is only the unavoidable part.
            earliest = launch_t[i]
            latest = min(departure[s_l[i]], rendez_t[i] - s_flight[i])
            launch = earliest if latest < earliest else latest
            sorties_out.append(
                Sortie(
                    drone=s_drone[i],
                    truck=truck_vid,
                    genes=s_genes[i],
                    launch_pos=s_l[i],
                    recovery_pos=s_r[i],
                    launch_node=route[s_l[i]],
                    recovery_node=route[s_r[i]],
                    travel_time=s_flight[i],
                    flight_time=rendez_t[i] - launch,
                    launch_time=launch,
                    recovery_time=rendez_t[i],
                )
            )

    return RoutePlan(trucks=trucks_out, sorties=sorties_out)


def _timeline(L, drive, s_l, s_r, s_flight, s_pred):
    """Authoritative arrival/departure times with all rendezvous waits."""
    n = len(s_l)
    launch_t = [0.0] * n
    rendez_t = [0.0] * n
    ev = []
    for i in range(n):
        ev.append((s_l[i], i, 0))
        ev.append((s_r[i], i, 1))
    ev.sort()
    arrival = [0.0] * (L + 1)
    departure = [0.0] * (L + 1)
    t = 0.0
    ei = 0
    nev = len(ev)
    for pos in range(L + 1):
        if pos:
            t += drive[pos - 1]
        arr = t
        arrival[pos] = arr
        while ei < nev and ev[ei][0] == pos:
            _, i, kind = ev[ei]
            ei += 1
            if kind == 0:
                lt = arr
                p = s_pred[i]
                if p >= 0 and rendez_t[p] > lt:
                    lt = rendez_t[p]
                launch_t[i] = lt
            else:
                rt = launch_t[i] + s_flight[i]
                if rt < arr:
                    rt = arr
                rendez_t[i] = rt
                if rt > t:
                    t = rt
        departure[pos] = t
    return arrival, departure, launch_t, rendez_t


def _window_completion(
    win_ev, t_base, win_a, cum, tail_after,
    cand_l, cand_r, cand_flight, cand_pred,
    s_flight, s_pred, launch_t_base,
):
    """Truck completion time if the candidate sortie (cand_l, cand_r) is added.

    Replays the fixed sortie events at positions >= the window start plus the
    candidate's own; positions after the last event add pure drive time.
    """
    merged = sorted(win_ev + [(cand_l, 1 << 30, 0), (cand_r, 1 << 30, 1)])
    t = t_base
    pos = win_a
    arr = t_base
    lt_local: dict[int, float] = {}
    rz_local: dict[int, float] = {}
    cand_lt = 0.0
    for p, idx, kind in merged:
        if p != pos:
            t += cum[p] - cum[pos]
            pos = p
            arr = t
        if kind == 0:
            lt = arr
            if idx == 1 << 30:
                if cand_pred >= 0:
                    pr = rz_local.get(cand_pred, 0.0)
                    if pr > lt:
                        lt = pr
                cand_lt = lt
            else:
                pp = s_pred[idx]
                if pp >= 0:
                    pr = rz_local.get(pp, 0.0)
                    if pr > lt:
                        lt = pr
                lt_local[idx] = lt
        else:
            if idx == 1 << 30:
                land = cand_lt + cand_flight
            else:
                land = lt_local.get(idx, launch_t_base[idx]) + s_flight[idx]
            if land < arr:
                land = arr
            rz_local[idx] = land
            if land > t:
                t = land
    return t + tail_after - cum[pos]


def evaluate(plan: RoutePlan, fleet: FleetConfig) -> Evaluation:
    """Makespan plus per-drone endurance accounting.

    The violation total sums, over drones, the excess of the drone's worst
    sortie flight time over tau.
    """
    makespan = max(tr.return_time for tr in plan.trucks)
    tau_max: dict[int, float] = {}
    for s in plan.sorties:
        prev = tau_max.get(s.drone, 0.0)
        if s.flight_time > prev:
            tau_max[s.drone] = s.flight_time
    violation = 0.0
    for worst in tau_max.values():
        if worst > fleet.tau:
            violation += worst - fleet.tau
    return Evaluation(
        makespan=makespan,
        tau_max=tau_max,
        violation=violation,
        feasible=violation == 0.0,
    )


def penalized_cost(evaluation: Evaluation, w_inf: float) -> float:
    """Makespan plus w_inf times the endurance violation total."""
    return evaluation.makespan + w_inf * evaluation.violation


def plan_rank(evaluation: Evaluation) -> tuple:
    """Sort key preferring feasible plans by makespan, then lowest violation."""
    if evaluation.feasible:
        return (0, evaluation.makespan, 0.0)
    return (1, evaluation.violation, evaluation.makespan)


def decode_best(
    chromosome: Chromosome,
    instance: Instance,
    metrics: MetricTables,
    fleet: FleetConfig,
    combo_cap: int = 256,
) -> tuple[RoutePlan, Evaluation]:
    """Decode taking the best combination of co-optimal connecting paths.

    The sequence of path lookups a chromosome triggers does not depend on
    which co-optimal option is chosen, so the choice space is a product
    over lookup sites.  Products larger than ``combo_cap`` fall back to the
    first-choice decode.
    """
    counts: list[int] = []

    def recorder(u, v, n):
        counts.append(n)
        return 0

    plan = decode(chromosome, instance, metrics, fleet, rng=None, path_choice=recorder)
    ev = evaluate(plan, fleet)
    best = (plan, ev)
    best_key = plan_rank(ev)

    total = 1
    for c in counts:
        total *= c
        if total > combo_cap:
            return best
    if total == 1:
        return best
    for combo in itertools.product(*(range(c) for c in counts)):
        if not any(combo):
            continue
        picks = iter(combo)

        def replay(u, v, n, _picks=picks):
            return next(_picks)

        plan2 = decode(chromosome, instance, metrics, fleet, rng=None, path_choice=replay)
        ev2 = evaluate(plan2, fleet)
        key2 = plan_rank(ev2)
        if key2 < best_key:
            best, best_key = (plan2, ev2), key2
    return best
