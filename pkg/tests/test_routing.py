import math
import random

import pytest

from rppmtd import (
    Chromosome,
    Edge,
    Evaluation,
    FleetConfig,
    Instance,
    Node,
    build_metrics,
    decode,
    decode_best,
    evaluate,
    generate_instance,
    is_valid_chromosome,
    penalized_cost,
    random_chromosome,
)


def triangle_instance():
    """Depot at origin, one required arc opposite it, 3-4-5 geometry."""
    nodes = (Node(0, 0.0, 0.0), Node(1, 0.0, 4.0), Node(2, 3.0, 4.0))
    edges = (Edge(0, 1, 4.0, False), Edge(1, 2, 3.0, True), Edge(2, 0, 7.0, False))
    return Instance(
        nodes=nodes, edges=edges, depot=0, required_ids=(1,),
        truck_speed=40.0, drone_speed=80.0, tau=1.0, name="triangle",
    )


def symmetric_path_instance():
    """0-1-2-3-4 chain, symmetric about node 2, middle edges required."""
    coords = [(0.0, 0.0), (2.0, 0.0), (4.0, 0.0), (6.0, 0.0), (8.0, 0.0)]
    nodes = tuple(Node(i, x, y) for i, (x, y) in enumerate(coords))
    edges = (
        Edge(0, 1, 2.0, False),
        Edge(1, 2, 2.0, True),
        Edge(2, 3, 2.0, True),
        Edge(3, 4, 2.0, False),
    )
    return Instance(
        nodes=nodes, edges=edges, depot=0, required_ids=(1, 2),
        truck_speed=40.0, drone_speed=80.0, tau=1.0, name="sympath",
    )


class TestDecode:
    def test_truck_only_hand_trace(self):
        inst = triangle_instance()
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=0, delta=None, tau=1.0)
        plan = decode(Chromosome([1], [1]), inst, metrics, fleet, random.Random(0))
        ev = evaluate(plan, fleet)
        # 0->1 (4 km), service 1->2 (3 km), back to 0 (7 km): 14 km at 40 km/h.
        assert ev.makespan == pytest.approx(14.0 / 40.0)
        assert ev.makespan * 60 == pytest.approx(21.0)
        assert plan.trucks[0].nodes[0] == 0
        assert plan.trucks[0].nodes[-1] == 0

    def test_single_drone_hand_trace(self):
        inst = triangle_instance()
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=1.0)
        plan = decode(Chromosome([1], [2]), inst, metrics, fleet, random.Random(0))
        ev = evaluate(plan, fleet)
        # Straight 4 km out, 3 km shadow, 5 km home: 12 km at 80 km/h.
        assert ev.makespan * 60 == pytest.approx(9.0)
        assert ev.feasible
        (sortie,) = plan.sorties
        assert sortie.travel_time == pytest.approx(12.0 / 80.0)
        assert sortie.flight_time == pytest.approx(12.0 / 80.0)
        assert plan.trucks[0].nodes == [0]

    def test_direction_flip_same_makespan_on_symmetric_instance(self):
        inst = symmetric_path_instance()
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=0, delta=None, tau=1.0)
        forward = evaluate(
            decode(Chromosome([1, 2], [1, 1]), inst, metrics, fleet), fleet
        )
        flipped = evaluate(
            decode(Chromosome([-2, -1], [1, 1]), inst, metrics, fleet), fleet
        )
        assert forward.makespan == pytest.approx(flipped.makespan)

    def test_coverage_invariant(self):
        inst = generate_instance(15, 30, 6, 10.0, seed=2)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=2, drones=2, delta=3, tau=0.5)
        rng = random.Random(9)
        for _ in range(200):
            ch = random_chromosome(inst.n_required, fleet, rng)
            plan = decode(ch, inst, metrics, fleet, rng)
            assert sorted(plan.serviced_ids()) == list(range(1, inst.n_required + 1))

    def test_hop_window_invariant(self):
        inst = generate_instance(15, 30, 6, 10.0, seed=4)
        metrics = build_metrics(inst)
        rng = random.Random(11)
        for delta in (1, 2, 4):
            fleet = FleetConfig(trucks=1, drones=2, delta=delta, tau=0.5)
            for _ in range(100):
                ch = random_chromosome(inst.n_required, fleet, rng)
                plan = decode(ch, inst, metrics, fleet, rng)
                for s in plan.sorties:
                    assert 0 <= s.recovery_pos - s.launch_pos <= delta

    def test_sortie_endpoints_on_truck_route(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=6)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=2, drones=1, delta=2, tau=0.5)
        rng = random.Random(3)
        for _ in range(100):
            ch = random_chromosome(inst.n_required, fleet, rng)
            plan = decode(ch, inst, metrics, fleet, rng)
            routes = {tr.truck_id: tr.nodes for tr in plan.trucks}
            for s in plan.sorties:
                nodes = routes[s.truck]
                assert nodes[s.launch_pos] == s.launch_node
                assert nodes[s.recovery_pos] == s.recovery_node

    def test_rendezvous_waits_are_nonnegative(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=8)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=2, delta=4, tau=0.3)
        rng = random.Random(5)
        for _ in range(100):
            ch = random_chromosome(inst.n_required, fleet, rng)
            plan = decode(ch, inst, metrics, fleet, rng)
            for tr in plan.trucks:
                for arr, dep in zip(tr.arrival, tr.departure):
                    assert dep >= arr - 1e-12
                assert all(
                    tr.arrival[i] <= tr.arrival[i + 1] + 1e-12
                    for i in range(len(tr.arrival) - 1)
                )
            for s in plan.sorties:
                assert s.recovery_time >= s.launch_time - 1e-12
                assert s.flight_time >= s.travel_time - 1e-12

    def test_same_drone_sorties_do_not_overlap(self):
        inst = generate_instance(12, 24, 6, 10.0, seed=10)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=1, delta=3, tau=0.2)
        rng = random.Random(7)
        for _ in range(100):
            ch = random_chromosome(inst.n_required, fleet, rng)
            plan = decode(ch, inst, metrics, fleet, rng)
            by_drone: dict[int, list] = {}
            for s in plan.sorties:
                by_drone.setdefault(s.drone, []).append(s)
            for sorties in by_drone.values():
                for a, b in zip(sorties, sorties[1:]):
                    assert b.launch_time >= a.recovery_time - 1e-12
                    assert b.launch_pos >= a.recovery_pos

    def test_makespan_capacity_lower_bound(self):
        # Work assigned to one truck system cannot finish faster than its
        # combined service capacity allows.
        inst = generate_instance(15, 30, 6, 10.0, seed=12)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=2, drones=2, delta=None, tau=10.0)
        rng = random.Random(13)
        vmax = max(inst.truck_speed, inst.drone_speed)
        for _ in range(100):
            ch = random_chromosome(inst.n_required, fleet, rng)
            plan = decode(ch, inst, metrics, fleet, rng)
            ev = evaluate(plan, fleet)
            V = fleet.drones + 1
            for k in range(fleet.trucks):
                lo, hi = k * V + 1, (k + 1) * V
                total = sum(
                    metrics.req_length[abs(g)]
                    for g, vid in zip(ch.service_seq, ch.assignment)
                    if lo <= vid <= hi
                )
                assert ev.makespan >= total / (V * vmax) - 1e-12

    def test_decode_deterministic_given_seed(self):
        inst = generate_instance(15, 30, 6, 10.0, seed=14)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=2, drones=1, delta=5, tau=1.0)
        ch = random_chromosome(inst.n_required, fleet, random.Random(1))
        a = evaluate(decode(ch, inst, metrics, fleet, random.Random(2)), fleet)
        b = evaluate(decode(ch, inst, metrics, fleet, random.Random(2)), fleet)
        assert a == b

    def test_decode_best_bounds_sampled_decode(self):
        inst = generate_instance(12, 24, 4, 10.0, seed=16)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=1.0)
        rng = random.Random(17)
        for _ in range(50):
            ch = random_chromosome(inst.n_required, fleet, rng)
            _, best_ev = decode_best(ch, inst, metrics, fleet)
            sampled = evaluate(decode(ch, inst, metrics, fleet, rng), fleet)
            if sampled.feasible:
                assert best_ev.feasible
                assert best_ev.makespan <= sampled.makespan + 1e-12


class TestEvaluate:
    def test_no_sorties_no_violation(self):
        inst = triangle_instance()
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=0, delta=None, tau=1e-9)
        plan = decode(Chromosome([1], [1]), inst, metrics, fleet)
        assert evaluate(plan, fleet).violation == 0.0

    def test_violation_positive_part(self):
        ev = Evaluation(makespan=1.0, tau_max={2: 1.3}, violation=0.3, feasible=False)
        assert penalized_cost(ev, 1.0) == pytest.approx(1.3)

    def test_per_drone_max_then_sum(self):
        # Drone 2 flies 0.5 and 0.9 h sorties, drone 3 flies 1.2 h; tau=1.0.
        inst = triangle_instance()
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=2, delta=None, tau=1.0)
        plan = decode(Chromosome([1], [2]), inst, metrics, fleet)
        plan.sorties[0].flight_time = 0.5
        import copy

        extra1 = copy.copy(plan.sorties[0])
        extra1.flight_time = 0.9
        extra2 = copy.copy(plan.sorties[0])
        extra2.drone = 3
        extra2.flight_time = 1.2
        plan.sorties.extend([extra1, extra2])
        ev = evaluate(plan, fleet)
        assert ev.violation == pytest.approx(0.2)
        assert not ev.feasible

    def test_feasible_iff_zero_violation(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=18)
        metrics = build_metrics(inst)
        fleet = FleetConfig(trucks=1, drones=2, delta=2, tau=0.15)
        rng = random.Random(19)
        for _ in range(100):
            ch = random_chromosome(inst.n_required, fleet, rng)
            ev = evaluate(decode(ch, inst, metrics, fleet, rng), fleet)
            assert ev.feasible == (ev.violation == 0.0)
            assert penalized_cost(ev, 3.0) == pytest.approx(
                ev.makespan + 3.0 * ev.violation
            )
            if ev.feasible:
                assert penalized_cost(ev, 50.0) == ev.makespan


class TestPenalizedCost:
    def test_feasible_identity(self):
        ev = Evaluation(makespan=10.0, tau_max={}, violation=0.0, feasible=True)
        for w in (0.01, 1.0, 100.0):
            assert penalized_cost(ev, w) == 10.0

    def test_arithmetic(self):
        ev = Evaluation(makespan=10.0, tau_max={2: 1.5}, violation=0.5, feasible=False)
        assert penalized_cost(ev, 2.0) == pytest.approx(11.0)

    def test_monotone_in_weight(self):
        ev = Evaluation(makespan=5.0, tau_max={2: 2.0}, violation=1.0, feasible=False)
        costs = [penalized_cost(ev, w) for w in (0.01, 0.1, 1.0, 10.0, 100.0)]
        assert costs == sorted(costs)


class TestRandomChromosome:
    def test_single_task_enumeration(self):
        fleet = FleetConfig(trucks=1, drones=0, delta=None, tau=1.0)
        seen = set()
        rng = random.Random(0)
        for _ in range(100):
            ch = random_chromosome(1, fleet, rng)
            assert ch.assignment == [1]
            seen.add(ch.service_seq[0])
        assert seen == {1, -1}

    def test_seeded_determinism(self):
        fleet = FleetConfig(trucks=2, drones=1, delta=None, tau=1.0)
        a = random_chromosome(8, fleet, random.Random(33))
        b = random_chromosome(8, fleet, random.Random(33))
        assert a.service_seq == b.service_seq and a.assignment == b.assignment

    def test_validity_mass(self):
        fleet = FleetConfig(trucks=3, drones=2, delta=None, tau=1.0)
        rng = random.Random(1)
        for _ in range(1000):
            ch = random_chromosome(12, fleet, rng)
            assert is_valid_chromosome(ch, 12, fleet.n_vehicles)

    def test_vehicle_frequencies_uniform_within_5_sigma(self):
        fleet = FleetConfig(trucks=2, drones=1, delta=None, tau=1.0)
        rng = random.Random(7)
        R, draws = 6, 10_000
        counts = {v: 0 for v in range(1, fleet.n_vehicles + 1)}
        for _ in range(draws):
            ch = random_chromosome(R, fleet, rng)
            for v in ch.assignment:
                counts[v] += 1
        n = draws * R
        p = 1.0 / fleet.n_vehicles
        sigma = math.sqrt(n * p * (1 - p))
        for v, c in counts.items():
            assert abs(c - n * p) <= 5 * sigma, f"vehicle {v}: {c}"
