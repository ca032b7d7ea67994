import itertools
import math
import random

import pytest

from rppmtd import (
    Chromosome,
    Edge,
    Evaluator,
    FleetConfig,
    GaConfig,
    Instance,
    LsContext,
    Node,
    build_metrics,
    exhaustive_solve,
    generate_instance,
    is_valid_chromosome,
    op_greedy_reassign,
    op_or_opt,
    op_ruin_construct,
    op_sortie_opt,
    op_subseq_reversal,
    penalized_cost,
    random_chromosome,
    refine,
)


def make_context(inst, fleet, w_inf=1.0, seed=0, **config_kwargs):
    metrics = build_metrics(inst)
    cfg = GaConfig(
        population_min=10, population_max=20, seed=seed, **config_kwargs
    )
    rng = random.Random(seed)
    evaluator = Evaluator(inst, metrics, fleet, rng)
    ctx = LsContext(
        instance=inst, metrics=metrics, fleet=fleet, config=cfg,
        w_inf=w_inf, rng=rng, build=evaluator.build,
    )
    return ctx, evaluator


class TestSubseqReversal:
    def test_double_full_reversal_is_identity(self):
        ch = Chromosome([1, -2, 3, 4], [1, 2, 1, 2])
        rng = random.Random(0)
        once = op_subseq_reversal(ch, rng, span=(0, 3))
        twice = op_subseq_reversal(once, rng, span=(0, 3))
        assert twice.service_seq == ch.service_seq
        assert twice.assignment == ch.assignment

    def test_degenerate_span_is_identity(self):
        ch = Chromosome([1, 2], [1, 1])
        assert op_subseq_reversal(ch, random.Random(0), span=(1, 1)) is None

    def test_signs_flip(self):
        ch = Chromosome([1, 2, 3], [1, 2, 3])
        out = op_subseq_reversal(ch, random.Random(0), span=(0, 2))
        assert out.service_seq == [-3, -2, -1]
        assert out.assignment == [3, 2, 1]

    def test_validity_property(self):
        fleet = FleetConfig(trucks=2, drones=2, delta=None, tau=1.0)
        rng = random.Random(1)
        for _ in range(2000):
            ch = random_chromosome(8, fleet, rng)
            out = op_subseq_reversal(ch, rng)
            if out is not None:
                assert is_valid_chromosome(out, 8, fleet.n_vehicles)


class TestOrOpt:
    def test_whole_sequence_block_has_nowhere_to_go(self):
        ch = Chromosome([1, 2], [1, 1])
        # Block of size R can only be "moved" onto itself.
        out = op_or_opt(ch, 2, random.Random(3))
        if out is not None:
            assert sorted(abs(g) for g in out.service_seq) == [1, 2]

    def test_single_task_identity(self):
        ch = Chromosome([1], [1])
        assert op_or_opt(ch, 3, random.Random(0)) is None

    def test_block_moves_with_assignments(self):
        fleet = FleetConfig(trucks=2, drones=2, delta=None, tau=1.0)
        rng = random.Random(2)
        for _ in range(500):
            ch = random_chromosome(7, fleet, rng)
            out = op_or_opt(ch, 3, rng)
            if out is None:
                continue
            assert is_valid_chromosome(out, 7, fleet.n_vehicles)
            pairs = lambda c: sorted(zip(map(abs, c.service_seq), c.assignment))
            assert pairs(out) == pairs(ch)

    def test_validity_property(self):
        fleet = FleetConfig(trucks=3, drones=1, delta=None, tau=1.0)
        rng = random.Random(4)
        for _ in range(2000):
            ch = random_chromosome(9, fleet, rng)
            out = op_or_opt(ch, 3, rng)
            if out is not None:
                assert is_valid_chromosome(out, 9, fleet.n_vehicles)


def cross_instance():
    """Depot plus three required arcs at staggered offsets; a drone sortie
    over all three has a provably best visiting order."""
    coords = [
        (0.0, 0.0),   # depot
        (1.0, 4.0), (1.0, 5.0),    # arc 1 (near, left)
        (4.0, 4.0), (4.0, 5.0),    # arc 2 (middle)
        (7.0, 4.0), (7.0, 5.0),    # arc 3 (right)
    ]
    nodes = tuple(Node(i, x, y) for i, (x, y) in enumerate(coords))
    edges = (
        Edge(0, 1, 5.0, False),
        Edge(1, 2, 1.0, True),
        Edge(3, 4, 1.0, True),
        Edge(5, 6, 1.0, True),
        Edge(0, 3, 8.0, False),
        Edge(0, 5, 12.0, False),
        Edge(2, 3, 4.0, False),
        Edge(4, 5, 4.0, False),
    )
    return Instance(
        nodes=nodes, edges=edges, depot=0, required_ids=(1, 2, 3),
        truck_speed=40.0, drone_speed=80.0, tau=2.0, name="cross",
    )


class TestSortieOpt:
    def test_short_sortie_untouched(self):
        inst = cross_instance()
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=2.0)
        ctx, evaluator = make_context(inst, fleet)
        ch = Chromosome([1, 2, 3], [1, 1, 2])  # single-arc sortie only
        ind = evaluator.build(ch)
        assert op_sortie_opt(ind, ctx, random.Random(0)) is None

    def test_three_arc_sortie_reaches_enumerated_best(self):
        inst = cross_instance()
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=2.0)
        ctx, evaluator = make_context(inst, fleet)
        # Deliberately bad order: far arc first, then near, then middle.
        ch = Chromosome([3, 1, 2], [2, 2, 2])
        ind = evaluator.build(ch)
        sortie = ind.plan.sorties[0]

        metrics = ctx.metrics
        eu = metrics.euclid_dist

        def flight(order):
            prev = sortie.launch_node
            total = 0.0
            for g in order:
                u, v = metrics.req_endpoint_index[abs(g)]
                a, b = (u, v) if g > 0 else (v, u)
                total += eu[prev][a] + metrics.req_length[abs(g)]
                prev = b
            return (total + eu[prev][sortie.recovery_node]) / inst.drone_speed

        best = min(
            flight([s * g for s, g in zip(signs, perm)])
            for perm in itertools.permutations([1, 2, 3])
            for signs in itertools.product((1, -1), repeat=3)
        )
        out = op_sortie_opt(ind, ctx, random.Random(0))
        assert out is not None
        improved = evaluator.build(out)
        assert improved.plan.sorties[0].travel_time == pytest.approx(best)

    def test_never_breaks_coverage(self):
        inst = generate_instance(12, 24, 6, 10.0, seed=30)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=5.0)
        ctx, evaluator = make_context(inst, fleet)
        rng = random.Random(1)
        for _ in range(200):
            ch = random_chromosome(6, fleet, rng)
            ind = evaluator.build(ch)
            out = op_sortie_opt(ind, ctx, rng)
            if out is not None:
                assert is_valid_chromosome(out, 6, fleet.n_vehicles)

    def test_matches_brute_force_on_random_sorties(self):
        # All tasks ride one drone: a single sortie whose optimal order and
        # orientations are enumerable.
        inst = generate_instance(12, 24, 4, 10.0, seed=36)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=50.0)
        ctx, evaluator = make_context(inst, fleet)
        metrics = ctx.metrics
        eu = metrics.euclid_dist
        rng = random.Random(9)
        for _ in range(30):
            ch = random_chromosome(4, fleet, rng)
            ch.assignment = [2, 2, 2, 2]
            ind = evaluator.build(ch)
            (sortie,) = ind.plan.sorties

            best = math.inf
            for perm in itertools.permutations([1, 2, 3, 4]):
                for mask in range(16):
                    prev = sortie.launch_node
                    total = 0.0
                    for i, g in enumerate(perm):
                        u, v = metrics.req_endpoint_index[g]
                        a, b = (u, v) if not (mask >> i) & 1 else (v, u)
                        total += eu[prev][a] + metrics.req_length[g]
                        prev = b
                    total += eu[prev][sortie.recovery_node]
                    best = min(best, total / inst.drone_speed)

            out = op_sortie_opt(ind, ctx, rng)
            if out is None:
                assert sortie.travel_time == pytest.approx(best)
            else:
                improved = evaluator.build(out)
                assert improved.plan.sorties[0].travel_time == pytest.approx(best)


class TestGreedyReassign:
    def test_single_vehicle_identity(self):
        inst = cross_instance()
        fleet = FleetConfig(trucks=1, drones=0, delta=None, tau=2.0)
        ctx, evaluator = make_context(inst, fleet)
        ind = evaluator.build(Chromosome([1, 2, 3], [1, 1, 1]))
        assert op_greedy_reassign(ind, ctx, random.Random(0)) is None

    def test_moves_overloaded_drone_task(self):
        inst = cross_instance()
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=0.05)
        ctx, evaluator = make_context(inst, fleet, w_inf=100.0)
        # All tasks on the drone: badly endurance-violating.
        ind = evaluator.build(Chromosome([1, 2, 3], [2, 2, 2]))
        assert ind.evaluation.violation > 0
        moved = None
        rng = random.Random(0)
        for _ in range(20):
            moved = op_greedy_reassign(ind, ctx, rng)
            if moved is not None:
                break
        assert moved is not None
        assert penalized_cost(moved.evaluation, ctx.w_inf) < penalized_cost(
            ind.evaluation, ctx.w_inf
        )

    def test_changes_at_most_one_position(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=31)
        fleet = FleetConfig(trucks=2, drones=1, delta=3, tau=0.5)
        ctx, evaluator = make_context(inst, fleet)
        rng = random.Random(2)
        for _ in range(50):
            ind = evaluator.build(random_chromosome(5, fleet, rng))
            out = op_greedy_reassign(ind, ctx, rng)
            if out is None:
                continue
            diffs = sum(
                a != b
                for a, b in zip(out.chromosome.assignment, ind.chromosome.assignment)
            )
            assert diffs == 1
            assert out.chromosome.service_seq == ind.chromosome.service_seq


class TestRuinConstruct:
    def test_ceil_rounds_up_to_one(self):
        inst = cross_instance()
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=2.0)
        ctx, evaluator = make_context(inst, fleet, ruin_fraction=0.05)
        ind = evaluator.build(Chromosome([1, 2, 3], [1, 2, 1]))
        out = op_ruin_construct(ind, ctx, random.Random(0))
        assert is_valid_chromosome(out, 3, fleet.n_vehicles)

    def test_restores_full_coverage(self):
        inst = generate_instance(15, 30, 8, 10.0, seed=32)
        fleet = FleetConfig(trucks=2, drones=2, delta=4, tau=0.5)
        ctx, evaluator = make_context(inst, fleet)
        rng = random.Random(3)
        for _ in range(300):
            ind = evaluator.build(random_chromosome(8, fleet, rng))
            out = op_ruin_construct(ind, ctx, rng)
            assert is_valid_chromosome(out, 8, fleet.n_vehicles)


class TestRefine:
    def test_cost_never_increases(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=33)
        fleet = FleetConfig(trucks=1, drones=2, delta=3, tau=0.3)
        ctx, evaluator = make_context(inst, fleet, ls_steps=12)
        rng = random.Random(4)
        for _ in range(30):
            ind = evaluator.build(random_chromosome(5, fleet, rng))
            before = penalized_cost(ind.evaluation, ctx.w_inf)
            after = refine(ind, ctx)
            assert after.cost <= before

    def test_determinism_under_seed(self):
        inst = generate_instance(12, 24, 5, 10.0, seed=34)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=0.5)

        def run():
            ctx, evaluator = make_context(inst, fleet, seed=11, ls_steps=10)
            ind = evaluator.build(
                random_chromosome(5, fleet, random.Random(99))
            )
            return refine(ind, ctx)

        a, b = run(), run()
        assert a.chromosome.service_seq == b.chromosome.service_seq
        assert a.cost == b.cost

    def test_reaches_oracle_optimum_often(self):
        inst = generate_instance(9, 14, 4, 10.0, seed=35)
        fleet = FleetConfig(trucks=1, drones=1, delta=None, tau=1.0)
        optimum = exhaustive_solve(inst, fleet).makespan
        ctx, evaluator = make_context(inst, fleet, seed=0)
        rng = random.Random(123)
        hits = 0
        trials = 100
        for _ in range(trials):
            ind = evaluator.build(random_chromosome(4, fleet, rng))
            out = refine(ind, ctx)
            if out.evaluation.feasible and out.evaluation.makespan <= optimum + 1e-9:
                hits += 1
        assert hits >= trials // 2, f"only {hits}/{trials} refinements reached optimum"
