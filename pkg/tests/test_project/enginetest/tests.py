"""Firing rule, concurrency policies, runs and the reachability graph."""

import itertools
import json

from django.test import SimpleTestCase
from hypothesis import given

from django_imds.engine import (
    INTERMEDIATE,
    MAX_CONCURRENCY,
    FreshAllocator,
    Policy,
    fire,
    fire_all,
    prepared,
    reach,
    run,
    serialize,
    step,
)
from django_imds.exceptions import (
    BoundExceeded,
    FreshPoolExhausted,
    InvalidConfigurationError,
    NoPreparedActionError,
    NotPreparedError,
)
from django_imds.serialization import graph_record, transition_record
from django_imds.signals import state_space_explored, transition_fired
from django_imds.system import FreshPool

from ..systems import (
    AFTER_BOTH,
    AFTER_LAM1,
    F2_FINAL,
    F2_INITIAL,
    LAM1,
    LAM2,
    LAM3,
    P,
    S,
    empty,
    f2,
    forker,
    spawner,
    systems,
)


class PolicyTestCase(SimpleTestCase):
    def test_alias(self):
        self.assertEqual(Policy("max").kind, MAX_CONCURRENCY)

    def test_rejects_unknown_policy(self):
        with self.assertRaises(ValueError):
            Policy("eager")

    def test_rejects_non_positive_k(self):
        with self.assertRaises(ValueError):
            Policy(INTERMEDIATE, k=0)


class FiringTestCase(SimpleTestCase):
    def test_prepared(self):
        self.assertEqual(prepared(F2_INITIAL, f2()), [LAM1, LAM2])
        self.assertEqual(prepared(AFTER_BOTH, f2()), [LAM3])
        self.assertEqual(prepared(F2_FINAL, f2()), [])

    def test_fire(self):
        target, fired = fire(F2_INITIAL, LAM1)
        self.assertEqual(target, AFTER_LAM1)
        self.assertEqual(fired.action_id, "lam1")
        self.assertEqual(fired.node, "A")
        self.assertEqual(fired.fresh, ())

    def test_fire_twice(self):
        target, _fired = fire(fire(F2_INITIAL, LAM1)[0], LAM2)
        self.assertEqual(target, AFTER_BOTH)

    def test_fire_not_prepared(self):
        with self.assertRaises(NotPreparedError):
            fire(F2_INITIAL, LAM3)

    def test_fire_all_rejects_conflicts(self):
        with self.assertRaises(InvalidConfigurationError):
            fire_all(F2_INITIAL, [LAM1, LAM3])

    def test_fire_all(self):
        transition = fire_all(F2_INITIAL, [LAM1, LAM2])
        self.assertEqual(transition.target, AFTER_BOTH)
        self.assertEqual(transition.action_ids, ("lam1", "lam2"))
        self.assertEqual(
            [str(i) for i in transition.consumed], ["t1.A.sv1", "t2.B.sv2", "A.rA0", "B.rB0"]
        )

    def test_serialize(self):
        transition = fire_all(F2_INITIAL, [LAM1, LAM2], step_index=1)
        parts = list(serialize(transition))
        self.assertEqual([t.action_ids for t in parts], [("lam1",), ("lam2",)])
        self.assertEqual(parts[0].target, AFTER_LAM1)
        self.assertEqual(parts[1].source, AFTER_LAM1)
        self.assertEqual(parts[1].target, transition.target)


class FreshNameTestCase(SimpleTestCase):
    def test_fresh_tag(self):
        spec = spawner(1)
        target, fired = fire(spec.initial, spec.actions[0], FreshAllocator(spec.fresh_pool))
        self.assertIn(P("t#0", "A", "go"), target)
        self.assertEqual(fired.fresh, (("tag", "t#0"),))

    def test_fresh_label(self):
        spec = forker(1)
        target, fired = fire(spec.initial, spec.actions[0], FreshAllocator(spec.fresh_pool))
        self.assertIn(S("l#0", "r0"), target)
        self.assertEqual(fired.fresh, (("label", "l#0"),))

    def test_lowest_free_name_first(self):
        spec = spawner(2)
        allocator = FreshAllocator(FreshPool(2, 0))
        used = spec.initial.plus([P("t#0", "A", "go")])
        self.assertEqual(allocator.tags(used, spec.actions[0]), ["t#1"])
        self.assertEqual(allocator.tags(spec.initial, spec.actions[0]), ["t#0"])

    def test_pool_exhausted(self):
        spec = spawner(1)
        allocator = FreshAllocator(spec.fresh_pool)
        target, _fired = fire(spec.initial, spec.actions[0], allocator)
        with self.assertRaises(FreshPoolExhausted):
            fire(target, spec.actions[0], allocator)

    def test_reach_keeps_the_partial_graph(self):
        with self.assertRaises(FreshPoolExhausted) as caught:
            reach(spawner(1))
        graph = caught.exception.graph
        self.assertTrue(graph.truncated)
        self.assertEqual(len(graph.states), 2)


class StepTestCase(SimpleTestCase):
    def test_max_concurrency(self):
        transition = step(F2_INITIAL, f2(), Policy(MAX_CONCURRENCY))
        self.assertEqual(transition.action_ids, ("lam1", "lam2"))

    def test_interleaving(self):
        for seed in range(10):
            transition = step(F2_INITIAL, f2(), Policy(seed=seed))
            self.assertEqual(len(transition.fired), 1)
            self.assertIn(transition.action_ids[0], ("lam1", "lam2"))

    def test_nothing_prepared(self):
        with self.assertRaises(NoPreparedActionError):
            step(F2_FINAL, f2(), Policy())


class RunTestCase(SimpleTestCase):
    def test_interleaving_run(self):
        for seed in range(10):
            trace = run(f2(), Policy(seed=seed), 10)
            self.assertEqual(len(trace), 3)
            self.assertEqual(trace[-1].action_ids, ("lam3",))
            self.assertEqual(trace[-1].target, F2_FINAL)
            self.assertEqual([t.step_index for t in trace], [1, 2, 3])

    def test_max_concurrency_run(self):
        trace = run(f2(), Policy("max"), 10)
        self.assertEqual([t.action_ids for t in trace], [("lam1", "lam2"), ("lam3",)])

    def test_intermediate_run(self):
        self.assertEqual(len(run(f2(), Policy(INTERMEDIATE, k=1), 10)), 3)
        self.assertEqual(len(run(f2(), Policy(INTERMEDIATE, k=2), 10)), 2)

    def test_max_steps(self):
        self.assertEqual(len(run(f2(), Policy(), 1)), 1)

    def test_empty_system(self):
        self.assertEqual(run(empty(), Policy(), 10), [])

    def test_same_seed_same_trace(self):
        first = run(f2(), Policy(seed=7), 10)
        second = run(f2(), Policy(seed=7), 10)
        self.assertEqual([t.action_ids for t in first], [t.action_ids for t in second])

    def test_signal(self):
        seen = []

        def collect(sender, transition, **kwargs):
            seen.append(transition.step_index)

        transition_fired.connect(collect)
        try:
            run(f2(), Policy("max"), 10)
        finally:
            transition_fired.disconnect(collect)
        self.assertEqual(seen, [1, 2])


class ReachTestCase(SimpleTestCase):
    def test_f2(self):
        graph = reach(f2())
        self.assertEqual(graph.summary(), "5 states, 5 transitions, 1 terminal")
        self.assertEqual(graph.terminal_states, [F2_FINAL])
        self.assertEqual(graph.states[0], F2_INITIAL)
        self.assertFalse(graph.truncated)

    def test_bound(self):
        with self.assertRaises(BoundExceeded) as caught:
            reach(f2(), max_states=3)
        self.assertTrue(caught.exception.graph.truncated)
        self.assertEqual(reach(f2(), max_states=5).summary(), "5 states, 5 transitions, 1 terminal")

    def test_empty_system(self):
        self.assertEqual(reach(empty()).summary(), "1 states, 0 transitions, 1 terminal")

    def test_predecessors(self):
        graph = reach(f2())
        self.assertEqual(sorted(e.action_ids[0] for e in graph.predecessors[AFTER_BOTH]), ["lam1", "lam2"])
        self.assertEqual([e.target for e in graph.successors[AFTER_BOTH]], [F2_FINAL])

    def test_signal(self):
        graphs = []

        def collect(sender, graph, **kwargs):
            graphs.append(graph)

        state_space_explored.connect(collect)
        try:
            graph = reach(f2())
        finally:
            state_space_explored.disconnect(collect)
        self.assertEqual(graphs, [graph])


class RecordTestCase(SimpleTestCase):
    def test_transition_record(self):
        transition = run(f2(), Policy("max"), 10)[0]
        self.assertEqual(
            transition_record(transition),
            {
                "step": 1,
                "actions": ["lam1", "lam2"],
                "consumed": ["t1.A.sv1", "t2.B.sv2", "A.rA0", "B.rB0"],
                "produced": ["t1.B.sv3", "t2.A.sv4", "A.rA1", "B.rB1"],
                "fresh": [],
            },
        )

    def test_fresh_in_record(self):
        transition = run(spawner(1), Policy(), 1)[0]
        self.assertEqual(transition_record(transition)["fresh"], [["spawn", "tag", "t#0"]])

    def test_graph_record(self):
        record = graph_record(reach(f2()))
        self.assertEqual(len(record["states"]), 5)
        self.assertEqual(record["states"][0], ["t1.A.sv1", "t2.B.sv2", "A.rA0", "B.rB0"])
        self.assertEqual(record["terminal"], [4])
        self.assertFalse(record["truncated"])
        self.assertEqual(json.loads(json.dumps(record)), record)


class LawTestCase(SimpleTestCase):
    @given(systems())
    def test_firing_rule(self, spec):
        graph = reach(spec)
        for edge in graph.edges:
            fired = edge.fired[0]
            self.assertEqual(edge.target, edge.source.minus(fired.inputs).plus(fired.outputs))
            self.assertTrue(edge.target.in_hite())
            self.assertTrue(edge.target.is_valid())

    @given(systems())
    def test_terminal_states_have_nothing_prepared(self, spec):
        graph = reach(spec)
        for state in graph.states:
            self.assertEqual(state in graph.terminal_states, not prepared(state, spec))

    @given(systems())
    def test_diamond(self, spec):
        for state in reach(spec).states:
            for a, b in itertools.combinations(prepared(state, spec), 2):
                if a.node == b.node:
                    continue
                ab = fire(fire(state, a)[0], b)[0]
                ba = fire(fire(state, b)[0], a)[0]
                self.assertEqual(ab, ba)
                self.assertEqual(fire_all(state, [a, b]).target, ab)

    @given(systems())
    def test_runs_follow_the_graph(self, spec):
        graph = reach(spec)
        states = set(graph.states)
        for seed in range(3):
            trace = run(spec, Policy(MAX_CONCURRENCY, seed=seed), 20)
            for transition in trace:
                for part in serialize(transition):
                    self.assertIn(part.target, states)
