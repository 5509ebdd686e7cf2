"""Execution of a system as a labeled transition system."""

import collections
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property

from django_imds.exceptions import (
    BoundExceeded,
    FreshPoolExhausted,
    InvalidConfigurationError,
    NoPreparedActionError,
    NotPreparedError,
)
from django_imds.signals import state_space_explored, transition_fired
from django_imds.system import (
    FRESH_LABEL_PREFIX,
    FRESH_TAG_PREFIX,
    FreshPool,
    PassedItem,
    StoredItem,
    destinations_of,
    locations_of,
    pool_names,
    sort_items,
    tags_of,
)

INTERLEAVING = "interleaving"
MAX_CONCURRENCY = "max_concurrency"
INTERMEDIATE = "intermediate"
POLICIES = (INTERLEAVING, MAX_CONCURRENCY, INTERMEDIATE)
POLICY_ALIASES = {"max": MAX_CONCURRENCY}

logger = logging.getLogger("django_imds.engine")


@dataclass(frozen=True)
class Policy:
    kind: str = INTERLEAVING
    k: int = 1
    seed: int = 0

    def __post_init__(self):
        kind = POLICY_ALIASES.get(self.kind, self.kind)
        if kind not in POLICIES:
            raise ValueError(f"Unknown concurrency policy: {self.kind!r}")
        if self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "kind", kind)


@dataclass(frozen=True)
class FiredAction:
    """The record of one firing, fresh placeholders already resolved."""

    action_id: str
    inputs: tuple
    outputs: tuple
    fresh: tuple = ()
    step_index: int = 0

    @property
    def input_passed(self):
        return self.inputs[0]

    @property
    def input_stored(self):
        return self.inputs[1]

    @property
    def node(self):
        return self.inputs[1].location


@dataclass(frozen=True)
class Transition:
    source: object
    fired: tuple
    target: object
    step_index: int = 0

    @property
    def action_ids(self):
        return tuple(f.action_id for f in self.fired)

    @property
    def consumed(self):
        return sort_items(i for f in self.fired for i in f.inputs)

    @property
    def produced(self):
        return sort_items(i for f in self.fired for i in f.outputs)


class FreshAllocator:
    """
    Hands out the names of fresh tags (``t#n``) and labels (``l#n``) from a
    bounded pool. The lowest name absent from the configuration is used first,
    so names whose items have left the configuration are reused.
    """

    def __init__(self, pool=None):
        self.pool = pool or FreshPool()
        self.tag_names = pool_names(FRESH_TAG_PREFIX, self.pool.tags)
        self.label_names = pool_names(FRESH_LABEL_PREFIX, self.pool.labels)

    def _free(self, names, used, count, what, action):
        free = [n for n in names if n not in used]
        if len(free) < count:
            raise FreshPoolExhausted(
                f"action {action.id} needs {count} fresh {what}(s) but the pool of {len(names)} is exhausted"
            )
        return free[:count]

    def tags(self, configuration, action, taken=frozenset()):
        used = tags_of(configuration.items) | set(taken)
        return self._free(self.tag_names, used, len(action.fresh_passed), "tag", action)

    def labels(self, configuration, action, taken=frozenset()):
        used = locations_of(configuration.items) | destinations_of(configuration.items) | set(taken)
        return self._free(self.label_names, used, len(action.fresh_stored), "label", action)


def instantiate(action, configuration, allocator, taken=frozenset()):
    """
    Resolve the fresh placeholders of ``action`` against ``configuration``.

    Returns ``(outputs, fresh)`` where ``fresh`` lists ``(kind, name)`` pairs in
    output order.
    """
    tags = iter(allocator.tags(configuration, action, taken))
    labels = iter(allocator.labels(configuration, action, taken))
    outputs = []
    fresh = []
    for item in action.out_stored:
        if item.is_fresh:
            name = next(labels)
            fresh.append(("label", name))
            item = StoredItem(name, item.resource)
        outputs.append(item)
    for item in action.out_passed:
        if item.is_fresh:
            name = next(tags)
            fresh.append(("tag", name))
            item = PassedItem(name, item.destination, item.service)
        outputs.append(item)
    return tuple(sort_items(outputs)), tuple(fresh)


def prepared(configuration, spec):
    """The actions whose both input items are in ``configuration``, ordered by node then id."""
    actions = []
    for p in configuration.passed:
        s = configuration.stored_at(p.destination)
        if s is None:
            continue
        actions.extend(spec.actions_by_input.get((p, s), ()))
    return sorted(actions, key=lambda a: (a.node, a.id))


def _check_target(target, action_ids):
    if not target.in_hite():
        raise InvalidConfigurationError(f"firing {', '.join(action_ids)} leaves H(ITE): {target}")
    if not target.is_valid():
        raise InvalidConfigurationError(
            f"firing {', '.join(action_ids)} directs passed items to missing nodes: {target}"
        )


def fire(configuration, action, allocator=None, step_index=0, taken=frozenset()):
    """Fire a prepared action. Returns ``(target, FiredAction)``."""
    if action.input_passed not in configuration or action.input_stored not in configuration:
        raise NotPreparedError(f"action {action.id} is not prepared in {configuration}")
    allocator = allocator or FreshAllocator()
    outputs, fresh = instantiate(action, configuration, allocator, taken)
    target = configuration.minus(action.inputs).plus(outputs)
    _check_target(target, [action.id])
    return target, FiredAction(action.id, action.inputs, outputs, fresh, step_index)


def fire_all(configuration, actions, allocator=None, step_index=0):
    """Fire actions on pairwise distinct nodes simultaneously."""
    nodes = [a.node for a in actions]
    if len(set(nodes)) != len(nodes):
        raise InvalidConfigurationError("actions prepared on one node are in conflict and cannot fire together")
    allocator = allocator or FreshAllocator()
    taken = set()
    fired = []
    for action in actions:
        if action.input_passed not in configuration or action.input_stored not in configuration:
            raise NotPreparedError(f"action {action.id} is not prepared in {configuration}")
        outputs, fresh = instantiate(action, configuration, allocator, taken)
        taken.update(name for _kind, name in fresh)
        fired.append(FiredAction(action.id, action.inputs, outputs, fresh, step_index))
    target = configuration.minus(i for f in fired for i in f.inputs).plus(i for f in fired for i in f.outputs)
    _check_target(target, [f.action_id for f in fired])
    return Transition(configuration, tuple(fired), target, step_index)


def step(configuration, spec, policy, rng=None, allocator=None, step_index=0):
    """
    Select a conflict-free set of prepared actions according to ``policy`` and
    fire it. At most one action is chosen per node; the choice among actions of
    one node is made by the seeded selector.
    """
    candidates = prepared(configuration, spec)
    if not candidates:
        raise NoPreparedActionError(f"no prepared action in {configuration}")
    rng = rng or random.Random(policy.seed)
    by_node = collections.defaultdict(list)
    for action in candidates:
        by_node[action.node].append(action)
    nodes = sorted(by_node)

    if policy.kind == INTERLEAVING:
        chosen = [rng.choice(candidates)]
    elif policy.kind == MAX_CONCURRENCY:
        chosen = [rng.choice(by_node[node]) for node in nodes]
    else:
        picked = sorted(rng.sample(nodes, min(policy.k, len(nodes))))
        chosen = [rng.choice(by_node[node]) for node in picked]

    return fire_all(configuration, chosen, allocator or FreshAllocator(spec.fresh_pool), step_index)


def serialize(transition):
    """Split a simultaneous transition into single-action transitions fired in member order."""
    current = transition.source
    for fired in transition.fired:
        target = current.minus(fired.inputs).plus(fired.outputs)
        yield Transition(current, (fired,), target, transition.step_index)
        current = target


def run(spec, policy, max_steps, allocator=None):
    """
    Apply ``step`` until no action is prepared or ``max_steps`` transitions
    were made. Deterministic for a given policy seed.
    """
    rng = random.Random(policy.seed)
    allocator = allocator or FreshAllocator(spec.fresh_pool)
    configuration = spec.initial
    trace = []
    for index in range(1, max_steps + 1):
        if not prepared(configuration, spec):
            break
        transition = step(configuration, spec, policy, rng, allocator, step_index=index)
        logger.debug("step %d fired %s", index, ", ".join(transition.action_ids))
        transition_fired.send(sender=None, transition=transition)
        trace.append(transition)
        configuration = transition.target
    logger.info("run of %s under %s policy made %d steps", spec.name, policy.kind, len(trace))
    return trace


@dataclass
class ReachGraph:
    initial: object
    states: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    terminal_states: list = field(default_factory=list)
    truncated: bool = False

    def summary(self):
        return f"{len(self.states)} states, {len(self.edges)} transitions, {len(self.terminal_states)} terminal"

    @cached_property
    def state_index(self):
        return {state: index for index, state in enumerate(self.states)}

    @cached_property
    def successors(self):
        result = collections.defaultdict(list)
        for edge in self.edges:
            result[edge.source].append(edge)
        return result

    @cached_property
    def predecessors(self):
        result = collections.defaultdict(list)
        for edge in self.edges:
            result[edge.target].append(edge)
        return result


def reach(spec, max_states=None, allocator=None):
    """
    Breadth-first closure of ``fire`` over every prepared action, one action
    per edge, starting from the initial configuration.
    """
    allocator = allocator or FreshAllocator(spec.fresh_pool)
    graph = ReachGraph(initial=spec.initial, states=[spec.initial])
    seen = {spec.initial}
    frontier = collections.deque([spec.initial])

    while frontier:
        configuration = frontier.popleft()
        actions = prepared(configuration, spec)
        if not actions:
            graph.terminal_states.append(configuration)
            continue
        for action in actions:
            try:
                target, fired = fire(configuration, action, allocator)
            except FreshPoolExhausted as exc:
                graph.truncated = True
                logger.warning("reach of %s truncated: %s", spec.name, exc)
                raise FreshPoolExhausted(str(exc), graph=graph) from exc
            graph.edges.append(Transition(configuration, (fired,), target))
            if target in seen:
                continue
            if max_states is not None and len(seen) >= max_states:
                graph.truncated = True
                logger.warning("reach of %s truncated at %d states", spec.name, max_states)
                raise BoundExceeded(f"more than {max_states} reachable states", graph=graph)
            seen.add(target)
            graph.states.append(target)
            frontier.append(target)

    logger.info("reach of %s explored %s", spec.name, graph.summary())
    state_space_explored.send(sender=None, graph=graph)
    return graph
