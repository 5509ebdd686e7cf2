"""
Petri net interpretation of a system: items are places, actions are
transitions and a configuration is a marking. Token colors track tags
(``ct<n>``) and locations (``cl<n>``) so that processes can be extracted from a
colored run.
"""

import collections
import logging
from dataclasses import dataclass, field

from snakes.nets import Marking, MultiSet, PetriNet, Place, Substitution, Transition, Variable, dot

from django_imds.decomposition import RESIDENT, TRAVELER
from django_imds.engine import ReachGraph, reach
from django_imds.exceptions import ColorPoolExhausted, FreshPoolExhausted, NotEnabledError
from django_imds.system import Configuration, locations_of, sort_items, tags_of

PCOL = "ct"
SCOL = "cl"

STATIC = "static"
DYNAMIC = "dynamic"
TERMINATED = "terminated"
OPEN = "open"

logger = logging.getLogger("django_imds.petri")


class Color(str):
    """A token color such as ``ct1`` (a tag) or ``cl2`` (a location)."""

    @classmethod
    def make(cls, family, index):
        return cls(f"{family}{index}")

    @property
    def family(self):
        return self[:2]

    @property
    def index(self):
        return int(self[2:])


class ColorPool:
    """
    Hands out colors per family. Released colors are reused first, in the
    order they were released.
    """

    def __init__(self, limits=None):
        self.limits = limits or {}
        self.issued = {PCOL: 0, SCOL: 0}
        self.released = {PCOL: collections.deque(), SCOL: collections.deque()}

    def allocate(self, family):
        if self.released[family]:
            return self.released[family].popleft()
        index = self.issued[family] + 1
        limit = self.limits.get(family)
        if limit is not None and index > limit:
            raise ColorPoolExhausted(f"no free {family} color left out of {limit}")
        self.issued[family] = index
        return Color.make(family, index)

    def release(self, color):
        self.released[color.family].append(color)


class ImdsNet:
    """
    The structural net of a system wrapped around a ``snakes`` net. Input arcs
    bind the tokens of the passed and stored input places to the variables
    ``p`` and ``s``; continuation output arcs carry them on, so colors follow
    the tag and the location. Places of items instantiated from fresh
    placeholders are added while the net is played.
    """

    def __init__(self, spec):
        self.spec = spec
        self.net = PetriNet(spec.name)
        self.items = {}
        self.arcs = []
        for item in sort_items(spec.universe):
            self.ensure_place(item)
        for action in sorted(spec.actions, key=lambda a: a.id):
            self.net.add_transition(Transition(action.id))
            self._input(action.input_passed, action.id, "p")
            self._input(action.input_stored, action.id, "s")
            if action.continuation_stored is not None:
                self._output(action.continuation_stored, action.id, "s")
            if action.continuation_passed is not None:
                self._output(action.continuation_passed, action.id, "p")
        self.initial_marking = self.encode(spec.initial)

    def _input(self, item, action_id, variable):
        name = self.ensure_place(item)
        self.net.add_input(name, action_id, Variable(variable))
        self.arcs.append((name, action_id))

    def _output(self, item, action_id, variable):
        name = self.ensure_place(item)
        self.net.add_output(name, action_id, Variable(variable))
        self.arcs.append((action_id, name))

    def ensure_place(self, item):
        name = str(item)
        if not self.net.has_place(name):
            self.net.add_place(Place(name))
            self.items[name] = item
        return name

    @property
    def place_names(self):
        return sorted(self.items)

    @property
    def transition_names(self):
        return sorted(t.name for t in self.net.transition())

    def encode(self, configuration, color=None):
        """The marking of ``configuration``; tokens are ``dot`` unless ``color`` maps items to colors."""
        return Marking(
            (self.ensure_place(item), MultiSet([color(item) if color else dot])) for item in configuration.items
        )

    def decode(self, marking):
        return Configuration.of(self.items[name] for name, tokens in marking.items() if tokens)

    def enabled(self, marking):
        """Names of the transitions enabled in ``marking``."""
        self.net.set_marking(marking)
        return sorted(t.name for t in self.net.transition() if t.modes())

    def fire(self, marking, fired, binding=None, color=None):
        """
        Fire the transition of ``fired`` (a FiredAction) in ``marking`` and put
        tokens on the places of its fresh outputs. Returns the new marking.
        """
        self.net.set_marking(marking)
        transition = self.net.transition(fired.action_id)
        if binding is None:
            modes = transition.modes()
            binding = modes[0] if modes else None
        if binding is None or not transition.enabled(binding):
            raise NotEnabledError(f"transition {fired.action_id} is not enabled")
        transition.fire(binding)

        action = self.spec.action(fired.action_id)
        continuations = {action.continuation_stored, action.continuation_passed}
        for item in fired.outputs:
            if item not in continuations:
                place = self.net.place(self.ensure_place(item))
                place.add(color(item) if color else dot)
        return self.net.get_marking()


def to_petri(spec):
    net = ImdsNet(spec)
    logger.debug(
        "net of %s has %d places, %d transitions and %d arcs",
        spec.name,
        len(net.items),
        len(net.transition_names),
        len(net.arcs),
    )
    return net


ColoredStep = collections.namedtuple("ColoredStep", "step,action_id,consumed,produced,released")


@dataclass
class ColoredTrace:
    initial: tuple = ()
    steps: list = field(default_factory=list)


class TokenGame:
    """
    The colored token game of one run. A token on a passed item place has the
    color of its tag and a token on a stored item place the color of its
    location; a tag color goes back to the pool when its process terminates.
    """

    def __init__(self, net, pool=None):
        spec = net.spec
        self.net = net
        if pool is None:
            tags = set(spec.symbols.tags) | tags_of(spec.passed_items)
            labels = set(spec.symbols.labels) | locations_of(spec.stored_items)
            pool = ColorPool(
                {PCOL: len(tags) + spec.fresh_pool.tags, SCOL: len(labels) + spec.fresh_pool.labels}
            )
        self.pool = pool
        self.configuration = spec.initial
        self.tag_colors = {}
        self.location_colors = {}
        for tag in sorted(tags_of(self.configuration.passed)):
            self.tag_colors[tag] = self.pool.allocate(PCOL)
        for location in sorted(locations_of(self.configuration.stored)):
            self.location_colors[location] = self.pool.allocate(SCOL)
        self.marking = net.encode(self.configuration, self.color_of)
        self.trace = ColoredTrace(tuple((item, self.color_of(item)) for item in self.configuration))

    def color_of(self, item):
        if item.is_passed:
            return self.tag_colors[item.tag]
        return self.location_colors[item.location]

    def fire(self, fired):
        """Play one firing, fresh names already resolved in ``fired``."""
        action = self.net.spec.action(fired.action_id)
        p, s = fired.inputs
        if p not in self.configuration or s not in self.configuration:
            raise NotEnabledError(f"transition {fired.action_id} is not enabled in {self.configuration}")
        consumed = ((p, self.color_of(p)), (s, self.color_of(s)))

        for kind, name in fired.fresh:
            if kind == "tag":
                self.tag_colors[name] = self.pool.allocate(PCOL)
            else:
                self.location_colors[name] = self.pool.allocate(SCOL)

        binding = Substitution(p=consumed[0][1], s=consumed[1][1])
        self.marking = self.net.fire(self.marking, fired, binding, self.color_of)

        released = ()
        if action.continuation_passed is None:
            color = self.tag_colors.pop(p.tag)
            self.pool.release(color)
            released = (color,)
        self.configuration = self.configuration.minus(fired.inputs).plus(fired.outputs)

        produced = tuple((item, self.color_of(item)) for item in sort_items(fired.outputs))
        step = ColoredStep(fired.step_index, fired.action_id, consumed, produced, released)
        self.trace.steps.append(step)
        return step


def colored_run(spec, transitions, net=None):
    """Replay recorded transitions as a colored trace, members of a step in order."""
    game = TokenGame(net or to_petri(spec))
    for transition in transitions:
        for fired in transition.fired:
            game.fire(fired)
    return game.trace


ProcessStep = collections.namedtuple("ProcessStep", "step,action_id")


@dataclass
class ExtractedProcess:
    kind: str
    color: str
    name: str
    start: tuple
    trace: list = field(default_factory=list)
    end: tuple = (OPEN, None)

    @property
    def action_ids(self):
        return [entry.action_id for entry in self.trace]

    @property
    def is_open(self):
        return self.end[0] == OPEN


def extract_processes(trace):
    """
    Split a colored trace into one traveler per tag color lifetime and one
    resident per location color lifetime, in order of start.
    """
    active = {}
    processes = []

    def start(item, color, how):
        if item.is_passed:
            process = ExtractedProcess(TRAVELER, color, f"TR_{item.tag}", how)
        else:
            process = ExtractedProcess(RESIDENT, color, f"RE_{item.location}", how)
        active[color] = process
        processes.append(process)

    for item, color in trace.initial:
        if color not in active:
            start(item, color, (STATIC, 0))
    for step in trace.steps:
        for _item, color in step.consumed:
            active[color].trace.append(ProcessStep(step.step, step.action_id))
        for item, color in step.produced:
            if color not in active:
                start(item, color, (DYNAMIC, step.step))
        for color in step.released:
            active.pop(color).end = (TERMINATED, step.step)
    return processes


SafetyReport = collections.namedtuple(
    "SafetyReport", "safe,max_live_tags,max_live_locations,growth,unsafe_places,states"
)


def check_safe(spec, max_states=None):
    """
    Replay every edge of the reachability graph on the net, checking that no
    place ever holds two tokens. Running out of fresh names is reported as
    growth rather than raised.
    """
    growth = False
    try:
        graph = reach(spec, max_states)
    except FreshPoolExhausted as exc:
        graph = exc.graph
        growth = True
        logger.warning("%s keeps creating tags or labels beyond its fresh pool", spec.name)

    net = to_petri(spec)
    unsafe = set()
    for edge in graph.edges:
        marking = net.fire(net.encode(edge.source), edge.fired[0])
        unsafe.update(name for name, tokens in marking.items() if tokens.size() > 1)

    return SafetyReport(
        safe=not unsafe,
        max_live_tags=max((len(tags_of(state.passed)) for state in graph.states), default=0),
        max_live_locations=max((len(locations_of(state.stored)) for state in graph.states), default=0),
        growth=growth,
        unsafe_places=sorted(unsafe),
        states=len(graph.states),
    )


def _quote(name):
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _palette(keys):
    return {key: f"/set19/{index % 9 + 1}" for index, key in enumerate(sorted(keys))}


def _net_dot(net, color_by=None, marking=None):
    marking = net.initial_marking if marking is None else marking
    items = [net.items[name] for name in net.place_names]
    palette = {}
    if color_by == TRAVELER:
        palette = _palette(tags_of(items))
    elif color_by == RESIDENT:
        palette = _palette({i.destination if i.is_passed else i.location for i in items})

    lines = [f"digraph {_quote(net.spec.name)} {{"]
    for name in net.place_names:
        item = net.items[name]
        attributes = ["shape=circle"]
        if name in marking:
            attributes.append("style=filled")
        key = None
        if color_by == TRAVELER and item.is_passed:
            key = item.tag
        elif color_by == RESIDENT:
            key = item.destination if item.is_passed else item.location
        if key is not None:
            attributes.append(f'color="{palette[key]}"')
        lines.append(f"\t{_quote(name)} [{', '.join(attributes)}];")
    for name in net.transition_names:
        lines.append(f"\t{_quote(name)} [shape=box];")
    for source, target in sorted(net.arcs):
        lines.append(f"\t{_quote(source)} -> {_quote(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graph_dot(graph, name):
    index = graph.state_index
    lines = [f"digraph {_quote(name)} {{"]
    for state in graph.states:
        attributes = [f"label={_quote(state)}"]
        if state in graph.terminal_states:
            attributes.append("shape=doublecircle")
        lines.append(f"\ts{index[state]} [{', '.join(attributes)}];")
    edges = sorted((index[e.source], index[e.target], ", ".join(e.action_ids)) for e in graph.edges)
    for source, target, label in edges:
        lines.append(f"\ts{source} -> s{target} [label={_quote(label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(subject, color_by=None, marking=None, name="reach"):
    """
    Graphviz text for an ``ImdsNet`` (places as circles, marked places filled,
    transitions as boxes) or for a ``ReachGraph`` (states as nodes, action ids
    on the edges). Node and edge order is sorted.
    """
    if isinstance(subject, ReachGraph):
        return _graph_dot(subject, name)
    return _net_dot(subject, color_by, marking)
