"""Termination, deadlock and per-tag progress over a reachability graph."""

import collections
import logging
from dataclasses import dataclass, field

from django_imds.engine import prepared
from django_imds.exceptions import NotTerminalError, TruncatedGraphError
from django_imds.system import tags_of

TERMINATION = "termination"
DEADLOCK = "deadlock"
PARTIAL_DEADLOCK = "partial_deadlock"

LIVE = "live"
DEADLOCKED = "deadlocked"
ABSENT = "absent"

logger = logging.getLogger("django_imds.analysis")


@dataclass(frozen=True)
class Verdict:
    state: object
    kind: str
    stuck_tags: frozenset = frozenset()
    live_tags: frozenset = frozenset()


@dataclass(frozen=True)
class TagProgress:
    tag: str
    status: str
    deadlocked_from: tuple = ()


@dataclass
class Analysis:
    terminal: list = field(default_factory=list)
    progress: dict = field(default_factory=dict)
    partial_deadlocks: list = field(default_factory=list)

    @property
    def deadlocks(self):
        return [v for v in self.terminal if v.kind == DEADLOCK]

    @property
    def has_deadlock(self):
        return bool(self.deadlocks or self.partial_deadlocks)


def classify_terminal(configuration, spec):
    """
    A terminal configuration with no passed item is a termination; one with
    pending passed items is a deadlock of their tags.
    """
    if prepared(configuration, spec):
        raise NotTerminalError(f"actions are prepared in {configuration}")
    if not configuration.passed:
        return Verdict(configuration, TERMINATION)
    return Verdict(configuration, DEADLOCK, tags_of(configuration.passed))


def _progressing(graph, tag):
    """States from which some path fires an action consuming a passed item with ``tag``."""
    seeds = {e.source for e in graph.edges if any(f.input_passed.tag == tag for f in e.fired)}
    found = set(seeds)
    frontier = collections.deque(seeds)
    while frontier:
        state = frontier.popleft()
        for edge in graph.predecessors.get(state, ()):
            if edge.source not in found:
                found.add(edge.source)
                frontier.append(edge.source)
    return found


def tag_progress(graph, spec):
    """
    Map every tag to its progress. A tag is deadlocked from a state where it has
    a pending passed item that no path from that state ever consumes.
    """
    if graph.truncated:
        raise TruncatedGraphError("progress on a truncated reachability graph would be unsound")
    tags = set(spec.symbols.tags)
    for state in graph.states:
        tags |= tags_of(state.passed)

    progress = {}
    for tag in sorted(tags):
        progressing = _progressing(graph, tag)
        pending = [state for state in graph.states if tag in tags_of(state.passed)]
        stuck = tuple(state for state in pending if state not in progressing)
        if stuck:
            status = DEADLOCKED
        elif pending:
            status = LIVE
        else:
            status = ABSENT
        progress[tag] = TagProgress(tag, status, stuck)
    return progress


def partial_deadlocks(graph, spec, progress=None):
    """Non-terminal states where one pending tag is stuck while another pending tag still progresses."""
    progress = progress if progress is not None else tag_progress(graph, spec)
    stuck_at = collections.defaultdict(set)
    for tag, entry in progress.items():
        for state in entry.deadlocked_from:
            stuck_at[state].add(tag)

    verdicts = []
    terminal = set(graph.terminal_states)
    for state in graph.states:
        if state in terminal or not stuck_at[state]:
            continue
        live = tags_of(state.passed) - stuck_at[state]
        if live:
            verdicts.append(Verdict(state, PARTIAL_DEADLOCK, frozenset(stuck_at[state]), frozenset(live)))
    return verdicts


def analyze(graph, spec):
    progress = tag_progress(graph, spec)
    analysis = Analysis(
        terminal=[classify_terminal(state, spec) for state in graph.terminal_states],
        progress=progress,
        partial_deadlocks=partial_deadlocks(graph, spec, progress),
    )
    logger.info(
        "%s: %d terminal states (%d deadlocked), %d partial deadlocks",
        spec.name,
        len(analysis.terminal),
        len(analysis.deadlocks),
        len(analysis.partial_deadlocks),
    )
    return analysis
