"""
Asynchronous and sequential processes, their orders and the two canonical
decompositions.

The production predicates evaluate the quota equations. The ``*_oracle``
functions check the definitions by enumerating every valid configuration of
the item universe; they are exponential and exist to test the equations.
"""

import collections
import itertools
import logging
import math
from dataclasses import dataclass

from django.conf import settings

from django_imds.decomposition import (
    CUSTOM,
    RESIDENT,
    TRAVELER,
    Decomposition,
    Quota,
    project_config,
    resident_quota,
    traveler_quota,
)
from django_imds.exceptions import CrossClassError, ResolutionError, UniverseTooLarge
from django_imds.system import Configuration, destinations_of, locations_of, sort_items, tags_of

logger = logging.getLogger("django_imds.canonical")


class SequentialCheck(collections.namedtuple("SequentialCheck", "ok,tag,label")):
    """The outcome of ``is_sequential`` with its witness tag or label."""

    __slots__ = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    quota: Quota
    key: str = None

    @property
    def name(self):
        return self.quota.name

    @property
    def passed(self):
        return self.quota.passed

    @property
    def stored(self):
        return self.quota.stored


def traveler(tag, spec):
    """TR_t: every passed item with tag ``t`` and every stored item."""
    return ProcessSpec(TRAVELER, traveler_quota(tag, spec), tag)


def resident(label, spec):
    """RE_l: every item with ``l`` as destination or location."""
    return ProcessSpec(RESIDENT, resident_quota(label, spec), label)


def required_stored(passed, spec):
    """The union of STO_destination(p) over ``passed``."""
    destinations = destinations_of(passed)
    return frozenset(s for s in spec.stored_items if s.location in destinations)


def pattern_destinations(quota, spec):
    """
    The labels the patterns of ``quota`` direct passed items to. A tag pattern
    owns its tag on every label, whether or not the system ever sends it there.
    """
    labels = set(quota.passed_labels)
    if quota.passed_tags:
        labels |= set(spec.symbols.labels) | locations_of(spec.stored_items)
    return frozenset(labels)


def is_async_process(quota, spec):
    destinations = pattern_destinations(quota, spec)
    required = required_stored(quota.passed_in(spec), spec)
    required |= {s for s in spec.stored_items if s.location in destinations}
    return quota.stored_in(spec) == required


def make_process(passed, spec):
    """PR(QP): the asynchronous process with the passed item quota ``passed``."""
    passed = frozenset(passed)
    names = ", ".join(str(p) for p in sort_items(passed))
    quota = Quota(f"PR({names})", passed, required_stored(passed, spec))
    return ProcessSpec(CUSTOM, quota)


def is_sequential(passed, spec=None):
    """
    ``PR(passed)`` is sequential iff every item has one tag or every item has
    one destination. The witness tag is preferred when both hold.
    """
    tags = tags_of(passed)
    if len(tags) <= 1:
        return SequentialCheck(True, next(iter(tags), None), None)
    destinations = destinations_of(passed)
    if len(destinations) == 1:
        return SequentialCheck(True, None, next(iter(destinations)))
    return SequentialCheck(False, None, None)


def valid_configurations(spec, limit=None):
    """
    Every configuration over the item universe of ``spec`` that lies in H(ITE)
    and directs its passed items to present nodes, reachable or not.
    """
    if limit is None:
        limit = getattr(settings, "IMDS_ORACLE_LIMIT", 200000)
    by_tag = collections.defaultdict(list)
    for item in spec.passed_items:
        by_tag[item.tag].append(item)
    by_location = collections.defaultdict(list)
    for item in spec.stored_items:
        by_location[item.location].append(item)

    choices = [[None, *sort_items(by_tag[tag])] for tag in sorted(by_tag)]
    choices += [[None, *sort_items(by_location[location])] for location in sorted(by_location)]
    size = math.prod(len(c) for c in choices)
    if size > limit:
        raise UniverseTooLarge(f"{size} candidate configurations exceed the limit of {limit}")

    configurations = []
    for combination in itertools.product(*choices):
        configuration = Configuration.of(i for i in combination if i is not None)
        if configuration.is_valid():
            configurations.append(configuration)
    logger.debug("%d valid configurations out of %d candidates", len(configurations), size)
    return configurations


def is_async_process_oracle(quota, spec, configurations=None):
    """
    Check that every component configuration directs its pending passed items
    to locations it holds, and that every stored item of the quota is the
    destination of some pending passed item in some component configuration.

    Items owned by pattern only pend in configurations made of one such item
    and one stored item on its destination.
    """
    if configurations is None:
        configurations = valid_configurations(spec)
    stored = quota.stored_in(spec)
    visited = set()
    for label in pattern_destinations(quota, spec):
        nodes = spec.stored_at_location(label)
        if not nodes:
            continue
        if not nodes <= stored:
            return False
        visited.add(label)
    for configuration in configurations:
        component = project_config(configuration, quota)
        destinations = destinations_of(component.passed)
        if not destinations <= locations_of(component.stored):
            return False
        visited |= destinations
    return all(s.location in visited for s in stored)


def is_sequential_oracle(passed, spec, configurations=None):
    """Check that no component configuration holds pending passed items for two nodes."""
    if configurations is None:
        configurations = valid_configurations(spec)
    passed = frozenset(passed)
    for configuration in configurations:
        if len(destinations_of(configuration.passed & passed)) > 1:
            return False
    return True


def process_classes(process):
    """The tag- and label-classes ``process`` belongs to. PR(∅) belongs to none."""
    passed = process.passed
    if not passed:
        return set()
    classes = set()
    tags = tags_of(passed)
    if len(tags) == 1:
        classes.add(("tag", next(iter(tags))))
    destinations = destinations_of(passed)
    if len(destinations) == 1:
        classes.add(("label", next(iter(destinations))))
    return classes


def _same_class(p1, p2):
    if not process_classes(p1) & process_classes(p2):
        raise CrossClassError(f"{p1.name} and {p2.name} do not belong to one tag or label class")


def order_lt(p1, p2):
    """``PR(QP) < PR(QP')`` iff ``QP`` is a strict subset of ``QP'``."""
    _same_class(p1, p2)
    return p1.passed < p2.passed


def order_leq(p1, p2):
    _same_class(p1, p2)
    return p1.passed <= p2.passed


def class_maximum(key, spec):
    """The canonical process of the class of tag or label ``key``."""
    if spec.symbols.is_tag(key):
        return traveler(key, spec)
    if spec.symbols.is_label(key):
        return resident(key, spec)
    raise ResolutionError(f"unknown label or tag {key!r}")


def canonical_processes(spec, mode):
    if mode == TRAVELER:
        tags = set(spec.symbols.tags) | tags_of(spec.passed_items)
        return [traveler(tag, spec) for tag in sorted(tags)]
    if mode == RESIDENT:
        labels = set(spec.symbols.labels) | destinations_of(spec.passed_items) | locations_of(spec.stored_items)
        return [resident(label, spec) for label in sorted(labels)]
    raise ValueError(f"Unknown canonical decomposition: {mode!r}")


def canonical_decomposition(spec, mode):
    """
    TD (``mode="traveler"``) or RD (``mode="resident"``). Processes of tags or
    labels created at run time are started on demand.
    """
    quotas = tuple(p.quota for p in canonical_processes(spec, mode))
    logger.debug("%s decomposition of %s has %d processes", mode, spec.name, len(quotas))
    return Decomposition(quotas, mode, spec)
