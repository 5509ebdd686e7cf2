"""Communication items, actions, configurations and the validity rules of a system."""

import collections
import logging
import re
import sys
from dataclasses import dataclass, field
from functools import cached_property

from django_imds.exceptions import ResolutionError
from django_imds.signals import system_validated

FRESH = "@fresh"
FRESH_TAG_PREFIX = "t#"
FRESH_LABEL_PREFIX = "l#"
POOL_NAME_RE = re.compile(r"^[tl]#\d+$")

logger = logging.getLogger("django_imds.system")


class PassedItem(collections.namedtuple("PassedItem", "tag,destination,service")):
    """A consumable item ``tag.destination.service`` (a message or a call)."""

    __slots__ = ()
    is_passed = True

    def __str__(self):
        return f"{self.tag}.{self.destination}.{self.service}"

    @property
    def is_fresh(self):
        return self.tag == FRESH


class StoredItem(collections.namedtuple("StoredItem", "location,resource")):
    """A reusable item ``location.resource`` (the current state of a node)."""

    __slots__ = ()
    is_passed = False

    def __str__(self):
        return f"{self.location}.{self.resource}"

    @property
    def is_fresh(self):
        return self.location == FRESH


FreshPool = collections.namedtuple("FreshPool", "tags,labels", defaults=(0, 0))

Diagnostic = collections.namedtuple("Diagnostic", "action_id,clause,message")


def item_key(item):
    return (0 if item.is_passed else 1, tuple(item))


def sort_items(items):
    return sorted(items, key=item_key)


def tags_of(items):
    return frozenset(i.tag for i in items if i.is_passed)


def destinations_of(items):
    return frozenset(i.destination for i in items if i.is_passed)


def locations_of(items):
    return frozenset(i.location for i in items if not i.is_passed)


def labels_of(items):
    return destinations_of(items) | locations_of(items)


def in_hite(items):
    """
    True when ``items`` holds at most one passed item per tag and at most one
    stored item per location.
    """
    tags = collections.Counter(i.tag for i in items if i.is_passed)
    locations = collections.Counter(i.location for i in items if not i.is_passed)
    return all(n == 1 for n in tags.values()) and all(n == 1 for n in locations.values())


def is_pool_name(name, prefix):
    return bool(POOL_NAME_RE.match(name)) and name.startswith(prefix)


def pool_names(prefix, size):
    return [f"{prefix}{n}" for n in range(size)]


@dataclass(frozen=True)
class SymbolTable:
    labels: tuple = ()
    services: tuple = ()
    resources: tuple = ()
    tags: tuple = ()

    @classmethod
    def build(cls, labels=(), services=(), resources=(), tags=()):
        def interned(names):
            return tuple(dict.fromkeys(sys.intern(n) for n in names))

        return cls(interned(labels), interned(services), interned(resources), interned(tags))

    def is_label(self, name):
        return name in self.labels or is_pool_name(name, FRESH_LABEL_PREFIX)

    def is_tag(self, name):
        return name in self.tags or is_pool_name(name, FRESH_TAG_PREFIX)

    def is_service(self, name):
        return name in self.services

    def is_resource(self, name):
        return name in self.resources

    def namespaces(self):
        return {"label": self.labels, "service": self.services, "resource": self.resources, "tag": self.tags}

    def overlaps(self):
        """Return ``{name: [namespace, ...]}`` for names declared in more than one namespace."""
        seen = collections.defaultdict(list)
        for space, names in self.namespaces().items():
            for name in names:
                seen[name].append(space)
        return {name: spaces for name, spaces in seen.items() if len(spaces) > 1}


@dataclass(frozen=True)
class Configuration:
    """A set of items: the state of the transition system."""

    passed: frozenset = frozenset()
    stored: frozenset = frozenset()

    @classmethod
    def of(cls, items):
        items = list(items)
        return cls(frozenset(i for i in items if i.is_passed), frozenset(i for i in items if not i.is_passed))

    @property
    def items(self):
        return self.passed | self.stored

    def __iter__(self):
        return iter(self.sorted_items())

    def __len__(self):
        return len(self.passed) + len(self.stored)

    def __contains__(self, item):
        if item.is_passed:
            return item in self.passed
        return item in self.stored

    def __str__(self):
        return "{" + ", ".join(str(i) for i in self.sorted_items()) + "}"

    def sorted_items(self):
        return sort_items(self.items)

    def key(self):
        """Canonical, representation-independent identity of the configuration."""
        return tuple(str(i) for i in self.sorted_items())

    def minus(self, items):
        items = frozenset(items)
        return Configuration(self.passed - items, self.stored - items)

    def plus(self, items):
        return Configuration.of(list(self.items) + list(items))

    def intersection(self, items):
        items = frozenset(items)
        return Configuration(self.passed & items, self.stored & items)

    @cached_property
    def stored_by_location(self):
        return {s.location: s for s in self.stored}

    def stored_at(self, location):
        return self.stored_by_location.get(location)

    def in_hite(self):
        return in_hite(self.items)

    def is_valid(self):
        """All passed items are directed to nodes present in the configuration."""
        return destinations_of(self.passed) <= locations_of(self.stored)


@dataclass(frozen=True)
class ActionDef:
    """An atomic action ``<{p, s}, CI>`` executed on the node of its input stored item."""

    id: str
    input_passed: PassedItem
    input_stored: StoredItem
    out_stored: tuple = ()
    out_passed: tuple = ()

    def __str__(self):
        outputs = ", ".join(str(i) for i in self.outputs)
        return f"{self.id} = <{{{self.input_passed}, {self.input_stored}}}, {{{outputs}}}>"

    @property
    def node(self):
        return self.input_stored.location

    @property
    def inputs(self):
        return (self.input_passed, self.input_stored)

    @property
    def outputs(self):
        return tuple(self.out_stored) + tuple(self.out_passed)

    @property
    def continuation_stored(self):
        for item in self.out_stored:
            if item.location == self.input_stored.location:
                return item
        return None

    @property
    def continuation_passed(self):
        for item in self.out_passed:
            if item.tag == self.input_passed.tag:
                return item
        return None

    @property
    def fresh_passed(self):
        return tuple(i for i in self.out_passed if i.is_fresh)

    @property
    def fresh_stored(self):
        return tuple(i for i in self.out_stored if i.is_fresh)

    @property
    def creates_fresh(self):
        return bool(self.fresh_passed or self.fresh_stored)


@dataclass(frozen=True)
class SystemSpec:
    symbols: SymbolTable
    actions: tuple
    initial: Configuration
    fresh_pool: FreshPool = field(default_factory=FreshPool)
    name: str = "system"

    @cached_property
    def actions_by_input(self):
        index = collections.defaultdict(list)
        for action in self.actions:
            index[action.inputs].append(action)
        return dict(index)

    @cached_property
    def actions_by_id(self):
        index = {}
        for action in self.actions:
            index.setdefault(action.id, action)
        return index

    def action(self, action_id):
        try:
            return self.actions_by_id[action_id]
        except KeyError:
            raise ResolutionError(f"unknown action {action_id!r}") from None

    @cached_property
    def passed_items(self):
        """The extensional passed item universe (fresh placeholders excluded)."""
        items = set(self.initial.passed)
        for action in self.actions:
            items.add(action.input_passed)
            items.update(i for i in action.out_passed if not i.is_fresh)
        return frozenset(items)

    @cached_property
    def stored_items(self):
        items = set(self.initial.stored)
        for action in self.actions:
            items.add(action.input_stored)
            items.update(i for i in action.out_stored if not i.is_fresh)
        return frozenset(items)

    @property
    def universe(self):
        return self.passed_items | self.stored_items

    def stored_at_location(self, location):
        """STO_l over the extensional universe."""
        return frozenset(s for s in self.stored_items if s.location == location)


def item_class(spec, key, stored=False):
    """
    Return PAS_t when ``key`` is a tag, PAS_l (or STO_l with ``stored=True``)
    when ``key`` is a label. Classes range over the items the system mentions.
    """
    if spec.symbols.is_tag(key):
        if stored:
            raise ResolutionError(f"{key!r} is a tag, stored items are classified by location")
        return frozenset(p for p in spec.passed_items if p.tag == key)
    if spec.symbols.is_label(key):
        if stored:
            return spec.stored_at_location(key)
        return frozenset(p for p in spec.passed_items if p.destination == key)
    raise ResolutionError(f"unknown label or tag {key!r}")


def _check_symbols(symbols):
    diagnostics = []
    for name, spaces in sorted(symbols.overlaps().items()):
        diagnostics.append(Diagnostic(None, "symbols", f"identifier {name!r} declared as {' and '.join(spaces)}"))
    for space, names in symbols.namespaces().items():
        for name in names:
            if not name:
                diagnostics.append(Diagnostic(None, "symbols", f"empty {space} identifier"))
            elif name.startswith("@") or POOL_NAME_RE.match(name):
                diagnostics.append(Diagnostic(None, "symbols", f"{space} {name!r} uses a reserved name"))
            elif "." in name:
                diagnostics.append(Diagnostic(None, "symbols", f"{space} {name!r} contains a dot"))
    return diagnostics


def _unresolved_passed(symbols, item, allow_fresh=False):
    problems = []
    if not (symbols.is_tag(item.tag) or (allow_fresh and item.tag == FRESH)):
        problems.append(f"unknown tag {item.tag!r}")
    if not symbols.is_label(item.destination):
        problems.append(f"unknown label {item.destination!r}")
    if not symbols.is_service(item.service):
        problems.append(f"unknown service {item.service!r}")
    return problems


def _unresolved_stored(symbols, item, allow_fresh=False):
    problems = []
    if not (symbols.is_label(item.location) or (allow_fresh and item.location == FRESH)):
        problems.append(f"unknown label {item.location!r}")
    if not symbols.is_resource(item.resource):
        problems.append(f"unknown resource {item.resource!r}")
    return problems


def _check_action(symbols, action, nodes):
    diagnostics = []

    def report(clause, message):
        diagnostics.append(Diagnostic(action.id, clause, message))

    p, s = action.input_passed, action.input_stored
    problems = _unresolved_passed(symbols, p) + _unresolved_stored(symbols, s)
    for item in action.out_passed:
        problems += _unresolved_passed(symbols, item, allow_fresh=True)
    for item in action.out_stored:
        problems += _unresolved_stored(symbols, item, allow_fresh=True)
    for problem in problems:
        report("a", problem)

    if p.destination != s.location:
        report("b", f"destination {p.destination!r} of {p} differs from location {s.location!r} of {s}")

    continuations = [i for i in action.out_stored if i.location == s.location]
    if not action.out_stored:
        report("c", "no output stored item")
    elif len(continuations) != 1:
        report("c", f"{len(continuations)} output stored items on location {s.location!r}, expected exactly one")

    if len([i for i in action.out_passed if i.tag == p.tag]) > 1:
        report("hite", f"more than one continuation passed item with tag {p.tag!r}")

    for item in action.out_passed:
        if item.tag not in (p.tag, FRESH):
            report("d", f"output {item} carries tag {item.tag!r}, new tags must be fresh")
    for item in action.out_stored:
        if item.location not in (s.location, FRESH):
            report("e", f"output {item} is located on {item.location!r}, new labels must be fresh")

    # Declared nodes never appear after the start, only pool labels do.
    for item in action.out_passed:
        label = item.destination
        if symbols.is_label(label) and label not in nodes and not is_pool_name(label, FRESH_LABEL_PREFIX):
            report("node", f"output {item} is directed to {label!r}, which has no node in the initial configuration")

    concrete = [i for i in action.outputs if not i.is_fresh]
    if not in_hite(concrete):
        report("hite", "output items hold two passed items with one tag or two stored items with one location")
    return diagnostics


def validate_system(spec):
    """
    Check every action, the function property of ACT and the initial configuration.

    Returns a list of ``Diagnostic``; the list is empty iff the system is valid.
    """
    symbols = spec.symbols
    diagnostics = _check_symbols(symbols)

    nodes = locations_of(spec.initial.stored)
    seen_ids = set()
    for action in spec.actions:
        if action.id in seen_ids:
            diagnostics.append(Diagnostic(action.id, "a", f"action id {action.id!r} is used twice"))
        seen_ids.add(action.id)
        diagnostics.extend(_check_action(symbols, action, nodes))

    for (p, s), actions in spec.actions_by_input.items():
        first = actions[0]
        for duplicate in actions[1:]:
            diagnostics.append(
                Diagnostic(duplicate.id, "function", f"input pair {{{p}, {s}}} is already handled by {first.id}")
            )

    for item in spec.initial.sorted_items():
        if item.is_fresh:
            diagnostics.append(Diagnostic(None, "init", f"initial item {item} is a fresh placeholder"))
            continue
        problems = _unresolved_passed(symbols, item) if item.is_passed else _unresolved_stored(symbols, item)
        for problem in problems:
            diagnostics.append(Diagnostic(None, "a", f"initial item {item}: {problem}"))
    if not spec.initial.in_hite():
        diagnostics.append(
            Diagnostic(None, "init-hite", "initial configuration holds two items with one tag or one location")
        )
    if not spec.initial.is_valid():
        missing = sorted(destinations_of(spec.initial.passed) - locations_of(spec.initial.stored))
        diagnostics.append(
            Diagnostic(None, "init-valid", f"passed items directed to nodes without a stored item: {', '.join(missing)}")
        )

    if diagnostics:
        logger.info("system %s has %d violations", spec.name, len(diagnostics))
    else:
        logger.info("system %s is valid", spec.name)
    system_validated.send(sender=None, spec=spec, report=diagnostics)
    return diagnostics


def format_diagnostic(diagnostic):
    where = diagnostic.action_id if diagnostic.action_id is not None else "system"
    return f"{where}: ({diagnostic.clause}) {diagnostic.message}"
