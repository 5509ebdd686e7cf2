"""Quotas, component projections, decompositions and communication forms."""

import collections
import logging
from dataclasses import dataclass, field

from django_imds.exceptions import NotComposableError
from django_imds.system import Configuration, sort_items

SYNCHRONOUS = "synchronous"
PASSING = "passing"
SHARING = "sharing"
INTERNAL = "internal"
EXTERNAL = "external"

TRAVELER = "traveler"
RESIDENT = "resident"
CUSTOM = "custom"

logger = logging.getLogger("django_imds.decomposition")

ActionShare = collections.namedtuple("ActionShare", "quota,inputs,outputs,participant")

CommEvent = collections.namedtuple("CommEvent", "action_id,form,item,from_quota,to_quota,scope")

DecompositionCheck = collections.namedtuple("DecompositionCheck", "ok,diagnostics")


@dataclass(frozen=True)
class Quota:
    """
    The items owned by one component. Besides the extensional ``passed`` and
    ``stored`` sets a quota may own items by pattern, which is how canonical
    processes absorb items instantiated from fresh placeholders.
    """

    name: str
    passed: frozenset = frozenset()
    stored: frozenset = frozenset()
    passed_tags: frozenset = frozenset()
    passed_labels: frozenset = frozenset()
    stored_labels: frozenset = frozenset()
    all_stored: bool = False

    def __contains__(self, item):
        if item.is_passed:
            return item in self.passed or item.tag in self.passed_tags or item.destination in self.passed_labels
        return self.all_stored or item in self.stored or item.location in self.stored_labels

    def passed_in(self, spec):
        """QP restricted to the passed items the system mentions."""
        return frozenset(p for p in spec.passed_items if p in self)

    def stored_in(self, spec):
        return frozenset(s for s in spec.stored_items if s in self)


def traveler_quota(tag, spec=None):
    passed = frozenset(p for p in spec.passed_items if p.tag == tag) if spec is not None else frozenset()
    stored = spec.stored_items if spec is not None else frozenset()
    return Quota(f"TR_{tag}", passed, stored, passed_tags=frozenset([tag]), all_stored=True)


def resident_quota(label, spec=None):
    passed = frozenset(p for p in spec.passed_items if p.destination == label) if spec is not None else frozenset()
    stored = spec.stored_at_location(label) if spec is not None else frozenset()
    return Quota(
        f"RE_{label}", passed, stored, passed_labels=frozenset([label]), stored_labels=frozenset([label])
    )


@dataclass(frozen=True)
class Decomposition:
    quotas: tuple
    mode: str = CUSTOM
    spec: object = field(default=None, compare=False, repr=False)

    def __iter__(self):
        return iter(self.quotas)

    def __len__(self):
        return len(self.quotas)

    @property
    def names(self):
        return [q.name for q in self.quotas]

    def quota(self, name):
        for quota in self.quotas:
            if quota.name == name:
                return quota
        raise KeyError(name)

    def holders(self, item):
        """
        The quotas containing ``item``. Canonical decompositions start the
        process of a tag or label they have not seen yet.
        """
        found = [q for q in self.quotas if item in q]
        if found or item.is_fresh:
            return found
        if self.mode == TRAVELER and item.is_passed:
            return [traveler_quota(item.tag, self.spec)]
        if self.mode == RESIDENT:
            return [resident_quota(item.destination if item.is_passed else item.location, self.spec)]
        return []


def project_config(configuration, quota):
    """The component configuration ``γ ∩ Q``."""
    return Configuration(
        frozenset(p for p in configuration.passed if p in quota),
        frozenset(s for s in configuration.stored if s in quota),
    )


def project_action(action, quota):
    """The component action share ``<{p, s} ∩ Q, CI ∩ Q>``."""
    inputs = frozenset(i for i in action.inputs if i in quota)
    outputs = frozenset(i for i in action.outputs if i in quota)
    return ActionShare(quota.name, inputs, outputs, bool(inputs or outputs))


def _involved_quotas(action, decomposition):
    quotas = {q.name: q for q in decomposition.quotas}
    for item in tuple(action.inputs) + tuple(action.outputs):
        for quota in decomposition.holders(item):
            quotas.setdefault(quota.name, quota)
    return list(quotas.values())


def multi_handshake(action, decomposition):
    """The participant shares of ``action`` in ``decomposition``."""
    shares = (project_action(action, q) for q in _involved_quotas(action, decomposition))
    return [share for share in shares if share.participant]


def composable(q1, q2):
    """Components are composable when their passed item quotas are disjoint."""
    if q1.passed & q2.passed:
        return False
    if q1.passed_tags & q2.passed_tags or q1.passed_labels & q2.passed_labels:
        return False
    if (q1.passed_tags and q2.passed_labels) or (q1.passed_labels and q2.passed_tags):
        return False
    for a, b in ((q1, q2), (q2, q1)):
        if any(p.tag in b.passed_tags or p.destination in b.passed_labels for p in a.passed):
            return False
    return True


def merge(q1, q2):
    if not composable(q1, q2):
        raise NotComposableError(f"quotas {q1.name} and {q2.name} share passed items")
    return Quota(
        f"{q1.name}+{q2.name}",
        q1.passed | q2.passed,
        q1.stored | q2.stored,
        q1.passed_tags | q2.passed_tags,
        q1.passed_labels | q2.passed_labels,
        q1.stored_labels | q2.stored_labels,
        q1.all_stored or q2.all_stored,
    )


def _uncovered_messages(uncovered, universe, prefix, key):
    messages = []
    by_label = collections.defaultdict(set)
    for item in universe:
        by_label[key(item)].add(item)
    for label in sorted(by_label):
        missing = by_label[label] & uncovered
        if not missing:
            continue
        if missing == by_label[label]:
            messages.append(f"{prefix}_{label} uncovered")
        else:
            messages.extend(f"{item} uncovered" for item in sort_items(missing))
    return messages


def is_decomposition(decomposition, spec):
    """
    Check that the passed item quotas partition the passed items of the system
    and that the stored item quotas cover its stored items.
    """
    diagnostics = []
    uncovered_passed = set()
    for item in sort_items(spec.passed_items):
        owners = [q.name for q in decomposition.quotas if item in q]
        if not owners:
            uncovered_passed.add(item)
        elif len(owners) > 1:
            diagnostics.append(f"{item} is in several passed quotas: {', '.join(owners)}")
    uncovered_stored = {s for s in spec.stored_items if not any(s in q for q in decomposition.quotas)}

    diagnostics += _uncovered_messages(uncovered_passed, spec.passed_items, "PAS", lambda p: p.destination)
    diagnostics += _uncovered_messages(uncovered_stored, spec.stored_items, "STO", lambda s: s.location)

    for quota in decomposition.quotas:
        for item in sort_items((quota.passed | quota.stored) - spec.universe):
            logger.warning("quota %s holds %s which the system never mentions", quota.name, item)

    return DecompositionCheck(not diagnostics, diagnostics)


def _action_id(action):
    return getattr(action, "action_id", None) or action.id


def uncovered_items(action, decomposition):
    """Output items of ``action`` that no quota of ``decomposition`` takes over."""
    return [i for i in sort_items(action.outputs) if not i.is_fresh and not decomposition.holders(i)]


def classify(action, decomposition):
    """
    The communication events of one action (or fired action) in the
    multi-handshake of ``decomposition``.

    A quota delivers the input passed item when it holds it. It delivers the
    input stored item when it holds it and either holds the passed item as
    well or no holder of the stored item holds the passed item.
    """
    action_id = _action_id(action)
    p, s = action.inputs
    holders_p = decomposition.holders(p)
    holders_s = decomposition.holders(s)
    events = []

    for q1 in holders_p:
        if s in q1:
            continue
        for q2 in holders_s:
            if p not in q2:
                events.append(CommEvent(action_id, SYNCHRONOUS, None, q1.name, q2.name, EXTERNAL))

    deliverers = list(holders_p)
    if not any(p in q for q in holders_s):
        deliverers += [q for q in holders_s if q.name not in {d.name for d in deliverers}]

    for item in uncovered_items(action, decomposition):
        logger.warning("no quota of the decomposition takes over %s produced by %s", item, action_id)

    for q1 in deliverers:
        for item in sort_items(action.outputs):
            form = PASSING if item.is_passed else SHARING
            for q2 in decomposition.holders(item):
                scope = INTERNAL if q1.name == q2.name else EXTERNAL
                events.append(CommEvent(action_id, form, item, q1.name, q2.name, scope))
    return events


def summarize(events):
    """Count events by ``(scope, form)``."""
    return collections.Counter((e.scope, e.form) for e in events)
