"""
Reading and writing models, decompositions and traces.

Models and decompositions are JSON documents; run traces and colored traces
are JSON lines with a fixed key order so that outputs can be diffed.
"""

import json
from pathlib import Path

from django_imds.decomposition import Decomposition, Quota
from django_imds.exceptions import ModelParseError
from django_imds.petri import Color, ColoredStep, ColoredTrace
from django_imds.system import (
    ActionDef,
    Configuration,
    FreshPool,
    PassedItem,
    StoredItem,
    SymbolTable,
    SystemSpec,
    sort_items,
)

NAMESPACES = ("labels", "services", "resources", "tags")


def _parse_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, exc.lineno, exc.colno) from exc


def _strings(value, where, length=None):
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ModelParseError(f"{where}: expected a list of strings")
    if length is not None and len(value) != length:
        raise ModelParseError(f"{where}: expected {length} names, got {len(value)}")
    return value


def _mapping(value, where):
    if not isinstance(value, dict):
        raise ModelParseError(f"{where}: expected an object")
    return value


def _passed(value, where):
    return PassedItem(*_strings(value, where, 3))


def _stored(value, where):
    return StoredItem(*_strings(value, where, 2))


def _items(value, where, parse):
    if not isinstance(value, list):
        raise ModelParseError(f"{where}: expected a list")
    return [parse(v, f"{where}[{n}]") for n, v in enumerate(value)]


def _count(value, where):
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ModelParseError(f"{where}: expected a non-negative integer")
    return value


def _action(value, where):
    value = _mapping(value, where)
    if not isinstance(value.get("id"), str) or not value["id"]:
        raise ModelParseError(f"{where}.id: expected a non-empty string")
    inputs = _mapping(value.get("in"), f"{where}.in")
    outputs = _mapping(value.get("out", {}), f"{where}.out")
    return ActionDef(
        id=value["id"],
        input_passed=_passed(inputs.get("passed"), f"{where}.in.passed"),
        input_stored=_stored(inputs.get("stored"), f"{where}.in.stored"),
        out_stored=tuple(_items(outputs.get("stored", []), f"{where}.out.stored", _stored)),
        out_passed=tuple(_items(outputs.get("passed", []), f"{where}.out.passed", _passed)),
    )


def load_system(text, name="system"):
    """Parse a model document into a ``SystemSpec``. Raises ``ModelParseError``."""
    data = _mapping(_parse_json(text), "model")
    symbols = SymbolTable.build(**{key: _strings(data.get(key, []), key) for key in NAMESPACES})
    init = _mapping(data.get("init", {}), "init")
    initial = Configuration.of(
        _items(init.get("stored", []), "init.stored", _stored) + _items(init.get("passed", []), "init.passed", _passed)
    )
    actions = data.get("actions", [])
    if not isinstance(actions, list):
        raise ModelParseError("actions: expected a list")
    actions = tuple(_action(v, f"actions[{n}]") for n, v in enumerate(actions))
    pool = _mapping(data.get("fresh_pool", {}), "fresh_pool")
    fresh_pool = FreshPool(
        _count(pool.get("tags", 0), "fresh_pool.tags"), _count(pool.get("labels", 0), "fresh_pool.labels")
    )
    return SystemSpec(symbols, actions, initial, fresh_pool, name)


def read_system(path):
    path = Path(path)
    return load_system(path.read_text(encoding="utf-8"), path.stem)


def dump_system(spec):
    """The model document of ``spec``; ``load_system`` of its JSON gives back an equal spec."""
    return {
        "labels": list(spec.symbols.labels),
        "services": list(spec.symbols.services),
        "resources": list(spec.symbols.resources),
        "tags": list(spec.symbols.tags),
        "init": {
            "stored": [list(s) for s in sort_items(spec.initial.stored)],
            "passed": [list(p) for p in sort_items(spec.initial.passed)],
        },
        "actions": [
            {
                "id": action.id,
                "in": {"passed": list(action.input_passed), "stored": list(action.input_stored)},
                "out": {
                    "stored": [list(s) for s in action.out_stored],
                    "passed": [list(p) for p in action.out_passed],
                },
            }
            for action in spec.actions
        ],
        "fresh_pool": {"tags": spec.fresh_pool.tags, "labels": spec.fresh_pool.labels},
    }


def parse_item(text, where="item"):
    """``t.l.se`` is a passed item and ``l.re`` a stored item."""
    parts = text.split(".") if isinstance(text, str) else []
    if len(parts) == 3 and all(parts):
        return PassedItem(*parts)
    if len(parts) == 2 and all(parts):
        return StoredItem(*parts)
    raise ModelParseError(f"{where}: {text!r} is neither tag.label.service nor label.resource")


def _quota(value, where, spec):
    value = _mapping(value, where)
    name = value.get("name")
    if not isinstance(name, str) or not name:
        raise ModelParseError(f"{where}.name: expected a non-empty string")
    fields = {}

    passed = value.get("passed", [])
    if isinstance(passed, dict):
        if set(passed) == {"tag"}:
            tag = passed["tag"]
            fields["passed"] = frozenset(p for p in spec.passed_items if p.tag == tag)
            fields["passed_tags"] = frozenset([tag])
        elif set(passed) == {"label"}:
            label = passed["label"]
            fields["passed"] = frozenset(p for p in spec.passed_items if p.destination == label)
            fields["passed_labels"] = frozenset([label])
        else:
            raise ModelParseError(f"{where}.passed: expected {{\"tag\": t}} or {{\"label\": l}}")
    else:
        fields["passed"] = frozenset(_items(passed, f"{where}.passed", _passed))

    stored = value.get("stored", [])
    if stored == "all":
        fields["stored"] = spec.stored_items
        fields["all_stored"] = True
    elif isinstance(stored, dict):
        if set(stored) != {"label"}:
            raise ModelParseError(f"{where}.stored: expected {{\"label\": l}} or \"all\"")
        fields["stored"] = spec.stored_at_location(stored["label"])
        fields["stored_labels"] = frozenset([stored["label"]])
    else:
        fields["stored"] = frozenset(_items(stored, f"{where}.stored", _stored))
    return Quota(name, **fields)


def load_decomposition(text, spec):
    data = _parse_json(text)
    if not isinstance(data, list):
        raise ModelParseError("decomposition: expected a list of quotas")
    quotas = tuple(_quota(v, f"quotas[{n}]", spec) for n, v in enumerate(data))
    return Decomposition(quotas, spec=spec)


def read_decomposition(path, spec):
    return load_decomposition(Path(path).read_text(encoding="utf-8"), spec)


def dump_decomposition(decomposition):
    records = []
    for quota in decomposition.quotas:
        if len(quota.passed_tags) == 1 and not quota.passed_labels:
            passed = {"tag": next(iter(quota.passed_tags))}
        elif len(quota.passed_labels) == 1 and not quota.passed_tags:
            passed = {"label": next(iter(quota.passed_labels))}
        else:
            passed = [list(p) for p in sort_items(quota.passed)]
        if quota.all_stored:
            stored = "all"
        elif len(quota.stored_labels) == 1:
            stored = {"label": next(iter(quota.stored_labels))}
        else:
            stored = [list(s) for s in sort_items(quota.stored)]
        records.append({"name": quota.name, "passed": passed, "stored": stored})
    return records


def transition_record(transition):
    return {
        "step": transition.step_index,
        "actions": list(transition.action_ids),
        "consumed": [str(i) for i in transition.consumed],
        "produced": [str(i) for i in transition.produced],
        "fresh": [[f.action_id, kind, name] for f in transition.fired for kind, name in f.fresh],
    }


def graph_record(graph):
    index = graph.state_index
    return {
        "states": [list(state.key()) for state in graph.states],
        "edges": [
            {"source": index[e.source], "target": index[e.target], "action": e.action_ids[0]}
            for e in graph.edges
        ],
        "terminal": [index[state] for state in graph.terminal_states],
        "truncated": graph.truncated,
    }


def _pairs(pairs):
    return [[str(item), str(color)] for item, color in pairs]


def dump_colored_trace(trace):
    """JSON lines: the initial coloring, then one record per firing."""
    lines = [json.dumps({"initial": _pairs(trace.initial)}, ensure_ascii=False)]
    for step in trace.steps:
        record = {
            "step": step.step,
            "action": step.action_id,
            "consumed": _pairs(step.consumed),
            "produced": _pairs(step.produced),
            "released": [str(c) for c in step.released],
        }
        lines.append(json.dumps(record, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def _colored_pairs(value, where):
    if not isinstance(value, list):
        raise ModelParseError(f"{where}: expected a list of [item, color] pairs")
    pairs = []
    for n, pair in enumerate(value):
        item, color = _strings(pair, f"{where}[{n}]", 2)
        pairs.append((parse_item(item, f"{where}[{n}]"), Color(color)))
    return tuple(pairs)


def load_colored_trace(text):
    trace = ColoredTrace()
    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise ModelParseError("colored trace is empty")
    for position, (number, line) in enumerate(lines):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ModelParseError(exc.msg, number, exc.colno) from exc
        if not isinstance(record, dict):
            raise ModelParseError("expected an object", number, 1)
        if position == 0:
            if "initial" not in record:
                raise ModelParseError("the first record must hold the initial coloring", number, 1)
            trace.initial = _colored_pairs(record["initial"], "initial")
            continue
        try:
            step = ColoredStep(
                step=_count(record["step"], "step"),
                action_id=record["action"],
                consumed=_colored_pairs(record["consumed"], "consumed"),
                produced=_colored_pairs(record["produced"], "produced"),
                released=tuple(Color(c) for c in _strings(record["released"], "released")),
            )
        except KeyError as exc:
            raise ModelParseError(f"missing field {exc.args[0]!r}", number, 1) from None
        except ModelParseError as exc:
            raise ModelParseError(exc.args[0], number, 1) from None
        trace.steps.append(step)
    return trace


def read_colored_trace(path):
    return load_colored_trace(Path(path).read_text(encoding="utf-8"))
