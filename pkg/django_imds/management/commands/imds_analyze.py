import json

from django_imds.analysis import analyze
from django_imds.engine import reach
from django_imds.exceptions import FreshPoolExhausted
from django_imds.management.base import BOUND_EXCEEDED, ModelCommand
from django_imds.petri import check_safe


def _tags(tags):
    return ", ".join(sorted(tags)) or "-"


def _safety_record(safety):
    return {
        "safe": safety.safe,
        "max_live_tags": safety.max_live_tags,
        "max_live_locations": safety.max_live_locations,
        "growth": safety.growth,
        "unsafe_places": safety.unsafe_places,
    }


def _safety_line(safety):
    return (
        f"safe: {'yes' if safety.safe else 'no'}, max live tags {safety.max_live_tags}, "
        f"max live locations {safety.max_live_locations}, growth {'yes' if safety.growth else 'no'}"
    )


class Command(ModelCommand):
    help = """Report termination, deadlock, partial deadlock and safety of a model."""

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--fail-on-deadlock",
            action="store_true",
            dest="fail_on_deadlock",
            default=False,
            help="Exit with status 1 when a deadlock or a partial deadlock is found.",
        )

    def run(self, model, fail_on_deadlock, **options):
        spec = self.load_spec(model)
        safety = check_safe(spec, self.config.max_states)
        try:
            graph = reach(spec, self.config.max_states)
        except FreshPoolExhausted as exc:
            # progress needs the whole graph
            self.failure = str(exc)
            self.failure_code = BOUND_EXCEEDED
            return self.report_growth(exc, safety)

        analysis = analyze(graph, spec)
        index = graph.state_index

        if fail_on_deadlock and analysis.has_deadlock:
            self.failure = f"{model}: deadlock found"

        if self.config.format == "json":
            report = {
                "terminal": [
                    {"state": index[v.state], "kind": v.kind, "stuck_tags": sorted(v.stuck_tags)}
                    for v in analysis.terminal
                ],
                "tags": [
                    {
                        "tag": p.tag,
                        "status": p.status,
                        "deadlocked_from": [index[state] for state in p.deadlocked_from],
                    }
                    for p in analysis.progress.values()
                ],
                "partial_deadlocks": [
                    {"state": index[v.state], "stuck_tags": sorted(v.stuck_tags), "live_tags": sorted(v.live_tags)}
                    for v in analysis.partial_deadlocks
                ],
                "safety": _safety_record(safety),
            }
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"

        lines = []
        for verdict in analysis.terminal:
            line = f"terminal s{index[verdict.state]} {verdict.state}: {verdict.kind}"
            if verdict.stuck_tags:
                line += f" (stuck {_tags(verdict.stuck_tags)})"
            lines.append(line)
        for progress in analysis.progress.values():
            line = f"tag {progress.tag}: {progress.status}"
            if progress.deadlocked_from:
                line += " from " + ", ".join(f"s{index[state]}" for state in progress.deadlocked_from)
            lines.append(line)
        for verdict in analysis.partial_deadlocks:
            lines.append(
                f"partial deadlock at s{index[verdict.state]} {verdict.state}: "
                f"stuck {_tags(verdict.stuck_tags)}, live {_tags(verdict.live_tags)}"
            )
        lines.append(_safety_line(safety))
        return "\n".join(lines) + "\n"

    def report_growth(self, exc, safety):
        states = len(exc.graph.states)
        if self.config.format == "json":
            report = {"exhausted": str(exc), "states": states, "safety": _safety_record(safety)}
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
        return f"fresh pool exhausted after {states} states, progress not analysed\n{_safety_line(safety)}\n"
