import json

from django_imds.decomposition import EXTERNAL, INTERNAL, PASSING, SHARING, SYNCHRONOUS, classify, summarize
from django_imds.engine import reach
from django_imds.management.base import ModelCommand


class Command(ModelCommand):
    help = """Classify the communication of every reachable firing under a decomposition."""

    def add_command_arguments(self, parser):
        self.add_decomposition_arguments(parser)

    def run(self, model, mode, decomposition, **options):
        spec = self.load_spec(model)
        quotas = self.decomposition_for(spec, mode, decomposition)
        graph = reach(spec, self.config.max_states)
        index = graph.state_index

        events = []
        for edge in graph.edges:
            events.extend((index[edge.source], event) for event in classify(edge.fired[0], quotas))
        totals = summarize(event for _source, event in events)

        if self.config.format == "json":
            report = {
                "mode": quotas.mode,
                "events": [
                    {
                        "source": source,
                        "action": e.action_id,
                        "form": e.form,
                        "item": str(e.item) if e.item is not None else None,
                        "from": e.from_quota,
                        "to": e.to_quota,
                        "scope": e.scope,
                    }
                    for source, e in events
                ],
                "totals": {
                    f"{scope} {form}": totals[(scope, form)]
                    for scope in (EXTERNAL, INTERNAL)
                    for form in (SYNCHRONOUS, PASSING, SHARING)
                },
            }
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"

        lines = [
            f"{scope} {form}: {totals[(scope, form)]}"
            for scope in (EXTERNAL, INTERNAL)
            for form in (SYNCHRONOUS, PASSING, SHARING)
        ]
        return "\n".join(lines) + "\n"
