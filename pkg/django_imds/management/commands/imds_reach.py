import json

from django_imds.engine import reach
from django_imds.management.base import ModelCommand
from django_imds.petri import export_dot
from django_imds.serialization import graph_record


class Command(ModelCommand):
    help = """Build the reachability graph of a model, one action per edge."""

    formats = ("text", "json", "dot")

    def run(self, model, **options):
        spec = self.load_spec(model)
        graph = reach(spec, self.config.max_states)

        if self.config.format == "json":
            return json.dumps(graph_record(graph), indent=2, ensure_ascii=False) + "\n"
        if self.config.format == "dot":
            return export_dot(graph, name=spec.name)
        return graph.summary() + "\n"
