from django_imds.decomposition import RESIDENT, TRAVELER
from django_imds.engine import reach
from django_imds.management.base import ModelCommand
from django_imds.petri import export_dot, to_petri


class Command(ModelCommand):
    help = """Export the Petri net or the reachability graph of a model as Graphviz DOT."""

    formats = ("dot",)

    def add_command_arguments(self, parser):
        parser.add_argument("--what", choices=["net", "reach"], default="net")
        parser.add_argument(
            "--color-by",
            choices=[TRAVELER, RESIDENT],
            default=None,
            dest="color_by",
            help="Color the places of the net by traveler (tag) or resident (label) process.",
        )

    def run(self, model, what, color_by, **options):
        spec = self.load_spec(model)
        if what == "reach":
            return export_dot(reach(spec, self.config.max_states), name=spec.name)
        return export_dot(to_petri(spec), color_by=color_by)
