import json

from django_imds.management.base import ModelCommand
from django_imds.petri import DYNAMIC, TERMINATED, extract_processes
from django_imds.serialization import read_colored_trace


def _moment(event):
    kind, step = event
    if kind in (DYNAMIC, TERMINATED):
        return f"{kind} at step {step}"
    return kind


class Command(ModelCommand):
    help = """Extract traveler and resident processes from a colored trace written by imds_run --colored."""

    takes_model = False

    def add_command_arguments(self, parser):
        parser.add_argument("trace", help="Path of the colored trace (JSON lines).")

    def run(self, trace, **options):
        processes = extract_processes(read_colored_trace(trace))

        if self.config.format == "json":
            report = [
                {
                    "kind": p.kind,
                    "name": p.name,
                    "color": p.color,
                    "start": list(p.start),
                    "end": list(p.end),
                    "trace": [[entry.step, entry.action_id] for entry in p.trace],
                }
                for p in processes
            ]
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"

        lines = [
            f"{p.name} {p.color} {_moment(p.start)}, {_moment(p.end)}: {', '.join(p.action_ids) or '-'}"
            for p in processes
        ]
        return "\n".join(lines) + "\n"
