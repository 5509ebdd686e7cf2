import json

from django_imds.canonical import is_async_process, is_sequential
from django_imds.decomposition import is_decomposition
from django_imds.management.base import ModelCommand
from django_imds.serialization import dump_decomposition
from django_imds.system import sort_items


def _items(items):
    return "{" + ", ".join(str(i) for i in sort_items(items)) + "}"


class Command(ModelCommand):
    help = """Build the traveler or resident decomposition of a model, or check a custom one."""

    def add_command_arguments(self, parser):
        self.add_decomposition_arguments(parser)

    def run(self, model, mode, decomposition, **options):
        spec = self.load_spec(model)
        quotas = self.decomposition_for(spec, mode, decomposition)
        check = is_decomposition(quotas, spec)
        if not check.ok:
            self.failure = f"{model}: not a decomposition ({len(check.diagnostics)} problem(s))"

        processes = []
        for quota in quotas:
            sequential = is_sequential(quota.passed_in(spec), spec)
            processes.append(
                {
                    "name": quota.name,
                    "asynchronous": is_async_process(quota, spec),
                    "sequential": sequential.ok,
                    "tag": sequential.tag,
                    "label": sequential.label,
                }
            )

        if self.config.format == "json":
            report = {
                "mode": quotas.mode,
                "valid": check.ok,
                "diagnostics": check.diagnostics,
                "quotas": dump_decomposition(quotas),
                "processes": processes,
            }
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"

        lines = []
        for quota, process in zip(quotas, processes):
            traits = ["asynchronous" if process["asynchronous"] else "not asynchronous"]
            if process["tag"]:
                traits.append(f"sequential (tag {process['tag']})")
            elif process["label"]:
                traits.append(f"sequential (label {process['label']})")
            else:
                traits.append("sequential" if process["sequential"] else "not sequential")
            lines.append(
                f"{quota.name}: passed {_items(quota.passed_in(spec))} stored {_items(quota.stored_in(spec))}; "
                + ", ".join(traits)
            )
        lines.extend(check.diagnostics)
        lines.append("decomposition: valid" if check.ok else "decomposition: invalid")
        return "\n".join(lines) + "\n"
