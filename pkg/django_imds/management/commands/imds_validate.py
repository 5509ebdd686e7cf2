import json

from django_imds.management.base import ModelCommand
from django_imds.serialization import read_system
from django_imds.system import format_diagnostic, validate_system


class Command(ModelCommand):
    help = """Check a model against the action, function and initial configuration rules."""

    def run(self, model, **options):
        spec = self.config.apply_pool(read_system(model))
        diagnostics = validate_system(spec)
        if diagnostics:
            self.failure = f"{model}: the model has {len(diagnostics)} violation(s)"

        if self.config.format == "json":
            report = {
                "system": spec.name,
                "valid": not diagnostics,
                "diagnostics": [
                    {"action": d.action_id, "clause": d.clause, "message": d.message} for d in diagnostics
                ],
            }
            return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
        if not diagnostics:
            return f"{spec.name}: valid\n"
        return "".join(format_diagnostic(d) + "\n" for d in diagnostics)
