import json
from pathlib import Path

from django_imds.engine import POLICIES, POLICY_ALIASES, run
from django_imds.management.base import ModelCommand
from django_imds.petri import colored_run
from django_imds.serialization import dump_colored_trace, transition_record


class Command(ModelCommand):
    help = """Run a model under a concurrency policy and print its trace."""

    def add_command_arguments(self, parser):
        parser.add_argument(
            "--policy",
            choices=sorted(set(POLICIES) | set(POLICY_ALIASES)),
            default="interleaving",
            help="Which prepared actions fire together in one step.",
        )
        parser.add_argument("--k", type=int, default=None, help="Number of nodes per step for the intermediate policy.")
        parser.add_argument(
            "--colored",
            default=None,
            help="Also write the colored token trace of the run to this file, for imds_extract.",
        )

    def run(self, model, colored, **options):
        spec = self.load_spec(model)
        policy = self.config.policy_for_run()
        trace = run(spec, policy, self.config.max_steps)

        if colored:
            Path(colored).write_text(dump_colored_trace(colored_run(spec, trace)), encoding="utf-8")

        if self.config.format == "json":
            return "".join(json.dumps(transition_record(t), ensure_ascii=False) + "\n" for t in trace)
        lines = [f"{t.step_index}: {', '.join(t.action_ids)} -> {t.target}" for t in trace]
        final = trace[-1].target if trace else spec.initial
        lines.append(f"{len(trace)} steps, final configuration {final}")
        return "\n".join(lines) + "\n"
