import dataclasses
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from django_imds.canonical import canonical_decomposition
from django_imds.decomposition import CUSTOM, RESIDENT, TRAVELER
from django_imds.engine import Policy
from django_imds.exceptions import BoundExceeded, ImdsError, ModelParseError
from django_imds.serialization import read_decomposition, read_system
from django_imds.system import FreshPool, format_diagnostic, validate_system

PARSE_ERROR = 2
BOUND_EXCEEDED = 3
FAILURE = 1

logger = logging.getLogger("django_imds.commands")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """The options of one command, command line first, then settings, then defaults."""

    policy: str = "interleaving"
    k: int = 1
    seed: int = 0
    max_steps: int = 1000
    max_states: int = 10000
    fresh_tags: int = None
    fresh_labels: int = None
    out: str = None
    format: str = "text"

    @classmethod
    def from_options(cls, options):
        def pick(name, setting, default):
            value = options.get(name)
            if value is None:
                value = getattr(settings, setting, default) if setting else default
            return value

        config = cls(
            policy=options.get("policy") or "interleaving",
            k=pick("k", None, 1),
            seed=pick("seed", "IMDS_DEFAULT_SEED", 0),
            max_steps=pick("max_steps", "IMDS_MAX_STEPS", 1000),
            max_states=pick("max_states", "IMDS_MAX_STATES", 10000),
            fresh_tags=options.get("fresh_tags"),
            fresh_labels=options.get("fresh_labels"),
            out=options.get("out"),
            format=options.get("format") or "text",
        )
        for name in ("k", "max_steps", "max_states"):
            if getattr(config, name) < 1:
                raise CommandError(f"--{name.replace('_', '-')} must be a positive integer")
        for name in ("fresh_tags", "fresh_labels"):
            value = getattr(config, name)
            if value is not None and value < 0:
                raise CommandError(f"--{name.replace('_', '-')} must not be negative")
        return config

    def policy_for_run(self):
        try:
            return Policy(self.policy, self.k, self.seed)
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

    def apply_pool(self, spec):
        """Override the fresh pool of ``spec`` with the bounds given on the command line."""
        if self.fresh_tags is None and self.fresh_labels is None:
            return spec
        pool = FreshPool(
            spec.fresh_pool.tags if self.fresh_tags is None else self.fresh_tags,
            spec.fresh_pool.labels if self.fresh_labels is None else self.fresh_labels,
        )
        return dataclasses.replace(spec, fresh_pool=pool)


class ModelCommand(BaseCommand):
    """
    Base class of the commands working on a model file. Subclasses implement
    ``run()`` returning the text to write to ``--out`` or stdout.
    """

    formats = ("text", "json")
    takes_model = True

    def add_arguments(self, parser):
        if self.takes_model:
            parser.add_argument("model", help="Path of the JSON model file.")
        parser.add_argument("--seed", type=int, default=None, help="Seed of the random selector.")
        parser.add_argument("--max-steps", type=int, default=None, dest="max_steps", help="Bound on run length.")
        parser.add_argument(
            "--max-states", type=int, default=None, dest="max_states", help="Bound on reachable states."
        )
        parser.add_argument("--fresh-tags", type=int, default=None, dest="fresh_tags", help="Size of the fresh tag pool.")
        parser.add_argument(
            "--fresh-labels", type=int, default=None, dest="fresh_labels", help="Size of the fresh label pool."
        )
        parser.add_argument("--out", default=None, help="Write the output to this file instead of stdout.")
        parser.add_argument("--format", choices=self.formats, default=self.formats[0])
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_spec(self, path, validate=True):
        spec = self.config.apply_pool(read_system(path))
        if validate:
            diagnostics = validate_system(spec)
            if diagnostics:
                for diagnostic in diagnostics:
                    self.stderr.write(format_diagnostic(diagnostic))
                raise CommandError(f"{path}: the model has {len(diagnostics)} violation(s)", returncode=FAILURE)
        return spec

    def run(self, **options):
        raise NotImplementedError

    def emit(self, text):
        if self.config.out:
            Path(self.config.out).write_text(text, encoding="utf-8")
            logger.info("wrote %s", self.config.out)
        else:
            self.stdout.write(text, ending="")

    def handle(self, *args, **options):
        self.config = RunConfig.from_options(options)
        self.failure = None
        self.failure_code = FAILURE
        try:
            text = self.run(**options)
        except ModelParseError as exc:
            raise CommandError(str(exc), returncode=PARSE_ERROR) from exc
        except OSError as exc:
            raise CommandError(str(exc), returncode=PARSE_ERROR) from exc
        except BoundExceeded as exc:
            raise CommandError(str(exc), returncode=BOUND_EXCEEDED) from exc
        except ImdsError as exc:
            raise CommandError(str(exc), returncode=FAILURE) from exc
        self.emit(text)
        if self.failure:
            raise CommandError(self.failure, returncode=self.failure_code)

    def decomposition_for(self, spec, mode, path=None):
        """The decomposition named by ``--mode`` or read from ``--decomposition``."""
        if path:
            return read_decomposition(path, spec)
        if mode == CUSTOM:
            raise CommandError("--mode custom needs --decomposition FILE")
        return canonical_decomposition(spec, mode)

    def add_decomposition_arguments(self, parser):
        parser.add_argument("--mode", choices=[TRAVELER, RESIDENT, CUSTOM], default=RESIDENT)
        parser.add_argument("--decomposition", default=None, help="JSON file of custom quotas.")
