import logging

from django import apps

logger = logging.getLogger("django_imds.engine")


class ImdsConfig(apps.AppConfig):
    """
    The configuration for Django IMDS. When ``IMDS_LOG_TRANSITIONS`` is set we
    log every transition made by a run.
    """

    name = "django_imds"
    verbose_name = "Django IMDS"

    def log_transition(self, sender, transition, **kwargs):
        logger.info(
            "step %d: %s -> %s",
            transition.step_index,
            ", ".join(transition.action_ids),
            transition.target,
        )

    def ready(self):
        from django.conf import settings

        from .signals import transition_fired

        if getattr(settings, "IMDS_LOG_TRANSITIONS", False):
            transition_fired.connect(self.log_transition, dispatch_uid="django_imds.log_transition")
