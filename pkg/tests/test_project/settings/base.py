# Django settings for test_project project.
from hypothesis import settings as hypothesis_settings

DEBUG = True

ADMINS = (
    # ('Your Name', 'your_email@example.com'),
)

TEST_RUNNER = "django.test.runner.DiscoverRunner"

MANAGERS = ADMINS

# Nothing in django_imds touches the database, the test runner still wants one.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    },
}

DEFAULT_AUTO_FIELD = "django.db.models.AutoField"

ALLOWED_HOSTS = []

TIME_ZONE = "America/Chicago"

LANGUAGE_CODE = "en-us"

USE_I18N = True

USE_TZ = True

# Make this unique, and don't share it with anybody.
SECRET_KEY = "z)9k+gxz%8pyppdd6%76t(z+c2wg=*%@nn#r((-#iv+cjj8=l="

INSTALLED_APPS = (
    "django.contrib.contenttypes",
    "django_imds",
    "test_project.modeltest",
    "test_project.enginetest",
    "test_project.decompositiontest",
    "test_project.petritest",
    "test_project.analysistest",
    "test_project.commandtest",
)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {"class": "logging.StreamHandler"},
    },
    "loggers": {
        "django_imds": {"level": "INFO", "handlers": ["console"]},
    },
}

IMDS_DEFAULT_SEED = 0
IMDS_MAX_STEPS = 1000
IMDS_MAX_STATES = 10000
IMDS_ORACLE_LIMIT = 200000
IMDS_LOG_TRANSITIONS = False

# Random systems and quotas are generated with a fixed seed so failures reproduce.
hypothesis_settings.register_profile("imds", max_examples=200, derandomize=True, deadline=None)
hypothesis_settings.load_profile("imds")
