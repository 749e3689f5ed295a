import os

import structlog

# add logging before the package is used
DEBUG = os.getenv("DEBUG", default=False)

_stamper = structlog.processors.TimeStamper(fmt="iso", utc=True, key="timestamp")


def timestamper(logger, log_method, event_dict):
    """
    Add timestamps to logs conditionally

    Batch runs are usually wrapped by a scheduler that stamps its own output, so
    we only timestamp when DEBUG is set.
    """
    if not DEBUG:
        return event_dict

    return _stamper(logger, log_method, event_dict)


pre_chain = [
    # Add the log level and a timestamp to the event_dict if the log entry
    # is not from structlog.
    structlog.stdlib.add_log_level,
    structlog.stdlib.add_logger_name,
    timestamper,
]

structlog.configure(
    processors=[
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        timestamper,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
    ],
    logger_factory=structlog.stdlib.LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)

# command output goes to stdout, so every log line goes to stderr
logging_config_dict = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "formatter": {
            "()": structlog.stdlib.ProcessorFormatter,
            "processor": structlog.dev.ConsoleRenderer(colors=bool(DEBUG)),
            "foreign_pre_chain": pre_chain,
        }
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "formatter",
            "stream": "ext://sys.stderr",
        }
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        "photonloom": {
            "handlers": ["console"],
            "level": os.getenv("PHOTONLOOM_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
        "py.warnings": {
            "handlers": ["console"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
