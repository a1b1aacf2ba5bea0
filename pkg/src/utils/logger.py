"""structlog setup for the solver suite.

Result documents own stdout, so every handler here writes to stderr or to a
rotating log file. Exact values (Fractions, ε-polynomials) are rendered with
``str`` so log lines read ``1/3`` rather than ``Fraction(1, 3)``.
"""

import logging
import logging.handlers
from fractions import Fraction
from pathlib import Path
from typing import Any, List, MutableMapping

import structlog

from config import Settings


def _render_exact(_logger: Any, _method: str, event: MutableMapping[str, Any]) -> MutableMapping[str, Any]:
    for key, value in event.items():
        if isinstance(value, Fraction) or hasattr(value, "limit_at_zero") or hasattr(value, "valuation"):
            event[key] = str(value)
    return event


def _handlers(settings: Settings) -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.handlers.RotatingFileHandler(
            filename=settings.log_file,
            maxBytes=int(settings.log_max_size),
            backupCount=settings.log_backup_count,
            encoding="utf-8",
        ))
    return handlers


def setup_logging(settings: Settings) -> None:
    """Configure stdlib handlers and the structlog pipeline (JSON lines)."""
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper()),
        format="%(message)s",
        handlers=_handlers(settings),
        force=True,
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="ISO"),
            _render_exact,
            structlog.processors.format_exc_info,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def get_logger(name: str, **context: Any) -> structlog.stdlib.BoundLogger:
    logger = structlog.get_logger(name)
    return logger.bind(**context) if context else logger


def get_run_logger(operation: str, run_id: str) -> structlog.stdlib.BoundLogger:
    """Logger for one CLI invocation; ``run_id`` is attached to every event."""
    return get_logger(f"run.{operation}", run_id=run_id)
