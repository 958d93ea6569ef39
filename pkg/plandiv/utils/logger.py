"""
Logging Configuration
Console logging, rotating log files and structured metric events
"""

import os
import sys
import json
import logging
import logging.handlers
from datetime import datetime
from typing import Dict, Optional

from pythonjsonlogger import jsonlogger

METRICS_LOGGER = "metrics"


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[str] = None,
    max_file_size: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5
):
    """
    Setup logging for the CLI and the service

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for rotating log files; console only when None
        max_file_size: Maximum size of log file before rotation
        backup_count: Number of backup files to keep
    """
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        raise ValueError(f"unknown log level '{log_level}'")

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    simple_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    # stdout carries command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(simple_formatter)
    root_logger.addHandler(console_handler)

    metrics_logger = logging.getLogger(METRICS_LOGGER)
    metrics_logger.handlers.clear()
    metrics_logger.setLevel(logging.INFO)
    metrics_logger.propagate = False

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, "plandiv.log"),
            maxBytes=max_file_size,
            backupCount=backup_count
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(detailed_formatter)
        root_logger.addHandler(file_handler)

        error_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, "plandiv_errors.log"),
            maxBytes=max_file_size,
            backupCount=backup_count
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(detailed_formatter)
        root_logger.addHandler(error_handler)

        metrics_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, "plandiv_metrics.log"),
            maxBytes=max_file_size,
            backupCount=backup_count
        )
        metrics_handler.setFormatter(jsonlogger.JsonFormatter('%(asctime)s %(levelname)s %(message)s'))
        metrics_logger.addHandler(metrics_handler)
    else:
        metrics_logger.addHandler(logging.NullHandler())

    logging.getLogger("uvicorn.access").setLevel(logging.WARNING)
    logging.getLogger("httpx").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


class StructuredLogger:
    """Structured logging for JSON-formatted events"""

    def __init__(self, logger: logging.Logger, json_fields: bool = False):
        self.logger = logger
        # fields go to JsonFormatter as extras instead of a json.dumps message
        self.json_fields = json_fields

    def _emit(self, log_data: Dict, level: int = logging.INFO):
        log_data["timestamp"] = datetime.now().isoformat()
        if self.json_fields:
            self.logger.log(level, log_data["type"], extra=log_data)
        else:
            self.logger.log(level, json.dumps(log_data))

    def log_request(self, method: str, path: str, status_code: int,
                    response_time: float, user_agent: Optional[str] = None,
                    client_ip: Optional[str] = None):
        """Log HTTP request in structured format"""
        self._emit({
            "type": "http_request",
            "method": method,
            "path": path,
            "status_code": status_code,
            "response_time": response_time,
            "user_agent": user_agent,
            "client_ip": client_ip
        })

    def log_metric(self, metric: str, plan_a: str, plan_b: str, value: float, compute_time: float):
        """One pairwise metric evaluation"""
        if not self.logger.isEnabledFor(logging.INFO):
            return
        self._emit({
            "type": "metric",
            "metric": metric,
            "plan_a": plan_a,
            "plan_b": plan_b,
            "value": value,
            "compute_time": compute_time
        })

    def log_selection(self, metric: str, k: int, selected: list, score: float, mode: str):
        self._emit({
            "type": "selection",
            "metric": metric,
            "k": k,
            "selected": selected,
            "score": score,
            "mode": mode
        })

    def log_validation(self, plan: str, valid: bool, failing_step: Optional[int] = None,
                       reason: Optional[str] = None):
        log_data = {"type": "validation", "plan": plan, "valid": valid}
        if not valid:
            log_data["failing_step"] = failing_step
            log_data["reason"] = reason
        self._emit(log_data, logging.INFO if valid else logging.WARNING)

    def log_health_check(self, service: str, status: str, details: Optional[Dict] = None):
        """Log health check in structured format"""
        log_data = {"type": "health_check", "service": service, "status": status}
        if details:
            log_data["details"] = details
        self._emit(log_data)


def get_structured_logger(name: str = "structured") -> StructuredLogger:
    """
    Get a structured logger instance

    Args:
        name: Logger name; "metrics" writes to the JSON metrics log

    Returns:
        StructuredLogger instance
    """
    return StructuredLogger(get_logger(name), json_fields=name == METRICS_LOGGER)
