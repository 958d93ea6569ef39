#!/usr/bin/env python3
"""
plandiv API startup script
"""

import sys

import uvicorn

from plandiv.config import get_settings
from plandiv.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)


def check_environment(settings) -> bool:
    """Reject settings uvicorn would only fail on later"""
    if not 0 < settings.port < 65536:
        logger.error(f"Invalid port {settings.port}")
        return False
    if not settings.origins:
        logger.warning("No allowed CORS origins configured")
    return True


def main():
    settings = get_settings()
    setup_logging(settings.log_level, settings.log_dir or settings.api_log_dir)
    logger.info(f"Starting plandiv API on {settings.host}:{settings.port}...")

    if not check_environment(settings):
        sys.exit(1)

    uvicorn.run(
        "plandiv.main:app",
        host=settings.host,
        port=settings.port,
        log_level=settings.log_level.lower(),
        access_log=True,
        reload=False
    )


if __name__ == "__main__":
    main()
