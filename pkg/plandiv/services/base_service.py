"""
Base Service Class
Common bookkeeping for the services shared by the CLI and the API
"""

import time
from abc import ABC
from contextlib import contextmanager
from datetime import datetime
from typing import Any, Dict, Iterator


class BaseService(ABC):
    """Base service class with uptime and call counters"""

    def __init__(self):
        self.service_name = self.__class__.__name__
        self.start_time = datetime.now()
        self.calls: Dict[str, int] = {}
        self.busy_seconds = 0.0

    @contextmanager
    def track(self, operation: str) -> Iterator[None]:
        """Count one call of `operation` and its wall time"""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.calls[operation] = self.calls.get(operation, 0) + 1
            self.busy_seconds += time.perf_counter() - start

    def get_service_info(self) -> Dict[str, Any]:
        return {
            "service_name": self.service_name,
            "start_time": self.start_time.isoformat(),
            "uptime": (datetime.now() - self.start_time).total_seconds(),
            "calls": dict(self.calls),
            "busy_seconds": round(self.busy_seconds, 6),
        }

    async def health_check(self) -> Dict[str, Any]:
        return {
            "status": "healthy",
            "service": self.service_name,
            "timestamp": datetime.now().isoformat()
        }
