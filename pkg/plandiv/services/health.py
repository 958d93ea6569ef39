"""
Health Service
Liveness, readiness and system resources of the API process
"""

import importlib
import psutil
from typing import Any, Dict, Optional
from datetime import datetime

from plandiv.planning.errors import PlanningError
from plandiv.planning.metrics import MetricId, compute
from plandiv.planning.pddl_core import load_task, parse_plan
from plandiv.utils.logger import get_logger, get_structured_logger
from .base_service import BaseService

logger = get_logger(__name__)
structured_logger = get_structured_logger()

# packages the scoring path imports at request time
REQUIRED_PACKAGES = ("numpy", "pandas", "pydantic")

SELF_CHECK_DOMAIN = """(define (domain selfcheck) (:requirements :strips)
  (:predicates (on ?x))
  (:action press :parameters (?x) :precondition (and) :effect (on ?x)))"""
SELF_CHECK_PROBLEM = "(define (problem selfcheck-1) (:domain selfcheck) (:objects a b) (:init) (:goal (and (on a) (on b))))"


class HealthService(BaseService):
    """Service for health monitoring and system status"""

    def __init__(self, services: Optional[Dict[str, BaseService]] = None):
        super().__init__()
        self.services = services or {}

    async def get_system_health(self) -> Dict[str, Any]:
        try:
            system_resources = self._get_system_resources()
            dependencies = self._check_dependencies()
            services = {name: await service.health_check() for name, service in self.services.items()}

            overall_status = "healthy"
            if not dependencies["all_healthy"] or any(s.get("status") != "healthy" for s in services.values()):
                overall_status = "degraded"

            structured_logger.log_health_check("system", overall_status)
            return {
                "status": overall_status,
                "timestamp": datetime.now().isoformat(),
                "system_resources": system_resources,
                "dependencies": dependencies,
                "services": services,
                "uptime": self.get_service_info()["uptime"]
            }

        except Exception as e:
            logger.error(f"Health check failed: {e}")
            return {
                "status": "unhealthy",
                "error": str(e),
                "timestamp": datetime.now().isoformat()
            }

    def _get_system_resources(self) -> Dict[str, Any]:
        try:
            process = psutil.Process()
            memory = psutil.virtual_memory()
            return {
                "cpu_percent": psutil.cpu_percent(interval=None),
                "cpu_count": psutil.cpu_count(),
                "memory": {
                    "total": memory.total,
                    "available": memory.available,
                    "percent": memory.percent
                },
                "process": {
                    "rss": process.memory_info().rss,
                    "threads": process.num_threads()
                }
            }
        except Exception as e:
            logger.warning(f"Failed to get system resources: {e}")
            return {"error": str(e), "cpu_percent": None, "memory": None, "process": None}

    def _check_dependencies(self) -> Dict[str, Any]:
        dependencies: Dict[str, Any] = {}
        for package in REQUIRED_PACKAGES:
            try:
                importlib.import_module(package)
                dependencies[package] = True
            except ImportError:
                dependencies[package] = False
        dependencies["planning"] = self._check_planning()
        dependencies["all_healthy"] = dependencies["planning"] and all(
            dependencies[package] for package in REQUIRED_PACKAGES)
        return dependencies

    async def health_check(self) -> Dict[str, Any]:
        return {
            "status": "healthy",
            "service": "health",
            "timestamp": datetime.now().isoformat(),
            "uptime": self.get_service_info()["uptime"]
        }

    @staticmethod
    def _check_planning() -> bool:
        """Score two orderings of a two-step task; their subgoal similarity is 0"""
        try:
            task = load_task(SELF_CHECK_DOMAIN, SELF_CHECK_PROBLEM, "selfcheck-domain", "selfcheck-problem")
            first = parse_plan("(press a)\n(press b)", task.domain, task.problem, name="ab")
            second = parse_plan("(press b)\n(press a)", task.domain, task.problem, name="ba")
            return compute(MetricId.SGO, first, second, task).value == 0
        except PlanningError as e:
            logger.error(f"Planning self-check failed: {e}")
            return False
