"""
plandiv API
FastAPI application exposing plan validation, similarity metrics and
diverse-subset selection
"""

from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from slowapi import _rate_limit_exceeded_handler
from slowapi.errors import RateLimitExceeded

from plandiv import __version__
from plandiv.api.rate_limit import limiter
from plandiv.api.routes import diversity, health
from plandiv.config import get_settings
from plandiv.planning.errors import PlanningError, PlanSetError
from plandiv.services.diversity import DiversityService
from plandiv.services.health import HealthService
from plandiv.utils.logger import get_logger, setup_logging
from plandiv.utils.middleware import LoggingMiddleware, SecurityHeadersMiddleware

settings = get_settings()
setup_logging(settings.log_level, settings.log_dir or settings.api_log_dir)
logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager"""
    logger.info("Starting plandiv API...")
    try:
        app.state.diversity_service = DiversityService(workers=settings.workers)
        app.state.health_service = HealthService({"diversity": app.state.diversity_service})
        logger.info(f"Services initialized ({settings.workers} worker(s))")
    except Exception as e:
        logger.error(f"Failed to initialize services: {e}")
        raise

    yield

    logger.info("Shutting down plandiv API...")


app = FastAPI(
    title="plandiv API",
    description="Plan validation, plan similarity metrics and diverse plan selection",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan
)

app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.origins,
    allow_credentials=False,
    allow_methods=["GET", "POST"],
    allow_headers=["Content-Type"],
    expose_headers=["X-Request-ID", "X-Response-Time"],
)
app.add_middleware(SecurityHeadersMiddleware)
app.add_middleware(LoggingMiddleware)

app.include_router(diversity.router, prefix="/api/v1", tags=["diversity"])
app.include_router(health.router, prefix="/api/v1", tags=["health"])


@app.get("/")
async def root():
    return {
        "message": "plandiv API",
        "version": __version__,
        "status": "running",
        "docs": "/docs"
    }


def _error_body(message, status_code: int, request: Request, **extra):
    return JSONResponse(
        status_code=status_code,
        content={"error": message, "status_code": status_code, "path": str(request.url), **extra}
    )


@app.exception_handler(PlanningError)
async def planning_exception_handler(request: Request, exc: PlanningError):
    """Parse, validation and selection failures are the client's input"""
    logger.warning(f"Rejected {request.url.path}: {exc.diagnostic()}")
    diagnostics = exc.diagnostics() if isinstance(exc, PlanSetError) else [exc.diagnostic()]
    return _error_body(diagnostics[0] if len(diagnostics) == 1 else exc.message, 422, request,
                       diagnostics=diagnostics)


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    logger.error(f"HTTP {exc.status_code}: {exc.detail}")
    return _error_body(exc.detail, exc.status_code, request)


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception: {str(exc)}", exc_info=True)
    return _error_body("Internal server error", 500, request)


if __name__ == "__main__":
    uvicorn.run(
        "plandiv.main:app",
        host=settings.host,
        port=settings.port,
        log_level=settings.log_level.lower(),
        access_log=True,
        reload=False
    )
