"""
Custom Middleware
Request logging and response headers for the API
"""

import time
import uuid
from typing import Callable
from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware

from plandiv.utils.logger import get_structured_logger


class LoggingMiddleware(BaseHTTPMiddleware):
    """Logs every request and tags the response with its id and duration"""

    def __init__(self, app):
        super().__init__(app)
        self.logger = get_structured_logger("access")

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        request_id = request.headers.get("x-request-id") or str(uuid.uuid4())
        request.state.request_id = request_id

        client_ip = request.client.host if request.client else "unknown"
        user_agent = request.headers.get("user-agent", "unknown")
        start_time = time.perf_counter()

        try:
            response = await call_next(request)
        except Exception:
            self.logger.log_request(
                method=request.method,
                path=str(request.url.path),
                status_code=500,
                response_time=time.perf_counter() - start_time,
                user_agent=user_agent,
                client_ip=client_ip
            )
            raise

        processing_time = time.perf_counter() - start_time
        self.logger.log_request(
            method=request.method,
            path=str(request.url.path),
            status_code=response.status_code,
            response_time=processing_time,
            user_agent=user_agent,
            client_ip=client_ip
        )

        response.headers["X-Request-ID"] = request_id
        response.headers["X-Response-Time"] = f"{processing_time:.6f}"
        return response


class SecurityHeadersMiddleware(BaseHTTPMiddleware):
    """Adds the standard hardening headers to every response"""

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        response = await call_next(request)
        response.headers["X-Content-Type-Options"] = "nosniff"
        response.headers["X-Frame-Options"] = "DENY"
        response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"
        return response
