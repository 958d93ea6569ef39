"""
Rate limiting shared by the app and the scoring routes
"""

from slowapi import Limiter
from slowapi.util import get_remote_address

from plandiv.config import get_settings

limiter = Limiter(key_func=get_remote_address)


def scoring_limit() -> str:
    return get_settings().rate_limit
