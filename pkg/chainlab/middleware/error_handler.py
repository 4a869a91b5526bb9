import logging
import traceback
from typing import Optional, Tuple

from pydantic import ValidationError

from chainlab.core.errors import ChainLabError

logger = logging.getLogger(__name__)


def chainlab_error_handler(exc: ChainLabError, run_id: Optional[str] = None) -> Tuple[dict, int]:
    payload = {"success": False, **exc.to_dict(), "run_id": run_id}
    return payload, exc.exit_code


def validation_error_handler(exc: ValidationError, run_id: Optional[str] = None) -> Tuple[dict, int]:
    return {
        "success": False,
        "error": "config_parse",
        "detail": "Validation error",
        "details": exc.errors(include_url=False, include_context=False),
        "exit_code": 2,
        "run_id": run_id
    }, 2


def generic_exception_handler(exc: Exception, run_id: Optional[str] = None, debug: bool = False) -> Tuple[dict, int]:
    error_detail = f"{type(exc).__name__}: {str(exc)}"
    traceback_str = ''.join(traceback.format_tb(exc.__traceback__))
    logger.error(f"Unhandled exception: {error_detail}\n{traceback_str}")
    return {
        "success": False,
        "error": "internal_error",
        "detail": error_detail,
        "traceback": traceback_str if debug else None,
        "exit_code": 1,
        "run_id": run_id
    }, 1


def handle_exception(exc: Exception, run_id: Optional[str] = None, debug: bool = False) -> Tuple[dict, int]:
    """Dispatch to the handler for the exception family; returns (payload, exit code)."""
    if isinstance(exc, ChainLabError):
        return chainlab_error_handler(exc, run_id)
    if isinstance(exc, ValidationError):
        return validation_error_handler(exc, run_id)
    return generic_exception_handler(exc, run_id, debug)
