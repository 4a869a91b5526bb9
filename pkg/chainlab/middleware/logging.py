import json
import logging
import sys
import time
from contextlib import contextmanager
from typing import Iterator, Optional
from uuid import uuid4

from chainlab.core.config import Settings, settings as default_settings

logger = logging.getLogger(__name__)


def configure_logging(settings: Optional[Settings] = None) -> None:
    """One-time root logger setup; records go to stderr so results stay clean."""
    settings = settings or default_settings
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(message)s' if settings.LOG_JSON else '%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
        force=True,
    )


class RunContext:
    """Mutable state shared between a run and its logging wrapper."""

    def __init__(self, command: str, action: Optional[str]):
        self.run_id = str(uuid4())
        self.command = command
        self.action = action
        self.start_time = time.time()
        self.exit_code = 0

    @property
    def elapsed_ms(self) -> float:
        return (time.time() - self.start_time) * 1000.0


@contextmanager
def structured_run(command: str, action: Optional[str] = None) -> Iterator[RunContext]:
    """Log one JSON record per CLI run with its id, timing and outcome."""
    context = RunContext(command, action)

    log_data = {
        "run_id": context.run_id,
        "command": command,
        "action": action,
    }

    try:
        yield context
        process_time = time.time() - context.start_time

        log_data.update({
            "exit_code": context.exit_code,
            "process_time": f"{process_time:.3f}s",
            "success": context.exit_code == 0
        })

        logger.info(json.dumps(log_data))

    except Exception as e:
        process_time = time.time() - context.start_time
        log_data.update({
            "exit_code": getattr(e, "exit_code", 1),
            "process_time": f"{process_time:.3f}s",
            "error": getattr(e, "code", type(e).__name__),
            "success": False
        })
        logger.error(json.dumps(log_data))
        raise
