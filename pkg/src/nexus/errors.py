"""Domain error type shared by every module.

Every recoverable failure carries a stable string code (the vocabulary each
operation documents), a human message, and optional structured details. The
CLI maps DomainError to exit code 1 and the HTTP layer to a 4xx body, so the
codes are part of the external contract.
"""

from __future__ import annotations

from typing import Any


class DomainError(Exception):
    """A failure with a stable, machine-readable code."""

    def __init__(self, code: str, message: str, **details: Any):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}
