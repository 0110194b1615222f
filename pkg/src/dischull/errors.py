"""Structured failures shared by all modules."""

from __future__ import annotations


class ContractError(RuntimeError):
    """A postcondition or precondition check failed.

    The ``report`` dict is emitted verbatim by the command line front end
    (exit code 2), so keep it JSON-serializable.
    """

    def __init__(self, message: str, report: dict | None = None, stage: str | None = None):
        super().__init__(message)
        self.report = dict(report or {})
        self.stage = stage
        self.report.setdefault("error", message)
        if stage is not None:
            self.report.setdefault("stage", stage)
