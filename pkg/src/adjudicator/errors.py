"""Exception hierarchy shared across the package.

Every error that crosses a module boundary is a subclass of
:class:`AdjudicatorError`, so callers can catch broadly at the CLI/service
edge and narrowly inside the pipeline.
"""

from __future__ import annotations


class AdjudicatorError(Exception):
    """Base class for all package errors."""


# -- corpus ------------------------------------------------------------------

class MalformedCorpus(AdjudicatorError):
    """Corpus file could not be parsed or a passage is missing a field."""

    def __init__(self, message: str, *, file: str = "", position: int | None = None):
        detail = message
        if file:
            detail += f" (file: {file}"
            if position is not None:
                detail += f", passage #{position}"
            detail += ")"
        super().__init__(detail)
        self.file = file
        self.position = position


class DuplicatePassageId(AdjudicatorError):
    def __init__(self, passage_id: str):
        super().__init__(f"duplicate passage id: {passage_id!r}")
        self.passage_id = passage_id


class EmptyQuery(AdjudicatorError):
    """retrieve() was called with an empty query string."""


# -- casefile ----------------------------------------------------------------

class MalformedDataset(AdjudicatorError):
    """Dataset file could not be parsed or a case is missing a field."""


class InvariantViolation(AdjudicatorError):
    """A case violates a schema invariant; reports case id and rule."""

    def __init__(self, case_id: str, rule: str):
        super().__init__(f"case {case_id!r}: {rule}")
        self.case_id = case_id
        self.rule = rule


# -- backend -----------------------------------------------------------------

class ProviderError(AdjudicatorError):
    """HTTP/transport failure after bounded retry."""


class Timeout(ProviderError):
    pass


class SchemaViolation(AdjudicatorError):
    """Model output failed schema validation after all parse retries.

    The last raw text is preserved so traces can record what the model said.
    """

    def __init__(self, message: str, *, raw_text: str = "", attempts: int = 0):
        super().__init__(message)
        self.raw_text = raw_text
        self.attempts = attempts


class UnknownScriptKey(AdjudicatorError):
    """Scripted backend received a request it has no entry for."""


# -- pipeline ----------------------------------------------------------------

class EmptyChecklist(AdjudicatorError):
    """Extraction produced zero checklist items; the case is aborted."""


class CoverageGap(AdjudicatorError):
    """Assessments do not cover the checklist's item ids exactly."""


class InvalidLabel(AdjudicatorError):
    """Backend emitted a label inconsistent with the case's question type."""


# -- evalharness -------------------------------------------------------------

class IdMismatch(AdjudicatorError):
    pass


class EmptyResults(AdjudicatorError):
    pass


# -- interface ---------------------------------------------------------------

class ConfigError(AdjudicatorError):
    """Run configuration is invalid (bad path, bad mode, etc.)."""
