"""Domain error hierarchy shared by every module.

Each error carries a machine-readable ``code`` (the class name), an optional
``entity`` reference and free-form ``details`` so the HTTP layer and the CLI
can emit one uniform error envelope.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base class for every rule violation the service can report."""

    def __init__(self, message: str, *, entity: str | None = None, **details):
        super().__init__(message)
        self.message = message
        self.entity = entity
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def envelope(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "entity": self.entity,
            "details": self.details,
        }


# --- corpus / format errors -------------------------------------------------

class EmptyInput(DomainError):
    pass


class FormatError(DomainError):
    def __init__(self, line: int, message: str, **details):
        super().__init__(f"line {line}: {message}", line=line, **details)
        self.line = line


class DuplicateId(DomainError):
    pass


class IdDomainMismatch(DomainError):
    pass


class UnknownTag(DomainError):
    def __init__(self, tag: str, line: int, **details):
        super().__init__(f"line {line}: tag {tag!r} not in tagset", tag=tag, line=line, **details)
        self.tag = tag
        self.line = line


class ConflictingText(DomainError):
    pass


class MissingLanguage(DomainError):
    pass


# --- annotation errors ------------------------------------------------------

class TagNotInTagset(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class EmptyEdit(DomainError):
    pass


class NoChange(DomainError):
    pass


# --- adaptation errors ------------------------------------------------------

class SerialOverflow(DomainError):
    pass


class UnmappedTag(DomainError):
    def __init__(self, tag: str, sentence_id: str, index: int):
        super().__init__(
            f"tag {tag!r} at {sentence_id}[{index}] has no mapping",
            entity=f"sentence:{sentence_id}", tag=tag, index=index,
        )
        self.tag = tag


# --- agreement errors -------------------------------------------------------

class TextMismatch(DomainError):
    pass


class NoJointPositions(DomainError):
    pass


# --- project administration errors -------------------------------------------

class NotAuthenticated(DomainError):
    """Missing, expired or invalid session token (401-equivalent)."""


class NotAuthorized(DomainError):
    """Authenticated but the role may not perform the operation (403-equivalent)."""


class LanguageMismatch(NotAuthorized):
    """Actor or assignee is bound to a different language than the target."""


class DuplicateUser(DomainError):
    pass


class BadCredential(DomainError):
    pass


class InactiveAccount(DomainError):
    pass


class ValidationFailed(DomainError):
    def __init__(self, violations: list[str], **details):
        super().__init__("; ".join(violations), violations=violations, **details)
        self.violations = violations


class CapExceeded(DomainError):
    pass


class AlreadyAssigned(DomainError):
    pass


class NoActiveAssignment(DomainError):
    pass


class IncompleteFile(DomainError):
    def __init__(self, remaining: int, *, entity: str | None = None):
        super().__init__(
            f"{remaining} sentence(s) not fully tagged", entity=entity, remaining=remaining,
        )
        self.remaining = remaining


class UnknownLanguage(DomainError):
    pass


class UnknownEntity(DomainError):
    pass


# --- service errors -----------------------------------------------------------

class StoreUnavailable(DomainError):
    pass


class BindFailure(DomainError):
    pass
