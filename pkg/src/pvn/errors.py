"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations

from dataclasses import dataclass


class PvnError(Exception):
    """Base class for all semantic errors (CLI exit status 1)."""


class DuplicateName(PvnError):
    pass


class DuplicateSiblingName(DuplicateName):
    pass


class DuplicateDeclaration(PvnError):
    pass


class UnknownId(PvnError):
    pass


class UnknownMember(UnknownId):
    pass


class UnknownGroup(UnknownId):
    pass


class UnknownPath(UnknownId):
    pass


class InvalidName(PvnError):
    pass


class CycleDetected(PvnError):
    def __init__(self, child: str, parent: str):
        super().__init__(f"edge {child} < {parent} would create a cycle between {child} and {parent}")
        self.child = child
        self.parent = parent


class CrossHierarchy(PvnError):
    pass


class CannotModifyAll(PvnError):
    pass


class CannotRemoveRoot(PvnError):
    pass


class ForeignContent(PvnError):
    pass


class ForeignSubjectHierarchy(PvnError):
    pass


class NotFound(PvnError):
    pass


class BatchError(PvnError):
    """A mutation batch failed; nothing was applied.

    ``index`` is zero-based, ``position`` is the one-based ordinal used in messages.
    """

    def __init__(self, index: int, error: PvnError, snapshot):
        super().__init__(f"mutation #{index + 1} failed: {error}")
        self.index = index
        self.error = error
        self.snapshot = snapshot

    @property
    def position(self) -> int:
        return self.index + 1


@dataclass(frozen=True)
class Location:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class PvnSyntaxError(PvnError):
    """Parse failure with the offending location and the expected tokens (exit status 2)."""

    def __init__(self, location: Location, expected: frozenset[str] | set[str], found: str):
        self.location = location
        self.expected = frozenset(expected)
        self.found = found
        want = " or ".join(sorted(repr(e) for e in self.expected))
        super().__init__(f"{location}: syntax error: expected {want}, found {found}")


class BindError(PvnError):
    """A semantic error raised while replaying a document, tagged with its source location."""

    def __init__(self, location: Location | None, cause: PvnError | str):
        self.location = location
        self.cause = cause if isinstance(cause, PvnError) else PvnError(cause)
        where = f"{location}: " if location is not None else ""
        super().__init__(f"{where}{type(self.cause).__name__}: {self.cause}")
