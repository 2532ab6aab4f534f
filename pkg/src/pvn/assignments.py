"""Explicit visibility assignments and per-owner default protocols."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ForeignContent, ForeignSubjectHierarchy, NotFound, PvnError
from .model import (
    ContentId,
    Draft,
    GroupId,
    MemberId,
    MemberRef,
    NetworkSnapshot,
    Subject,
    _StateView,
)


class Mode(enum.Enum):
    VISIBLE = "visible"
    INVISIBLE = "invisible"

    def __str__(self) -> str:
        return self.value


class Protocol(enum.Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"

    @classmethod
    def parse(cls, word: str) -> Protocol:
        if word == "cautious":
            return cls.PESSIMISTIC
        try:
            return cls(word)
        except ValueError:
            raise PvnError(f"unknown protocol {word!r}") from None

    def __str__(self) -> str:
        return self.value


DEFAULT_PROTOCOL = Protocol.PESSIMISTIC


@dataclass(frozen=True)
class Assignment:
    owner: MemberId
    subject: Subject
    content: ContentId
    mode: Mode
    protocol: Protocol | None = None

    @property
    def key(self) -> tuple[MemberId, Subject, ContentId]:
        return (self.owner, self.subject, self.content)


def default_protocol(state: _StateView, owner: MemberRef) -> Protocol:
    return state.default_protocols.get(state.require_member(owner), DEFAULT_PROTOCOL)


def effective_protocol(state: _StateView, a: Assignment) -> Protocol:
    return a.protocol or state.default_protocols.get(a.owner, DEFAULT_PROTOCOL)


def validate(state: _StateView, a: Assignment) -> None:
    owner = state.require_member(a.owner)
    if isinstance(a.subject, GroupId):
        state.require_group(a.subject)
        hierarchy = state.hierarchy_owner(a.subject)
        if hierarchy is not None and hierarchy != owner:
            raise ForeignSubjectHierarchy(
                f"group {a.subject.name} belongs to {hierarchy.name}'s hierarchy and cannot be used in {owner.name}'s rules"
            )
    else:
        state.require_member(a.subject)
    state.require_content(a.content)
    if a.content.owner != owner:
        raise ForeignContent(
            f"{owner.name} cannot assign visibility on {a.content.owner.name}'s content {state.content_path(a.content)}"
        )


def draft_set(d: Draft, a: Assignment) -> None:
    validate(d, a)
    d.assignments[a.key] = a


def draft_clear(d: Draft, owner: MemberRef, subject: Subject, content: ContentId) -> None:
    key = (d.require_member(owner), subject, content)
    if key not in d.assignments:
        raise NotFound(f"no assignment for {subject} on {content}")
    del d.assignments[key]


def draft_set_default(d: Draft, owner: MemberRef, p: Protocol) -> None:
    d.default_protocols[d.require_member(owner)] = p


def set_assignment(snap: NetworkSnapshot, a: Assignment) -> NetworkSnapshot:
    d = snap.draft()
    draft_set(d, a)
    return d.freeze()


def clear_assignment(snap: NetworkSnapshot, owner: MemberRef, subject: Subject, content: ContentId) -> NetworkSnapshot:
    d = snap.draft()
    draft_clear(d, owner, subject, content)
    return d.freeze()


def set_default_protocol(snap: NetworkSnapshot, owner: MemberRef, p: Protocol) -> NetworkSnapshot:
    d = snap.draft()
    draft_set_default(d, owner, p)
    return d.freeze()


def assignments_of(snap: _StateView, owner: MemberRef) -> list[Assignment]:
    o = snap.require_member(owner)
    return [a for a in snap.assignments.values() if a.owner == o]
