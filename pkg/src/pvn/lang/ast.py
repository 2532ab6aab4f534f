"""Syntax tree of policy documents.

Every node carries its source location; locations are excluded from equality
so that a re-parsed, re-printed document compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import Location

NOWHERE = Location(0, 0)


def _loc():
    return field(default=NOWHERE, compare=False, repr=False)


@dataclass(frozen=True)
class GroupDecl:
    name: str
    parents: tuple[str, ...] = ()
    owner: str | None = None
    loc: Location = _loc()


@dataclass(frozen=True)
class MemberDecl:
    name: str
    groups: tuple[str, ...] = ()
    loc: Location = _loc()


@dataclass(frozen=True)
class TreeNode:
    name: str
    # None for a leaf written ``Name;``, a tuple for ``Name { ... }``
    children: tuple[TreeNode, ...] | None = None
    loc: Location = _loc()


@dataclass(frozen=True)
class ContentDecl:
    owner: str
    root: TreeNode
    loc: Location = _loc()


@dataclass(frozen=True)
class Rule:
    effect: str  # "allow" or "deny"
    subject: str
    path: tuple[str, ...]
    protocol: str | None = None  # keyword as written
    loc: Location = _loc()


@dataclass(frozen=True)
class PolicyBlock:
    owner: str
    default: str | None = None
    rules: tuple[Rule, ...] = ()
    loc: Location = _loc()


@dataclass(frozen=True)
class CanQuery:
    viewer: str
    owner: str
    path: tuple[str, ...]
    loc: Location = _loc()


@dataclass(frozen=True)
class ShowQuery:
    viewer: str
    owner: str
    loc: Location = _loc()


@dataclass(frozen=True)
class AudienceQuery:
    owner: str
    path: tuple[str, ...]
    loc: Location = _loc()


@dataclass(frozen=True)
class ExplainQuery:
    viewer: str
    owner: str
    path: tuple[str, ...]
    loc: Location = _loc()


@dataclass(frozen=True)
class CreateGroupStmt:
    name: str
    parent: str | None = None
    owner: str | None = None
    loc: Location = _loc()


@dataclass(frozen=True)
class DeleteGroupStmt:
    name: str
    loc: Location = _loc()


@dataclass(frozen=True)
class AddMemberStmt:
    name: str
    loc: Location = _loc()


@dataclass(frozen=True)
class LinkStmt:
    child: str
    parent: str
    loc: Location = _loc()


@dataclass(frozen=True)
class UnlinkStmt:
    child: str
    parent: str
    loc: Location = _loc()


@dataclass(frozen=True)
class JoinStmt:
    member: str
    group: str
    loc: Location = _loc()


@dataclass(frozen=True)
class LeaveStmt:
    member: str
    group: str
    loc: Location = _loc()


@dataclass(frozen=True)
class MoveStmt:
    member: str
    target: str
    loc: Location = _loc()


@dataclass(frozen=True)
class AddContentStmt:
    owner: str
    path: tuple[str, ...]
    loc: Location = _loc()


@dataclass(frozen=True)
class RemoveContentStmt:
    owner: str
    path: tuple[str, ...]
    loc: Location = _loc()


MutationStmt = Union[
    CreateGroupStmt,
    DeleteGroupStmt,
    LinkStmt,
    UnlinkStmt,
    AddMemberStmt,
    JoinStmt,
    LeaveStmt,
    MoveStmt,
    AddContentStmt,
    RemoveContentStmt,
]

MUTATION_TYPES = (
    CreateGroupStmt,
    DeleteGroupStmt,
    LinkStmt,
    UnlinkStmt,
    AddMemberStmt,
    JoinStmt,
    LeaveStmt,
    MoveStmt,
    AddContentStmt,
    RemoveContentStmt,
)


@dataclass(frozen=True)
class WhatIf:
    mutations: tuple[MutationStmt, ...]
    owner: str
    loc: Location = _loc()


Query = Union[CanQuery, ShowQuery, AudienceQuery, ExplainQuery, WhatIf]
QUERY_TYPES = (CanQuery, ShowQuery, AudienceQuery, ExplainQuery, WhatIf)

Statement = Union[GroupDecl, MemberDecl, ContentDecl, PolicyBlock, Query, MutationStmt]


@dataclass(frozen=True)
class Document:
    statements: tuple[Statement, ...] = ()
