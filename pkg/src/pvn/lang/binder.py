"""Replay a parsed document into a network snapshot.

Statements are applied in document order; names must be declared before use.
Queries are bound against the state at their position in the document.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import assignments as store
from ..assignments import Assignment, Mode, Protocol
from ..errors import BindError, DuplicateDeclaration, PvnError
from ..evolution import (
    AddContent,
    AddMember,
    AddSubgroupEdge,
    CreateGroup,
    DeleteGroup,
    Join,
    Leave,
    Move,
    Mutation,
    RemoveContent,
    RemoveSubgroupEdge,
    apply_to_draft,
)
from ..model import ALL, ALL_NAME, ContentId, Draft, GroupId, MemberId, NetworkSnapshot, format_path
from . import ast
from .parser import parse


@dataclass(frozen=True)
class BoundQuery:
    statement: ast.Query
    snapshot: NetworkSnapshot
    viewer: MemberId | None = None
    owner: MemberId | None = None
    content: ContentId | None = None
    mutations: tuple[Mutation, ...] = ()


@dataclass
class Binding:
    snapshot: NetworkSnapshot
    queries: list[BoundQuery] = field(default_factory=list)


def to_mutation(m: ast.MutationStmt) -> Mutation:
    if isinstance(m, ast.CreateGroupStmt):
        return CreateGroup(m.name, (m.parent,) if m.parent else (), m.owner)
    if isinstance(m, ast.DeleteGroupStmt):
        return DeleteGroup(m.name)
    if isinstance(m, ast.LinkStmt):
        return AddSubgroupEdge(m.child, m.parent)
    if isinstance(m, ast.UnlinkStmt):
        return RemoveSubgroupEdge(m.child, m.parent)
    if isinstance(m, ast.AddMemberStmt):
        return AddMember(m.name)
    if isinstance(m, ast.JoinStmt):
        return Join(m.member, m.group)
    if isinstance(m, ast.LeaveStmt):
        return Leave(m.member, m.group)
    if isinstance(m, ast.MoveStmt):
        return Move(m.member, m.target)
    if isinstance(m, ast.AddContentStmt):
        return AddContent(m.owner, format_path(m.path))
    if isinstance(m, ast.RemoveContentStmt):
        return RemoveContent(m.owner, format_path(m.path))
    raise TypeError(m)


class _Binder:
    def __init__(self, base: NetworkSnapshot):
        self.draft = Draft(base)
        self.version = base.version
        self.frozen: NetworkSnapshot | None = None
        self.content_declared: set[MemberId] = set()
        self.queries: list[BoundQuery] = []

    def _touch(self) -> None:
        self.frozen = None

    def current(self) -> NetworkSnapshot:
        if self.frozen is None:
            self.frozen = self.draft.freeze(self.version + 1)
        return self.frozen

    def run(self, doc: ast.Document) -> Binding:
        for stmt in doc.statements:
            try:
                self.statement(stmt)
            except BindError:
                raise
            except PvnError as exc:
                raise BindError(stmt.loc, exc) from exc
        return Binding(self.current(), self.queries)

    def statement(self, s: ast.Statement) -> None:
        d = self.draft
        if isinstance(s, ast.QUERY_TYPES):
            self.queries.append(self.query(s))
            return
        self._touch()
        if isinstance(s, ast.GroupDecl):
            d.add_group(s.name, [self.group_name(p) for p in s.parents], s.owner)
        elif isinstance(s, ast.MemberDecl):
            groups = [d.require_group(self.group_name(g)) for g in s.groups]
            if ALL in groups:
                raise PvnError("membership in 'all' is implicit and cannot be declared")
            m = d.add_member(s.name)
            for g in groups:
                d.set_membership(m, g, True)
        elif isinstance(s, ast.ContentDecl):
            self.content(s)
        elif isinstance(s, ast.PolicyBlock):
            self.policy(s)
        elif isinstance(s, ast.MUTATION_TYPES):
            apply_to_draft(d, to_mutation(s))
        else:
            raise TypeError(s)

    @staticmethod
    def group_name(name: str) -> GroupId:
        return ALL if name == ALL_NAME else GroupId(name)

    def content(self, s: ast.ContentDecl) -> None:
        d = self.draft
        owner = d.require_member(s.owner)
        root = d.contents[d.roots[owner]]
        if owner in self.content_declared or root.children:
            raise DuplicateDeclaration(f"content of {owner.name} is already declared")
        if s.root.name != root.name:
            raise BindError(s.root.loc, PvnError(f"content root of {owner.name} must be named {root.name}"))
        self.content_declared.add(owner)

        def grow(parent: ContentId, node: ast.TreeNode) -> None:
            for child in node.children or ():
                try:
                    cid = d.add_content(owner, parent, child.name)
                except PvnError as exc:
                    raise BindError(child.loc, exc) from exc
                grow(cid, child)

        grow(root.id, s.root)

    def policy(self, s: ast.PolicyBlock) -> None:
        d = self.draft
        owner = d.require_member(s.owner)
        if s.default is not None:
            store.draft_set_default(d, owner, Protocol.parse(s.default))
        for r in s.rules:
            try:
                subject = d.subject(r.subject)
                content = d.resolve_path(owner, r.path)
                mode = Mode.VISIBLE if r.effect == "allow" else Mode.INVISIBLE
                proto = Protocol.parse(r.protocol) if r.protocol else None
                store.draft_set(d, Assignment(owner, subject, content, mode, proto))
            except PvnError as exc:
                raise BindError(r.loc, exc) from exc

    def query(self, q: ast.Query) -> BoundQuery:
        snap = self.current()
        owner = snap.require_member(q.owner)
        if isinstance(q, ast.WhatIf):
            return BoundQuery(q, snap, owner=owner, mutations=tuple(to_mutation(m) for m in q.mutations))
        viewer = snap.require_member(q.viewer) if hasattr(q, "viewer") else None
        content = snap.resolve_path(owner, q.path) if hasattr(q, "path") else None
        return BoundQuery(q, snap, viewer, owner, content)


def bind(doc: ast.Document, base: NetworkSnapshot | None = None) -> Binding:
    """Replay ``doc`` on top of ``base`` (an empty network by default).

    Errors are raised as :class:`BindError` with the offending statement's location.
    """
    return _Binder(base if base is not None else NetworkSnapshot.empty()).run(doc)


def load(text: str, base: NetworkSnapshot | None = None) -> Binding:
    return bind(parse(text), base)
