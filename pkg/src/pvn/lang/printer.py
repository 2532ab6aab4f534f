"""Pretty-printing of documents and canonical serialization of snapshots."""

from __future__ import annotations

import heapq
from typing import Iterable

from ..assignments import DEFAULT_PROTOCOL, Mode
from ..model import ALL, GroupId, NetworkSnapshot
from . import ast


def _path(segments: Iterable[str]) -> str:
    return "/" + "/".join(segments)


def _tree(node: ast.TreeNode) -> str:
    if node.children is None:
        return f"{node.name};"
    if not node.children:
        return f"{node.name} {{ }}"
    return f"{node.name} {{ " + " ".join(_tree(c) for c in node.children) + " }"


def _rule(r: ast.Rule) -> str:
    proto = f" [{r.protocol}]" if r.protocol else ""
    return f"{r.effect} {r.subject} : {_path(r.path)}{proto};"


def _mutation(m: ast.MutationStmt) -> str:
    if isinstance(m, ast.CreateGroupStmt):
        text = f"create group {m.name}"
        if m.parent is not None:
            text += f" < {m.parent}"
        if m.owner is not None:
            text += f" owner {m.owner}"
        return text
    if isinstance(m, ast.DeleteGroupStmt):
        return f"delete group {m.name}"
    if isinstance(m, ast.LinkStmt):
        return f"link {m.child} < {m.parent}"
    if isinstance(m, ast.UnlinkStmt):
        return f"unlink {m.child} < {m.parent}"
    if isinstance(m, ast.AddMemberStmt):
        return f"add member {m.name}"
    if isinstance(m, ast.JoinStmt):
        return f"join {m.member} {m.group}"
    if isinstance(m, ast.LeaveStmt):
        return f"leave {m.member} {m.group}"
    if isinstance(m, ast.MoveStmt):
        return f"move {m.member} to {m.target}"
    if isinstance(m, ast.AddContentStmt):
        return f"add content {m.owner}:{_path(m.path)}"
    if isinstance(m, ast.RemoveContentStmt):
        return f"remove content {m.owner}:{_path(m.path)}"
    raise TypeError(m)


def format_statement(s: ast.Statement) -> str:
    if isinstance(s, ast.GroupDecl):
        text = f"group {s.name}"
        if s.parents:
            text += " < " + ", ".join(s.parents)
        if s.owner is not None:
            text += f" owner {s.owner}"
        return text + ";"
    if isinstance(s, ast.MemberDecl):
        return f"member {s.name}" + (" in " + ", ".join(s.groups) if s.groups else "") + ";"
    if isinstance(s, ast.ContentDecl):
        return f"content {s.owner} {{ {_tree(s.root)} }}"
    if isinstance(s, ast.PolicyBlock):
        head = f"policy {s.owner}" + (f" default {s.default}" if s.default else "") + " {"
        return "\n".join([head, *("  " + _rule(r) for r in s.rules), "}"])
    if isinstance(s, ast.CanQuery):
        return f"can {s.viewer} see {s.owner}:{_path(s.path)};"
    if isinstance(s, ast.ExplainQuery):
        return f"explain {s.viewer} see {s.owner}:{_path(s.path)};"
    if isinstance(s, ast.ShowQuery):
        return f"show {s.viewer} for {s.owner};"
    if isinstance(s, ast.AudienceQuery):
        return f"audience {s.owner}:{_path(s.path)};"
    if isinstance(s, ast.WhatIf):
        body = " ".join(_mutation(m) + ";" for m in s.mutations)
        return f"whatif {{ {body} }} diff {s.owner};" if body else f"whatif {{ }} diff {s.owner};"
    if isinstance(s, ast.MUTATION_TYPES):
        return _mutation(s) + ";"
    raise TypeError(s)


def print_document(doc: ast.Document) -> str:
    """One statement per line, in document order."""
    return "".join(format_statement(s) + "\n" for s in doc.statements)


def _topological(snap: NetworkSnapshot, groups: list[GroupId]) -> list[GroupId]:
    """Parents before children, ties broken by name."""
    wanted = set(groups)
    pending = {g: {p for p in snap.groups[g].parents if p in wanted} for g in groups}
    children: dict[GroupId, list[GroupId]] = {g: [] for g in groups}
    for g, ps in pending.items():
        for p in ps:
            children[p].append(g)
    ready = [g.name for g, ps in pending.items() if not ps]
    heapq.heapify(ready)
    out = []
    while ready:
        g = GroupId(heapq.heappop(ready))
        out.append(g)
        for c in children[g]:
            pending[c].discard(g)
            if not pending[c]:
                heapq.heappush(ready, c.name)
    return out


def snapshot_document(snap: NetworkSnapshot) -> ast.Document:
    """Canonical document that rebuilds ``snap``.

    Order: system groups, members (with system memberships), user-defined
    groups, joins into user-defined groups, content trees, policies.  Groups
    are topologically sorted with name tie-breaks, everything else by name,
    rules in their insertion order.
    """
    stmts: list[ast.Statement] = []
    system = [g for g, info in snap.groups.items() if info.is_system and g != ALL]
    user = [g for g, info in snap.groups.items() if not info.is_system]

    def group_decl(g: GroupId) -> ast.GroupDecl:
        info = snap.groups[g]
        owner = info.owner.name if info.owner else None
        return ast.GroupDecl(g.name, tuple(sorted(p.name for p in info.parents)), owner)

    stmts.extend(group_decl(g) for g in _topological(snap, system))
    members = sorted(snap.members)
    for m in members:
        gs = sorted(g.name for g in snap.members[m] if snap.groups[g].is_system)
        stmts.append(ast.MemberDecl(m.name, tuple(gs)))
    stmts.extend(group_decl(g) for g in _topological(snap, user))
    for m in members:
        for g in sorted(g for g in snap.members[m] if not snap.groups[g].is_system):
            stmts.append(ast.JoinStmt(m.name, g.name))

    def tree(cid) -> ast.TreeNode:
        node = snap.contents[cid]
        if not node.children:
            return ast.TreeNode(node.name, None)
        kids = sorted(node.children, key=lambda c: snap.contents[c].name)
        return ast.TreeNode(node.name, tuple(tree(c) for c in kids))

    for m in members:
        root = snap.roots[m]
        if snap.contents[root].children:
            stmts.append(ast.ContentDecl(m.name, tree(root)))

    rules: dict = {}
    for a in snap.assignments.values():
        effect = "allow" if a.mode is Mode.VISIBLE else "deny"
        path = tuple(snap.content_path(a.content)[1:].split("/"))
        proto = a.protocol.value if a.protocol else None
        rules.setdefault(a.owner, []).append(ast.Rule(effect, a.subject.name, path, proto))
    for m in members:
        default = snap.default_protocols.get(m, DEFAULT_PROTOCOL)
        if m in rules or default is not DEFAULT_PROTOCOL:
            stmts.append(
                ast.PolicyBlock(
                    m.name,
                    default.value if default is not DEFAULT_PROTOCOL else None,
                    tuple(rules.get(m, ())),
                )
            )
    return ast.Document(tuple(stmts))


def print_snapshot(snap: NetworkSnapshot) -> str:
    return print_document(snapshot_document(snap))


def pretty(x: ast.Document | NetworkSnapshot) -> str:
    if isinstance(x, NetworkSnapshot):
        return print_snapshot(x)
    return print_document(x)
