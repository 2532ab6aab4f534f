"""Network structure: members, the group DAG, memberships and per-owner content trees.

Snapshots are immutable values.  Every operation takes a snapshot and returns a
new one whose version is one higher; a rejected operation raises and leaves the
input untouched.  Bulk edits go through :class:`Draft`, the mutable working copy
that the functional operations and the batch applier share.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Union

from .errors import (
    CannotModifyAll,
    CannotRemoveRoot,
    CrossHierarchy,
    CycleDetected,
    DuplicateName,
    DuplicateSiblingName,
    ForeignContent,
    InvalidName,
    NotFound,
    UnknownGroup,
    UnknownMember,
    UnknownPath,
)

if TYPE_CHECKING:
    from .assignments import Assignment, Protocol

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
ROOT_NAME = "Everything"
ALL_NAME = "all"


@dataclass(frozen=True, order=True)
class MemberId:
    name: str

    def __str__(self) -> str:
        return self.name

    def __hash__(self) -> int:
        return hash(self.name)


@dataclass(frozen=True, order=True)
class GroupId:
    name: str

    def __str__(self) -> str:
        return self.name

    def __hash__(self) -> int:
        return hash(self.name)


ALL = GroupId(ALL_NAME)

Subject = Union[GroupId, MemberId]


@dataclass(frozen=True, order=True)
class ContentId:
    owner: MemberId
    serial: int

    def __hash__(self) -> int:
        return hash((self.owner.name, self.serial))


@dataclass(frozen=True)
class Group:
    id: GroupId
    owner: MemberId | None  # None for system groups
    parents: frozenset[GroupId]  # declared parents only; see effective_parents

    @property
    def is_system(self) -> bool:
        return self.owner is None


@dataclass(frozen=True)
class ContentNode:
    id: ContentId
    name: str
    parent: ContentId | None
    children: tuple[ContentId, ...] = ()


MemberRef = Union[MemberId, str]
GroupRef = Union[GroupId, str]


def _member_id(ref: MemberRef) -> MemberId:
    return ref if isinstance(ref, MemberId) else MemberId(ref)


def _group_id(ref: GroupRef) -> GroupId:
    return ref if isinstance(ref, GroupId) else GroupId(ref)


class _StateView:
    """Read-side helpers common to snapshots and drafts."""

    members: Mapping[MemberId, frozenset[GroupId]]
    groups: Mapping[GroupId, Group]
    contents: Mapping[ContentId, ContentNode]
    roots: Mapping[MemberId, ContentId]
    assignments: Mapping[tuple, Assignment]
    default_protocols: Mapping[MemberId, Protocol]

    def require_member(self, ref: MemberRef) -> MemberId:
        m = _member_id(ref)
        if m not in self.members:
            raise UnknownMember(f"unknown member {m.name!r}")
        return m

    def require_group(self, ref: GroupRef) -> GroupId:
        g = _group_id(ref)
        if g not in self.groups:
            raise UnknownGroup(f"unknown group {g.name!r}")
        return g

    def require_content(self, cid: ContentId) -> ContentNode:
        node = self.contents.get(cid)
        if node is None:
            raise UnknownPath(f"unknown content node {cid}")
        return node

    def member(self, name: str) -> MemberId:
        return self.require_member(name)

    def group(self, name: str) -> GroupId:
        return self.require_group(name)

    def subject(self, name: str) -> Subject:
        """Look a rule subject up by name: ``all``, a group, or a member."""
        if GroupId(name) in self.groups:
            return GroupId(name)
        if MemberId(name) in self.members:
            return MemberId(name)
        raise UnknownGroup(f"unknown group or member {name!r}")

    def effective_parents(self, g: GroupId) -> frozenset[GroupId]:
        info = self.groups[g]
        if info.parents or g == ALL or not info.is_system:
            return info.parents
        return frozenset((ALL,))

    def ancestors(self, g: GroupId) -> set[GroupId]:
        """Strict ancestors of ``g`` in the group DAG."""
        seen: set[GroupId] = set()
        stack = list(self.effective_parents(g))
        while stack:
            p = stack.pop()
            if p not in seen:
                seen.add(p)
                stack.extend(self.effective_parents(p))
        return seen

    def root(self, owner: MemberRef) -> ContentId:
        return self.roots[self.require_member(owner)]

    def content_path(self, cid: ContentId) -> str:
        names = []
        node: ContentNode | None = self.require_content(cid)
        while node is not None:
            names.append(node.name)
            node = self.contents[node.parent] if node.parent is not None else None
        return "/" + "/".join(reversed(names))

    def content_chain(self, cid: ContentId) -> list[ContentId]:
        """The node followed by its ancestors, deepest first."""
        chain = []
        cur: ContentId | None = cid
        while cur is not None:
            chain.append(cur)
            cur = self.contents[cur].parent
        return chain

    def subtree(self, cid: ContentId) -> list[ContentId]:
        out = []
        stack = [cid]
        while stack:
            c = stack.pop()
            out.append(c)
            stack.extend(reversed(self.contents[c].children))
        return out

    def content_nodes(self, owner: MemberRef) -> list[ContentId]:
        """All of an owner's content nodes in depth-first order from the root."""
        return self.subtree(self.root(owner))

    def resolve_path(self, owner: MemberRef, path: str | Iterable[str]) -> ContentId:
        o = self.require_member(owner)
        segments = split_path(path) if isinstance(path, str) else list(path)
        root = self.contents[self.roots[o]]
        if not segments or segments[0] != root.name:
            raise UnknownPath(f"no content {format_path(segments)} in {o.name}'s tree")
        node = root
        for seg in segments[1:]:
            for child in node.children:
                if self.contents[child].name == seg:
                    node = self.contents[child]
                    break
            else:
                raise UnknownPath(f"no content {format_path(segments)} in {o.name}'s tree")
        return node.id

    def direct_groups(self, m: MemberRef) -> frozenset[GroupId]:
        return self.members[self.require_member(m)]

    def hierarchy_owner(self, g: GroupId) -> MemberId | None:
        return self.groups[g].owner


def split_path(path: str) -> list[str]:
    if not path.startswith("/"):
        raise UnknownPath(f"content path must start with '/': {path!r}")
    segments = path[1:].split("/")
    if any(not s for s in segments):
        raise UnknownPath(f"malformed content path {path!r}")
    return segments


def format_path(segments: Iterable[str]) -> str:
    return "/" + "/".join(segments)


@dataclass(frozen=True, eq=False)
class NetworkSnapshot(_StateView):
    version: int
    members: Mapping[MemberId, frozenset[GroupId]]
    groups: Mapping[GroupId, Group]
    contents: Mapping[ContentId, ContentNode]
    roots: Mapping[MemberId, ContentId]
    assignments: Mapping[tuple, Assignment]
    default_protocols: Mapping[MemberId, Protocol]
    next_serial: int
    # derived data memoized per snapshot (closures, resolution indexes)
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def empty(cls) -> NetworkSnapshot:
        return cls(
            version=0,
            members=MappingProxyType({}),
            groups=MappingProxyType({ALL: Group(ALL, None, frozenset())}),
            contents=MappingProxyType({}),
            roots=MappingProxyType({}),
            assignments=MappingProxyType({}),
            default_protocols=MappingProxyType({}),
            next_serial=0,
        )

    def draft(self) -> Draft:
        return Draft(self)

    def children_index(self) -> Mapping[GroupId, frozenset[GroupId]]:
        idx = self._cache.get("children")
        if idx is None:
            acc: dict[GroupId, set[GroupId]] = {g: set() for g in self.groups}
            for g in self.groups:
                for p in self.effective_parents(g):
                    acc[p].add(g)
            idx = {g: frozenset(cs) for g, cs in acc.items()}
            self._cache["children"] = idx
        return idx

    def descendants(self, g: GroupId) -> set[GroupId]:
        """``g`` together with every transitive subgroup."""
        children = self.children_index()
        seen = {g}
        stack = [g]
        while stack:
            for c in children[stack.pop()]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen


class Draft(_StateView):
    """Mutable working copy of a snapshot.

    Methods validate fully before touching state, so a raised error leaves the
    draft as it was.
    """

    def __init__(self, snap: NetworkSnapshot):
        self.base_version = snap.version
        self.members = dict(snap.members)
        self.groups = dict(snap.groups)
        self.contents = dict(snap.contents)
        self.roots = dict(snap.roots)
        self.assignments = dict(snap.assignments)
        self.default_protocols = dict(snap.default_protocols)
        self.next_serial = snap.next_serial

    def freeze(self, version: int | None = None) -> NetworkSnapshot:
        return NetworkSnapshot(
            version=self.base_version + 1 if version is None else version,
            members=MappingProxyType(dict(self.members)),
            groups=MappingProxyType(dict(self.groups)),
            contents=MappingProxyType(dict(self.contents)),
            roots=MappingProxyType(dict(self.roots)),
            assignments=MappingProxyType(dict(self.assignments)),
            default_protocols=MappingProxyType(dict(self.default_protocols)),
            next_serial=self.next_serial,
        )

    def _check_new_name(self, name: str, kind: str) -> None:
        if not isinstance(name, str) or not NAME_RE.match(name):
            raise InvalidName(f"invalid {kind} name {name!r}")
        if name == ALL_NAME:
            raise DuplicateName(f"'{ALL_NAME}' is reserved for the universal group")
        # members and groups share one namespace so rule subjects stay unambiguous
        if MemberId(name) in self.members:
            raise DuplicateName(f"name {name!r} already used by a member")
        if GroupId(name) in self.groups:
            raise DuplicateName(f"name {name!r} already used by a group")

    def _new_content_id(self, owner: MemberId) -> ContentId:
        cid = ContentId(owner, self.next_serial)
        self.next_serial += 1
        return cid

    # -- members and groups -------------------------------------------------

    def add_member(self, name: str) -> MemberId:
        self._check_new_name(name, "member")
        m = MemberId(name)
        root = self._new_content_id(m)
        self.members[m] = frozenset()
        self.contents[root] = ContentNode(root, ROOT_NAME, None)
        self.roots[m] = root
        return m

    def _check_same_hierarchy(self, child: GroupId, parent: GroupId, child_owner: MemberId | None) -> None:
        parent_owner = self.groups[parent].owner
        if parent_owner != child_owner:
            where = lambda o: "the system hierarchy" if o is None else f"{o.name}'s hierarchy"  # noqa: E731
            raise CrossHierarchy(
                f"{child.name} belongs to {where(child_owner)} but {parent.name} belongs to {where(parent_owner)}"
            )

    def add_group(self, name: str, parents: Iterable[GroupRef] = (), owner: MemberRef | None = None) -> GroupId:
        self._check_new_name(name, "group")
        o = self.require_member(owner) if owner is not None else None
        g = GroupId(name)
        ps = frozenset(self.require_group(p) for p in parents)
        for p in ps:
            self._check_same_hierarchy(g, p, o)
        self.groups[g] = Group(g, o, ps)
        return g

    def add_subgroup_edge(self, child: GroupRef, parent: GroupRef) -> None:
        c = self.require_group(child)
        p = self.require_group(parent)
        if c == p:
            raise CycleDetected(c.name, p.name)
        self._check_same_hierarchy(c, p, self.groups[c].owner)
        if p in self.effective_parents(c):
            return
        if c in self.ancestors(p):
            raise CycleDetected(c.name, p.name)
        info = self.groups[c]
        self.groups[c] = Group(c, info.owner, info.parents | {p})

    def remove_subgroup_edge(self, child: GroupRef, parent: GroupRef) -> None:
        c = self.require_group(child)
        p = self.require_group(parent)
        info = self.groups[c]
        if p not in info.parents:
            if p == ALL and p in self.effective_parents(c):
                raise CannotModifyAll(f"{c.name} is attached to 'all' implicitly; add another parent instead")
            raise NotFound(f"no subgroup edge {c.name} < {p.name}")
        self.groups[c] = Group(c, info.owner, info.parents - {p})

    def delete_group(self, group: GroupRef) -> None:
        g = self.require_group(group)
        if g == ALL:
            raise CannotModifyAll("the universal group cannot be deleted")
        del self.groups[g]
        for other, info in list(self.groups.items()):
            if g in info.parents:
                # orphaned system groups fall back to the implicit 'all' parent
                self.groups[other] = Group(other, info.owner, info.parents - {g})
        for m, gs in list(self.members.items()):
            if g in gs:
                self.members[m] = gs - {g}
        for key in [k for k, a in self.assignments.items() if a.subject == g]:
            del self.assignments[key]

    def set_membership(self, member: MemberRef, group: GroupRef, present: bool) -> None:
        m = self.require_member(member)
        g = self.require_group(group)
        if g == ALL:
            raise CannotModifyAll("membership in 'all' is implicit and cannot be changed")
        current = self.members[m]
        if present:
            self.members[m] = current | {g}
        elif g in current:
            self.members[m] = current - {g}
        else:
            raise NotFound(f"{m.name} is not a direct member of {g.name}")

    # -- content ------------------------------------------------------------

    def add_content(self, owner: MemberRef, parent: ContentId, name: str) -> ContentId:
        o = self.require_member(owner)
        parent_node = self.require_content(parent)
        if parent.owner != o:
            raise ForeignContent(f"content {self.content_path(parent)} is not in {o.name}'s tree")
        if not isinstance(name, str) or not NAME_RE.match(name):
            raise InvalidName(f"invalid content name {name!r}")
        if any(self.contents[c].name == name for c in parent_node.children):
            raise DuplicateSiblingName(f"{self.content_path(parent)} already has a child named {name!r}")
        cid = self._new_content_id(o)
        self.contents[cid] = ContentNode(cid, name, parent)
        self.contents[parent] = ContentNode(
            parent, parent_node.name, parent_node.parent, parent_node.children + (cid,)
        )
        return cid

    def remove_content(self, owner: MemberRef, node: ContentId) -> None:
        o = self.require_member(owner)
        info = self.require_content(node)
        if node.owner != o:
            raise ForeignContent(f"content {self.content_path(node)} is not in {o.name}'s tree")
        if info.parent is None:
            raise CannotRemoveRoot(f"cannot remove the root of {o.name}'s tree")
        doomed = set(self.subtree(node))
        parent = self.contents[info.parent]
        self.contents[info.parent] = ContentNode(
            parent.id, parent.name, parent.parent, tuple(c for c in parent.children if c != node)
        )
        for c in doomed:
            del self.contents[c]
        for key in [k for k, a in self.assignments.items() if a.content in doomed]:
            del self.assignments[key]


def _edit(snap: NetworkSnapshot, op, *args) -> NetworkSnapshot:
    d = Draft(snap)
    op(d, *args)
    return d.freeze()


def empty() -> NetworkSnapshot:
    return NetworkSnapshot.empty()


def add_member(snap: NetworkSnapshot, name: str) -> NetworkSnapshot:
    return _edit(snap, Draft.add_member, name)


def add_group(
    snap: NetworkSnapshot,
    name: str,
    parents: Iterable[GroupRef] = (),
    hierarchy_owner: MemberRef | None = None,
) -> NetworkSnapshot:
    return _edit(snap, Draft.add_group, name, tuple(parents), hierarchy_owner)


def add_subgroup_edge(snap: NetworkSnapshot, child: GroupRef, parent: GroupRef) -> NetworkSnapshot:
    return _edit(snap, Draft.add_subgroup_edge, child, parent)


def remove_subgroup_edge(snap: NetworkSnapshot, child: GroupRef, parent: GroupRef) -> NetworkSnapshot:
    return _edit(snap, Draft.remove_subgroup_edge, child, parent)


def delete_group(snap: NetworkSnapshot, group: GroupRef) -> NetworkSnapshot:
    return _edit(snap, Draft.delete_group, group)


def set_membership(snap: NetworkSnapshot, member: MemberRef, group: GroupRef, present: bool) -> NetworkSnapshot:
    return _edit(snap, Draft.set_membership, member, group, present)


def add_content(snap: NetworkSnapshot, owner: MemberRef, parent: ContentId, name: str) -> NetworkSnapshot:
    return _edit(snap, Draft.add_content, owner, parent, name)


def remove_content(snap: NetworkSnapshot, owner: MemberRef, node: ContentId) -> NetworkSnapshot:
    return _edit(snap, Draft.remove_content, owner, node)


def member_closure(snap: NetworkSnapshot, group: GroupRef) -> frozenset[MemberId]:
    """Every member of ``group`` directly or through a transitive subgroup."""
    g = snap.require_group(group)
    if g == ALL:
        return frozenset(snap.members)
    cache = snap._cache.setdefault("closure", {})
    found = cache.get(g)
    if found is None:
        desc = snap.descendants(g)
        found = frozenset(m for m, gs in snap.members.items() if not gs.isdisjoint(desc))
        cache[g] = found
    return found


def resolve_path(snap: NetworkSnapshot, owner: MemberRef, path: str) -> ContentId:
    return snap.resolve_path(owner, path)


def iter_edges(snap: NetworkSnapshot) -> Iterator[tuple[GroupId, GroupId]]:
    """Effective (child, parent) subgroup edges, implicit 'all' parents included."""
    for g in snap.groups:
        for p in snap.effective_parents(g):
            yield g, p
