"""Batched reorganization and visibility diffs between snapshots."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from . import assignments as store
from .assignments import Assignment, Mode, Protocol
from .errors import BatchError, PvnError, UnknownMember
from .model import Draft, MemberId, NetworkSnapshot, split_path
from .resolution import is_visible


# Mutations carry names and content paths rather than ids so they can be
# written before the things they reference exist (e.g. create then join).


@dataclass(frozen=True)
class AddMember:
    name: str


@dataclass(frozen=True)
class CreateGroup:
    name: str
    parents: tuple[str, ...] = ()
    owner: str | None = None


@dataclass(frozen=True)
class DeleteGroup:
    name: str


@dataclass(frozen=True)
class AddSubgroupEdge:
    child: str
    parent: str


@dataclass(frozen=True)
class RemoveSubgroupEdge:
    child: str
    parent: str


@dataclass(frozen=True)
class Join:
    member: str
    group: str


@dataclass(frozen=True)
class Leave:
    member: str
    group: str


@dataclass(frozen=True)
class Move:
    """Leave ``source`` (or, if omitted, every direct group in the target's hierarchy) and join ``target``."""

    member: str
    target: str
    source: str | None = None


@dataclass(frozen=True)
class AddContent:
    owner: str
    path: str


@dataclass(frozen=True)
class RemoveContent:
    owner: str
    path: str


@dataclass(frozen=True)
class SetAssignment:
    owner: str
    subject: str
    path: str
    mode: Mode
    protocol: Protocol | None = None


@dataclass(frozen=True)
class ClearAssignment:
    owner: str
    subject: str
    path: str


@dataclass(frozen=True)
class SetDefaultProtocol:
    owner: str
    protocol: Protocol


Mutation = Union[
    AddMember,
    CreateGroup,
    DeleteGroup,
    AddSubgroupEdge,
    RemoveSubgroupEdge,
    Join,
    Leave,
    Move,
    AddContent,
    RemoveContent,
    SetAssignment,
    ClearAssignment,
    SetDefaultProtocol,
]

STRUCTURAL = (AddMember, CreateGroup, DeleteGroup, AddSubgroupEdge, RemoveSubgroupEdge, Join, Leave, Move, AddContent, RemoveContent)


def _move(d: Draft, m: Move) -> None:
    member = d.require_member(m.member)
    target = d.require_group(m.target)
    if m.source is not None:
        sources = [d.require_group(m.source)]
    else:
        hier = d.hierarchy_owner(target)
        sources = sorted(g for g in d.members[member] if d.hierarchy_owner(g) == hier and g != target)
    for g in sources:
        d.set_membership(member, g, False)
    d.set_membership(member, target, True)


def apply_to_draft(d: Draft, m: Mutation) -> None:
    """Apply one mutation to a working copy.  Discard the draft if this raises."""
    if isinstance(m, AddMember):
        d.add_member(m.name)
    elif isinstance(m, CreateGroup):
        d.add_group(m.name, m.parents, m.owner)
    elif isinstance(m, DeleteGroup):
        d.delete_group(m.name)
    elif isinstance(m, AddSubgroupEdge):
        d.add_subgroup_edge(m.child, m.parent)
    elif isinstance(m, RemoveSubgroupEdge):
        d.remove_subgroup_edge(m.child, m.parent)
    elif isinstance(m, Join):
        d.set_membership(m.member, m.group, True)
    elif isinstance(m, Leave):
        d.set_membership(m.member, m.group, False)
    elif isinstance(m, Move):
        _move(d, m)
    elif isinstance(m, AddContent):
        segments = split_path(m.path)
        parent = d.resolve_path(m.owner, segments[:-1])
        d.add_content(m.owner, parent, segments[-1])
    elif isinstance(m, RemoveContent):
        d.remove_content(m.owner, d.resolve_path(m.owner, m.path))
    elif isinstance(m, SetAssignment):
        owner = d.require_member(m.owner)
        a = Assignment(owner, d.subject(m.subject), d.resolve_path(owner, m.path), m.mode, m.protocol)
        store.draft_set(d, a)
    elif isinstance(m, ClearAssignment):
        owner = d.require_member(m.owner)
        store.draft_clear(d, owner, d.subject(m.subject), d.resolve_path(owner, m.path))
    elif isinstance(m, SetDefaultProtocol):
        store.draft_set_default(d, m.owner, m.protocol)
    else:
        raise TypeError(f"not a mutation: {m!r}")


def apply_batch(snap: NetworkSnapshot, mutations: Sequence[Mutation]) -> NetworkSnapshot:
    """Apply all mutations atomically, yielding a snapshot one version newer.

    Raises :class:`BatchError` carrying the failing index and the untouched input snapshot.
    """
    d = snap.draft()
    for i, m in enumerate(mutations):
        try:
            apply_to_draft(d, m)
        except PvnError as exc:
            raise BatchError(i, exc, snap) from exc
    return d.freeze()


@dataclass(frozen=True)
class DiffEntry:
    viewer: str
    path: str
    old: Mode | None  # None: viewer or content absent on that side
    new: Mode | None

    @staticmethod
    def label(mode: Mode | None) -> str:
        return "absent" if mode is None else mode.value


@dataclass(frozen=True)
class VisibilityDiff:
    owner: str
    before_version: int
    after_version: int
    entries: tuple[DiffEntry, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _verdicts(snap: NetworkSnapshot, owner: MemberId) -> dict[tuple[str, str], Mode]:
    out = {}
    nodes = [(c, snap.content_path(c)) for c in snap.content_nodes(owner)]
    for v in snap.members:
        for c, path in nodes:
            out[(v.name, path)] = Mode.VISIBLE if is_visible(snap, v, owner, c) else Mode.INVISIBLE
    return out


def diff_visibility(before: NetworkSnapshot, after: NetworkSnapshot, owner: str | MemberId) -> VisibilityDiff:
    """Pointwise verdict changes for ``owner``'s content, matched by viewer name and content path.

    A viewer or node existing on one side only is reported as ``absent`` there;
    since an absent pair sees nothing, absent versus invisible is not a change.
    """
    o = owner if isinstance(owner, MemberId) else MemberId(owner)
    for snap in (before, after):
        if o not in snap.members:
            raise UnknownMember(f"unknown member {o.name!r}")
    old = _verdicts(before, o)
    new = _verdicts(after, o)
    entries = []
    for key in old.keys() | new.keys():
        a, b = old.get(key), new.get(key)
        if (a is Mode.VISIBLE) != (b is Mode.VISIBLE):
            entries.append(DiffEntry(key[0], key[1], a, b))
    entries.sort(key=lambda e: (e.viewer, e.path))
    return VisibilityDiff(o.name, before.version, after.version, tuple(entries))


def whatif(snap: NetworkSnapshot, mutations: Sequence[Mutation], owner: str | MemberId) -> VisibilityDiff:
    """Diff that ``mutations`` would cause for ``owner`` without committing them."""
    return diff_visibility(snap, apply_batch(snap, mutations), owner)


def is_structural(m: Mutation) -> bool:
    return isinstance(m, STRUCTURAL)

