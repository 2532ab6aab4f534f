"""Effective visibility of an owner's content for a viewer.

Rights flow down derivation paths: chains that start at a root group (``all``
or a root of the owner's private hierarchy), descend through subgroups and end
at the viewer.  On one path the assignment whose subject sits closest to the
viewer wins, ties going to the deepest covering content node.  Verdicts of
different paths are then combined:

* no path has a winner            -> invisible
* every defined path agrees       -> that mode
* visible and invisible conflict  -> visible only if some visible winner uses
                                     the optimistic protocol

The implicit membership of a viewer in ``all`` is a path of its own only when
the viewer has no explicit system-group membership; otherwise ``all`` is
reached through those groups and a direct edge would be redundant.

Two resolvers share these semantics.  :func:`resolve_by_paths` enumerates every
path and is the reference.  :func:`resolve` walks upward from the viewer and
stops each branch at the first group holding an applicable assignment, with
per-(group, content) results memoized on the snapshot.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .assignments import Assignment, Mode, Protocol, default_protocol, effective_protocol
from .errors import ForeignContent
from .model import ALL, ContentId, GroupId, MemberId, MemberRef, NetworkSnapshot, Subject


class Combination(enum.Enum):
    OWNER_BYPASS = "owner-bypass"
    DEFAULT_DENY = "default-deny"
    AGREEMENT = "agreement"
    CONFLICT_OPTIMISTIC = "conflict-optimistic"
    CONFLICT_PESSIMISTIC = "conflict-pessimistic"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PathVerdict:
    path: tuple[Subject, ...]  # root group first, viewer last
    winner: Assignment | None
    mode: Mode | None  # None means undefined
    protocol: Protocol | None


@dataclass(frozen=True)
class ResolutionTrace:
    viewer: MemberId
    owner: MemberId
    content: ContentId
    verdict: Mode
    rule: Combination
    owner_bypass: bool = False
    # every derivation path; only filled by the path-enumerating resolver
    paths: tuple[PathVerdict, ...] = ()
    # distinct winning assignments with their effective protocol
    contributors: tuple[tuple[Assignment, Protocol], ...] = ()

    @property
    def visible(self) -> bool:
        return self.verdict is Mode.VISIBLE

    def deciding(self) -> tuple[Assignment, Protocol] | None:
        """A contributor that justifies the final verdict, if any."""
        for a, p in self.contributors:
            if a.mode is self.verdict and (self.rule is not Combination.CONFLICT_OPTIMISTIC or p is Protocol.OPTIMISTIC):
                return a, p
        return None


def subject_sort_key(s: Subject) -> tuple[int, str]:
    return (0 if isinstance(s, GroupId) else 1, s.name)


def _check_query(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef, content: ContentId):
    v = snap.require_member(viewer)
    o = snap.require_member(owner)
    snap.require_content(content)
    if content.owner != o:
        raise ForeignContent(f"{snap.content_path(content)} is not in {o.name}'s tree")
    return v, o


def viewer_parents(snap: NetworkSnapshot, owner: MemberId, viewer: MemberId) -> list[GroupId]:
    """Groups a viewer hangs from in the graph used for ``owner``'s rules."""
    out = []
    in_system = False
    for g in snap.members[viewer]:
        hier = snap.groups[g].owner
        if hier is None:
            in_system = True
            out.append(g)
        elif hier == owner:
            out.append(g)
    if not in_system:
        out.append(ALL)
    return out


def _owner_bypass(v: MemberId, o: MemberId, c: ContentId) -> ResolutionTrace:
    return ResolutionTrace(v, o, c, Mode.VISIBLE, Combination.OWNER_BYPASS, owner_bypass=True)


def _sorted_contributors(snap: NetworkSnapshot, winners: Iterable[Assignment]) -> tuple[tuple[Assignment, Protocol], ...]:
    ws = sorted(set(winners), key=lambda a: (subject_sort_key(a.subject), snap.content_path(a.content), a.mode.value))
    return tuple((a, effective_protocol(snap, a)) for a in ws)


# -- reference resolver -------------------------------------------------------


def derivation_paths(snap: NetworkSnapshot, owner: MemberRef, viewer: MemberRef) -> list[tuple[Subject, ...]]:
    """Every path from a root group down to ``viewer``, sorted by node names."""
    o = snap.require_member(owner)
    v = snap.require_member(viewer)
    found: list[tuple[Subject, ...]] = []

    def climb(trail: list[Subject]) -> None:
        head = trail[-1]
        parents = viewer_parents(snap, o, v) if head == v else snap.effective_parents(head)
        if not parents:
            found.append(tuple(reversed(trail)))
        for p in parents:
            climb(trail + [p])

    climb([v])
    found.sort(key=lambda p: [n.name for n in p])
    return found


def _path_verdict(snap, path: tuple[Subject, ...], candidates: list[Assignment], content: ContentId) -> PathVerdict:
    chain = snap.content_chain(content)
    depth = {cid: len(chain) - i for i, cid in enumerate(chain)}
    position = {s: i for i, s in enumerate(path)}
    applicable = [a for a in candidates if a.subject in position and a.content in depth]
    if not applicable:
        return PathVerdict(path, None, None, None)
    winner = max(applicable, key=lambda a: (position[a.subject], depth[a.content]))
    return PathVerdict(path, winner, winner.mode, effective_protocol(snap, winner))


def resolve_by_paths(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef, content: ContentId) -> ResolutionTrace:
    """Reference resolver: enumerate all derivation paths and combine their verdicts."""
    v, o = _check_query(snap, viewer, owner, content)
    if v == o:
        return _owner_bypass(v, o, content)
    candidates = [a for a in snap.assignments.values() if a.owner == o]
    verdicts = tuple(_path_verdict(snap, p, candidates, content) for p in derivation_paths(snap, o, v))

    defined = [pv for pv in verdicts if pv.mode is not None]
    has_visible = any(pv.mode is Mode.VISIBLE for pv in defined)
    has_invisible = any(pv.mode is Mode.INVISIBLE for pv in defined)
    if not defined:
        verdict, rule = Mode.INVISIBLE, Combination.DEFAULT_DENY
    elif not has_invisible:
        verdict, rule = Mode.VISIBLE, Combination.AGREEMENT
    elif not has_visible:
        verdict, rule = Mode.INVISIBLE, Combination.AGREEMENT
    elif any(pv.mode is Mode.VISIBLE and pv.protocol is Protocol.OPTIMISTIC for pv in defined):
        verdict, rule = Mode.VISIBLE, Combination.CONFLICT_OPTIMISTIC
    else:
        verdict, rule = Mode.INVISIBLE, Combination.CONFLICT_PESSIMISTIC
    return ResolutionTrace(
        v,
        o,
        content,
        verdict,
        rule,
        paths=verdicts,
        contributors=_sorted_contributors(snap, (pv.winner for pv in defined)),
    )


def explain(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef, content: ContentId) -> ResolutionTrace:
    """Full trace with every derivation path and its winner."""
    return resolve_by_paths(snap, viewer, owner, content)


# -- pruned resolver ----------------------------------------------------------


def combine(outcomes: Iterable[tuple[Mode, Protocol]]) -> tuple[Mode, Combination]:
    """Combine distinct (mode, effective protocol) outcomes of the defined paths."""
    modes = set()
    optimistic_grant = False
    for mode, protocol in outcomes:
        modes.add(mode)
        if mode is Mode.VISIBLE and protocol is Protocol.OPTIMISTIC:
            optimistic_grant = True
    if not modes:
        return Mode.INVISIBLE, Combination.DEFAULT_DENY
    if len(modes) == 1:
        return modes.pop(), Combination.AGREEMENT
    if optimistic_grant:
        return Mode.VISIBLE, Combination.CONFLICT_OPTIMISTIC
    return Mode.INVISIBLE, Combination.CONFLICT_PESSIMISTIC


class _OwnerIndex:
    """Per-snapshot, per-owner lookup tables for the pruned resolver."""

    def __init__(self, snap: NetworkSnapshot, owner: MemberId):
        self.snap = snap
        self.owner = owner
        self.default = default_protocol(snap, owner)
        self.rules: dict[Subject, dict[ContentId, Assignment]] = {}
        for a in snap.assignments.values():
            if a.owner == owner:
                self.rules.setdefault(a.subject, {})[a.content] = a
        self.chains: dict[ContentId, list[ContentId]] = {}
        self.frontiers: dict[tuple[GroupId, ContentId], frozenset[Assignment]] = {}

    def chain(self, c: ContentId) -> list[ContentId]:
        ch = self.chains.get(c)
        if ch is None:
            ch = self.chains[c] = self.snap.content_chain(c)
        return ch

    def winner(self, subject: Subject, c: ContentId) -> Assignment | None:
        rules = self.rules.get(subject)
        if rules:
            for cid in self.chain(c):
                a = rules.get(cid)
                if a is not None:
                    return a
        return None

    def frontier(self, g: GroupId, c: ContentId) -> frozenset[Assignment]:
        """Winners reachable from ``g`` upward, stopping at the first assigned group on each branch."""
        memo = self.frontiers
        if (g, c) in memo:
            return memo[(g, c)]
        parents_of = self.snap.effective_parents
        stack = [g]
        while stack:
            x = stack[-1]
            if (x, c) in memo:
                stack.pop()
                continue
            w = self.winner(x, c)
            if w is not None:
                memo[(x, c)] = frozenset((w,))
                stack.pop()
                continue
            parents = parents_of(x)
            pending = [p for p in parents if (p, c) not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[(x, c)] = frozenset().union(*(memo[(p, c)] for p in parents))
            stack.pop()
        return memo[(g, c)]

    def winners_for(self, viewer: MemberId, c: ContentId) -> frozenset[Assignment]:
        own = self.winner(viewer, c)
        if own is not None:
            # the viewer ends every path, so its own rule wins on all of them
            return frozenset((own,))
        out: frozenset[Assignment] = frozenset()
        for g in viewer_parents(self.snap, self.owner, viewer):
            out |= self.frontier(g, c)
        return out

    def verdict(self, viewer: MemberId, c: ContentId) -> tuple[Mode, Combination, frozenset[Assignment]]:
        winners = self.winners_for(viewer, c)
        default = self.default
        mode, rule = combine((a.mode, a.protocol or default) for a in winners)
        return mode, rule, winners


def _index(snap: NetworkSnapshot, owner: MemberId) -> _OwnerIndex:
    key = ("owner-index", owner)
    idx = snap._cache.get(key)
    if idx is None:
        idx = snap._cache[key] = _OwnerIndex(snap, owner)
    return idx


def resolve(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef, content: ContentId) -> ResolutionTrace:
    v, o = _check_query(snap, viewer, owner, content)
    if v == o:
        return _owner_bypass(v, o, content)
    mode, rule, winners = _index(snap, o).verdict(v, content)
    return ResolutionTrace(v, o, content, mode, rule, contributors=_sorted_contributors(snap, winners))


def is_visible(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef, content: ContentId) -> bool:
    v, o = _check_query(snap, viewer, owner, content)
    if v == o:
        return True
    return _index(snap, o).verdict(v, content)[0] is Mode.VISIBLE


def visible_set(snap: NetworkSnapshot, viewer: MemberRef, owner: MemberRef) -> frozenset[ContentId]:
    v = snap.require_member(viewer)
    o = snap.require_member(owner)
    nodes = snap.content_nodes(o)
    if v == o:
        return frozenset(nodes)
    idx = _index(snap, o)
    return frozenset(c for c in nodes if idx.verdict(v, c)[0] is Mode.VISIBLE)


def audience(snap: NetworkSnapshot, owner: MemberRef, content: ContentId) -> frozenset[MemberId]:
    o = snap.require_member(owner)
    _check_query(snap, o, o, content)
    idx = _index(snap, o)
    return frozenset(v for v in snap.members if v == o or idx.verdict(v, content)[0] is Mode.VISIBLE)
