from __future__ import annotations

import random

import pytest

from pvn import model
from pvn.assignments import (
    Assignment,
    Mode,
    Protocol,
    assignments_of,
    clear_assignment,
    default_protocol,
    effective_protocol,
    set_assignment,
    set_default_protocol,
)
from pvn.errors import ForeignContent, ForeignSubjectHierarchy, NotFound, PvnError, UnknownGroup, UnknownMember
from pvn.model import ALL, GroupId, MemberId
from pvn.resolution import is_visible


@pytest.fixture
def pair():
    s = model.add_member(model.empty(), "Nina")
    s = model.add_member(s, "Bob")
    s = model.add_group(s, "Michiganders")
    s = model.set_membership(s, "Bob", "Michiganders", True)
    s = model.add_content(s, "Nina", s.root("Nina"), "Blog")
    return s


def test_protocol_parse():
    assert Protocol.parse("cautious") is Protocol.PESSIMISTIC
    assert Protocol.parse("pessimistic") is Protocol.PESSIMISTIC
    assert Protocol.parse("optimistic") is Protocol.OPTIMISTIC
    with pytest.raises(PvnError):
        Protocol.parse("lenient")


def test_set_and_replace(pair):
    blog = pair.resolve_path("Nina", "/Everything/Blog")
    nina = MemberId("Nina")
    s = set_assignment(pair, Assignment(nina, ALL, blog, Mode.VISIBLE))
    s = set_assignment(s, Assignment(nina, ALL, blog, Mode.INVISIBLE, Protocol.OPTIMISTIC))
    (a,) = assignments_of(s, "Nina")
    assert a.mode is Mode.INVISIBLE and a.protocol is Protocol.OPTIMISTIC
    assert s.version == pair.version + 2


def test_group_subject(pair):
    root = pair.root("Nina")
    s = set_assignment(pair, Assignment(MemberId("Nina"), GroupId("Michiganders"), root, Mode.INVISIBLE))
    assert len(assignments_of(s, "Nina")) == 1


def test_foreign_content(pair):
    blog = pair.resolve_path("Nina", "/Everything/Blog")
    with pytest.raises(ForeignContent):
        set_assignment(pair, Assignment(MemberId("Bob"), ALL, blog, Mode.VISIBLE))


def test_foreign_subject_hierarchy(pair):
    s = model.add_group(pair, "BobsPals", [], hierarchy_owner="Bob")
    with pytest.raises(ForeignSubjectHierarchy):
        set_assignment(s, Assignment(MemberId("Nina"), GroupId("BobsPals"), s.root("Nina"), Mode.VISIBLE))
    s = model.add_group(s, "NinasPals", [], hierarchy_owner="Nina")
    set_assignment(s, Assignment(MemberId("Nina"), GroupId("NinasPals"), s.root("Nina"), Mode.VISIBLE))


def test_unknown_ids(pair):
    root = pair.root("Nina")
    with pytest.raises(UnknownGroup):
        set_assignment(pair, Assignment(MemberId("Nina"), GroupId("Yankees"), root, Mode.VISIBLE))
    with pytest.raises(UnknownMember):
        set_assignment(pair, Assignment(MemberId("Nina"), MemberId("Zoe"), root, Mode.VISIBLE))


def test_clear(pair):
    blog = pair.resolve_path("Nina", "/Everything/Blog")
    nina = MemberId("Nina")
    s = set_assignment(pair, Assignment(nina, ALL, blog, Mode.VISIBLE))
    assert is_visible(s, "Bob", "Nina", blog)
    s = clear_assignment(s, nina, ALL, blog)
    assert not is_visible(s, "Bob", "Nina", blog)
    assert assignments_of(s, nina) == []
    with pytest.raises(NotFound):
        clear_assignment(s, nina, ALL, blog)


def test_clear_reverts_to_inherited(pair):
    blog = pair.resolve_path("Nina", "/Everything/Blog")
    nina = MemberId("Nina")
    s = set_assignment(pair, Assignment(nina, ALL, pair.root("Nina"), Mode.VISIBLE))
    s = set_assignment(s, Assignment(nina, ALL, blog, Mode.INVISIBLE))
    assert not is_visible(s, "Bob", "Nina", blog)
    s = clear_assignment(s, nina, ALL, blog)
    assert is_visible(s, "Bob", "Nina", blog)


def test_default_protocol(pair):
    assert default_protocol(pair, "Nina") is Protocol.PESSIMISTIC
    s = set_default_protocol(pair, "Nina", Protocol.OPTIMISTIC)
    assert default_protocol(s, "Nina") is Protocol.OPTIMISTIC
    a = Assignment(MemberId("Nina"), ALL, s.root("Nina"), Mode.VISIBLE)
    assert effective_protocol(s, a) is Protocol.OPTIMISTIC
    assert effective_protocol(s, Assignment(a.owner, ALL, a.content, Mode.VISIBLE, Protocol.PESSIMISTIC)) is Protocol.PESSIMISTIC
    with pytest.raises(UnknownMember):
        set_default_protocol(pair, "Zoe", Protocol.OPTIMISTIC)


def test_store_is_inert(pair):
    s = set_assignment(pair, Assignment(MemberId("Nina"), ALL, pair.root("Nina"), Mode.VISIBLE))
    assert s.groups == pair.groups and s.members == pair.members and s.contents == pair.contents


def test_key_uniqueness_and_replacement_random():
    s = model.add_member(model.empty(), "Nina")
    s = model.add_member(s, "Bob")
    for name in ("a", "b", "c"):
        s = model.add_content(s, "Nina", s.root("Nina"), name)
    nodes = s.content_nodes("Nina")
    subjects = [ALL, MemberId("Bob")]
    nina = MemberId("Nina")
    rng = random.Random(7)
    expected: dict = {}
    for _ in range(500):
        key = (rng.choice(subjects), rng.choice(nodes))
        if rng.random() < 0.3 and key in expected:
            s = clear_assignment(s, nina, *key)
            del expected[key]
        else:
            mode = rng.choice(list(Mode))
            s = set_assignment(s, Assignment(nina, key[0], key[1], mode))
            expected[key] = mode
        got = {(a.subject, a.content): a.mode for a in assignments_of(s, nina)}
        assert got == expected
        assert len(s.assignments) == len(expected)
