from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netgen import random_network, reassign_batch
from pvn.assignments import Mode
from pvn.errors import BatchError, CycleDetected, UnknownMember
from pvn.evolution import (
    AddContent,
    AddMember,
    AddSubgroupEdge,
    CreateGroup,
    DiffEntry,
    DeleteGroup,
    Join,
    Leave,
    Move,
    RemoveContent,
    SetAssignment,
    apply_batch,
    diff_visibility,
    is_structural,
    whatif,
)
from pvn.model import GroupId, MemberId, member_closure
from pvn.resolution import is_visible

seeds = st.integers(0, 2**32 - 1)


def changes(diff):
    """Entries as (viewer, node name, old label, new label)."""
    return {(e.viewer, e.path.rsplit("/", 1)[-1], DiffEntry.label(e.old), DiffEntry.label(e.new)) for e in diff.entries}


def test_reassignment_applies(fig1):
    after = apply_batch(fig1, reassign_batch())
    assert after.version == fig1.version + 1
    assert {m.name for m in member_closure(after, "Yankees")} == {"Sue", "Bob", "Taylor", "Mike"}
    assert {m.name for m in member_closure(after, "PistonFans")} == {"JJ"}
    assert after.assignments == fig1.assignments


def test_reassignment_diff_paper_claims(fig1):
    d = whatif(fig1, reassign_batch(), "Nina")
    got = changes(d)
    assert ("Bob", "Blog", "visible", "invisible") in got
    assert ("Bob", "PistonPhotos", "visible", "invisible") in got
    assert ("Taylor", "Blog", "visible", "invisible") in got
    assert ("Mike", "NinaPhoto", "absent", "visible") in got
    assert not any(v == "Sue" for v, *_ in got)
    assert not any(e.viewer == "Taylor" and "/PersonalInfo" in e.path for e in d.entries)


def test_batch_atomicity(fig1):
    batch = [CreateGroup("A"), CreateGroup("B", ("A",)), AddSubgroupEdge("A", "B"), Join("Sue", "A")]
    with pytest.raises(BatchError) as exc:
        apply_batch(fig1, batch)
    err = exc.value
    assert err.index == 2 and err.position == 3
    assert isinstance(err.error, CycleDetected)
    assert err.snapshot is fig1
    assert GroupId("A") not in fig1.groups


def test_empty_batch(fig1):
    after = apply_batch(fig1, [])
    assert after.version == fig1.version + 1
    assert not diff_visibility(fig1, after, "Nina")
    assert not whatif(fig1, [], "Nina")


def test_diff_reflexive(fig1):
    assert diff_visibility(fig1, fig1, "Nina").entries == ()


def test_diff_unknown_owner(fig1):
    with pytest.raises(UnknownMember):
        diff_visibility(fig1, fig1, "Zoe")


def test_whatif_failure_propagates(fig1):
    with pytest.raises(BatchError):
        whatif(fig1, [Join("Zoe", "PistonFans")], "Nina")


def test_move(fig1):
    s = apply_batch(fig1, [CreateGroup("Yankees"), Move("Bob", "Yankees")])
    assert s.members[MemberId("Bob")] == {GroupId("Yankees")}
    s = apply_batch(fig1, [CreateGroup("Yankees"), Move("JJ", "Yankees", "PistonFans")])
    assert s.members[MemberId("JJ")] == {GroupId("Yankees"), GroupId("UMichStudents")}


def test_move_is_a_unit(fig1):
    with pytest.raises(BatchError):
        apply_batch(fig1, [Move("Bob", "Nowhere")])
    with pytest.raises(BatchError):
        apply_batch(fig1, [CreateGroup("Yankees"), Move("Bob", "Yankees", "UMichStudents")])


def test_delete_group_removes_implied_rights(fig1):
    s = apply_batch(fig1, [DeleteGroup("PistonFans")])
    blog = s.resolve_path("Nina", "/Everything/Blog")
    assert not is_visible(s, "Bob", "Nina", blog)
    assert not any(a.subject == GroupId("PistonFans") for a in s.assignments.values())


def test_content_mutations(fig1):
    s = apply_batch(
        fig1,
        [
            AddContent("Nina", "/Everything/Diary"),
            SetAssignment("Nina", "Sue", "/Everything/Diary", Mode.VISIBLE),
            RemoveContent("Nina", "/Everything/PersonalInfo"),
        ],
    )
    d = diff_visibility(fig1, s, "Nina")
    assert ("Sue", "/Everything/Diary", None, Mode.VISIBLE) in {(e.viewer, e.path, e.old, e.new) for e in d.entries}
    # losing a node you could see is reported as visible -> absent
    assert any(e.path == "/Everything/PersonalInfo/NinaPhoto" and e.old is Mode.VISIBLE and e.new is None for e in d.entries)


def test_is_structural():
    assert is_structural(Join("a", "b"))
    assert not is_structural(SetAssignment("a", "b", "/c", Mode.VISIBLE))


# -- properties -------------------------------------------------------------


def random_structural_batch(rng: random.Random, snap, n: int = 6):
    members = sorted(m.name for m in snap.members)
    groups = sorted(g.name for g in snap.groups if g.name != "all" and snap.groups[g].owner is None)
    out = []
    for i in range(n):
        kind = rng.randrange(5)
        if kind == 0 or not groups:
            name = f"new{i}"
            out.append(CreateGroup(name, tuple(rng.sample(groups, min(len(groups), rng.randint(0, 1))))))
            groups.append(name)
        elif kind == 1:
            out.append(Join(rng.choice(members), rng.choice(groups)))
        elif kind == 2:
            out.append(Leave(rng.choice(members), rng.choice(groups)))
        elif kind == 3:
            out.append(AddSubgroupEdge(rng.choice(groups), rng.choice(groups)))
        else:
            name = f"late{i}"
            out.append(AddMember(name))
            members.append(name)
    return out


def try_batch(snap, batch):
    try:
        return apply_batch(snap, batch)
    except BatchError:
        return None


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_batch_composition(seed):
    rng = random.Random(seed)
    s = random_network(rng)
    a, b = random_structural_batch(rng, s, 3), random_structural_batch(rng, s, 3)
    whole = try_batch(s, a + b)
    first = try_batch(s, a)
    stepwise = try_batch(first, b) if first is not None else None
    assert (whole is None) == (stepwise is None)
    if whole is not None:
        assert whole.groups == stepwise.groups and whole.members == stepwise.members
        assert whole.assignments == stepwise.assignments


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_structural_batches_keep_assignments(seed):
    rng = random.Random(seed)
    s = random_network(rng)
    after = try_batch(s, random_structural_batch(rng, s))
    if after is not None:
        assert after.assignments == s.assignments
