import random

import pytest

from synthlab import (
    add_note,
    assign,
    backlinks,
    create_group,
    create_session,
    link_note,
    merge,
    remove,
    replay,
    serialize_session,
    transfer,
)
from synthlab.errors import (
    EmptyLabel,
    EmptyNote,
    GroupArchived,
    NeedTwoGroups,
    NotAMember,
    SameGroup,
    UnknownAnnotation,
    UnknownEntity,
    UnknownGroup,
)

CORPUS_IDS = [
    "k3VbNq8wRA", "m9PdXs2kQB", "p4KfYt6nRC", "q7LgZu1sRD", "s2MhAv5tRE",
    "u6NjBw9vRF", "v1PkCx4wRG", "w8QlDy7xRH", "x3RmEz2yRJ", "y9SnFa6zRK",
    "z5ToGb3aRL", "b2UpHc8bRM",
]


# -- group creation ------------------------------------------------------------

def test_create_group_assigns_monotonic_ids(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two", description="second")
    assert (g1.id, g2.id) == ("grp-000001", "grp-000002")
    assert g2.description == "second"
    assert not g1.archived and g1.member_ids == ()


def test_create_group_rejects_blank_label(session):
    with pytest.raises(EmptyLabel):
        create_group(session, "   ")


# -- membership ------------------------------------------------------------------

def test_assign_remove_round_trip(session):
    g = create_group(session, "g")
    assign(session, "k3VbNq8wRA", g.id)
    assert session.groups[g.id].member_ids == ("k3VbNq8wRA",)
    # re-assign is a no-op, not an error and not an event
    before = session.last_seq
    assign(session, "k3VbNq8wRA", g.id)
    assert session.last_seq == before
    remove(session, "k3VbNq8wRA", g.id)
    assert session.groups[g.id].member_ids == ()


def test_assign_preserves_order(session):
    g = create_group(session, "g")
    for ann_id in ("z5ToGb3aRL", "k3VbNq8wRA", "q7LgZu1sRD"):
        assign(session, ann_id, g.id)
    assert session.groups[g.id].member_ids == ("z5ToGb3aRL", "k3VbNq8wRA", "q7LgZu1sRD")


def test_membership_error_paths(session):
    g = create_group(session, "g")
    with pytest.raises(UnknownAnnotation):
        assign(session, "ghost", g.id)
    with pytest.raises(UnknownGroup):
        assign(session, "k3VbNq8wRA", "grp-999999")
    with pytest.raises(NotAMember):
        remove(session, "k3VbNq8wRA", g.id)


# -- transfer ----------------------------------------------------------------------

def test_transfer_moves_atomically(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    assign(session, "k3VbNq8wRA", g1.id)
    before = session.last_seq
    source, target = transfer(session, "k3VbNq8wRA", g1.id, g2.id)
    assert session.last_seq == before + 1  # one event, not remove+add
    assert source.member_ids == ()
    assert target.member_ids == ("k3VbNq8wRA",)


def test_transfer_to_group_already_containing_is_clean_move(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    assign(session, "k3VbNq8wRA", g1.id)
    assign(session, "k3VbNq8wRA", g2.id)
    transfer(session, "k3VbNq8wRA", g1.id, g2.id)
    assert session.groups[g1.id].member_ids == ()
    assert session.groups[g2.id].member_ids == ("k3VbNq8wRA",)


def test_transfer_error_paths(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    with pytest.raises(SameGroup):
        transfer(session, "k3VbNq8wRA", g1.id, g1.id)
    with pytest.raises(NotAMember):
        transfer(session, "k3VbNq8wRA", g1.id, g2.id)
    with pytest.raises(UnknownGroup):
        transfer(session, "k3VbNq8wRA", g1.id, "grp-999999")


# -- merge -------------------------------------------------------------------------

def test_merge_union_order_first_occurrence_wins(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    for ann_id in ("k3VbNq8wRA", "m9PdXs2kQB"):
        assign(session, ann_id, g1.id)
    for ann_id in ("m9PdXs2kQB", "q7LgZu1sRD", "k3VbNq8wRA"):
        assign(session, ann_id, g2.id)
    merged = merge(session, [g1.id, g2.id], "both")
    assert merged.member_ids == ("k3VbNq8wRA", "m9PdXs2kQB", "q7LgZu1sRD")
    assert merged.parent_group_ids == (g1.id, g2.id)
    assert session.groups[g1.id].archived
    assert session.groups[g2.id].archived
    # parents keep their members for provenance
    assert session.groups[g1.id].member_ids == ("k3VbNq8wRA", "m9PdXs2kQB")


def test_merge_depends_on_parent_order(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    assign(session, "k3VbNq8wRA", g1.id)
    assign(session, "m9PdXs2kQB", g2.id)
    merged = merge(session, [g2.id, g1.id], "swapped")
    assert merged.member_ids == ("m9PdXs2kQB", "k3VbNq8wRA")


def test_merge_of_three(session):
    groups = [create_group(session, f"g{i}") for i in range(3)]
    for group, ann_id in zip(groups, CORPUS_IDS):
        assign(session, ann_id, group.id)
    merged = merge(session, [g.id for g in groups], "all")
    assert merged.member_ids == tuple(CORPUS_IDS[:3])


def test_merged_group_is_usable_and_parents_frozen(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    merged = merge(session, [g1.id, g2.id], "both")
    assign(session, "k3VbNq8wRA", merged.id)
    with pytest.raises(GroupArchived):
        assign(session, "k3VbNq8wRA", g1.id)
    with pytest.raises(GroupArchived):
        transfer(session, "k3VbNq8wRA", merged.id, g1.id)
    with pytest.raises(GroupArchived):
        merge(session, [merged.id, g1.id], "again")


def test_merge_error_paths(session):
    g1 = create_group(session, "one")
    with pytest.raises(NeedTwoGroups):
        merge(session, [g1.id], "solo")
    with pytest.raises(NeedTwoGroups):
        merge(session, [g1.id, g1.id], "dupes")
    g2 = create_group(session, "two")
    with pytest.raises(EmptyLabel):
        merge(session, [g1.id, g2.id], " ")
    with pytest.raises(UnknownGroup):
        merge(session, [g1.id, "grp-999999"], "x")


# -- notes and backlinks --------------------------------------------------------------

def test_note_links_are_bidirectional(session):
    g = create_group(session, "g")
    note = add_note(session, "watch this", linked_annotation_ids=["k3VbNq8wRA"], linked_group_ids=[g.id])
    assert [b.id for b in backlinks(session, "k3VbNq8wRA")] == [note.id]
    assert [b.id for b in backlinks(session, g.id)] == [note.id]
    assert note.linked_ids == ("k3VbNq8wRA", g.id)


def test_note_text_is_immutable_but_links_grow(session):
    note = add_note(session, "fixed text", linked_annotation_ids=["k3VbNq8wRA"])
    updated = link_note(session, note.id, annotation_ids=["m9PdXs2kQB", "k3VbNq8wRA"])
    assert updated.text == "fixed text"
    assert updated.linked_annotation_ids == ("k3VbNq8wRA", "m9PdXs2kQB")
    # linking nothing new appends no event
    before = session.last_seq
    assert link_note(session, note.id, annotation_ids=["k3VbNq8wRA"]) == updated
    assert session.last_seq == before


def test_note_error_paths(session):
    with pytest.raises(EmptyNote):
        add_note(session, "   ")
    with pytest.raises(UnknownEntity):
        add_note(session, "x", linked_annotation_ids=["ghost"])
    with pytest.raises(UnknownEntity):
        link_note(session, "note-999999", annotation_ids=["k3VbNq8wRA"])


def test_notes_may_link_archived_groups(session):
    g1 = create_group(session, "one")
    g2 = create_group(session, "two")
    merge(session, [g1.id, g2.id], "both")
    note = add_note(session, "about the old group", linked_group_ids=[g1.id])
    assert [b.id for b in backlinks(session, g1.id)] == [note.id]


def test_backlinks_unknown_entity(session):
    with pytest.raises(UnknownEntity):
        backlinks(session, "nope")


def test_backlinks_sorted_by_creation(session):
    for i in range(3):
        add_note(session, f"note {i}", linked_annotation_ids=["k3VbNq8wRA"])
    assert [b.id for b in backlinks(session, "k3VbNq8wRA")] == [
        "note-000001", "note-000002", "note-000003",
    ]


# -- random walks against a naive model ------------------------------------------------

class NaiveModel:
    """Plain dict/list mirror of group membership semantics."""

    def __init__(self, ann_ids):
        self.anns = list(ann_ids)
        self.members = {}   # gid -> list of ann ids
        self.archived = set()
        self.n = 0

    def create(self):
        self.n += 1
        gid = f"grp-{self.n:06d}"
        self.members[gid] = []
        return gid

    def active(self):
        return [g for g in self.members if g not in self.archived]

    def assign(self, ann, gid):
        if ann not in self.members[gid]:
            self.members[gid].append(ann)

    def remove(self, ann, gid):
        self.members[gid].remove(ann)

    def transfer(self, ann, src, dst):
        self.members[src].remove(ann)
        if ann not in self.members[dst]:
            self.members[dst].append(ann)

    def merge(self, gids):
        out = []
        for gid in gids:
            for ann in self.members[gid]:
                if ann not in out:
                    out.append(ann)
            self.archived.add(gid)
        new = self.create()
        self.members[new] = out
        return new


def run_random_walk(seed, session):
    rng = random.Random(seed)
    model = NaiveModel(CORPUS_IDS)
    for _ in range(rng.randint(10, 60)):
        ops = ["create", "assign", "remove", "transfer", "merge"]
        op = rng.choice(ops)
        active = model.active()
        if op == "create" or not active:
            gid = model.create()
            created = create_group(session, f"group {gid}")
            assert created.id == gid
        elif op == "assign":
            gid = rng.choice(active)
            ann = rng.choice(model.anns)
            model.assign(ann, gid)
            assign(session, ann, gid)
        elif op == "remove":
            gid = rng.choice(active)
            if model.members[gid]:
                ann = rng.choice(model.members[gid])
                model.remove(ann, gid)
                remove(session, ann, gid)
        elif op == "transfer":
            candidates = [g for g in active if model.members[g]]
            if len(active) >= 2 and candidates:
                src = rng.choice(candidates)
                dst = rng.choice([g for g in active if g != src])
                ann = rng.choice(model.members[src])
                model.transfer(ann, src, dst)
                transfer(session, ann, src, dst)
        elif op == "merge":
            if len(active) >= 2:
                k = rng.randint(2, min(3, len(active)))
                gids = rng.sample(active, k)
                want = model.merge(gids)
                got = merge(session, gids, f"merge {want}")
                assert got.id == want
    return model


@pytest.mark.parametrize("seed", range(25))
def test_random_walks_match_naive_model(seed, clock, corpus):
    session = create_session("ses-000001", "walker", clock=clock)
    from synthlab import ingest_into_session

    ingest_into_session(session, list(corpus), origin="fixture")
    model = run_random_walk(seed, session)

    assert set(session.groups) == set(model.members)
    for gid, want in model.members.items():
        assert list(session.groups[gid].member_ids) == want, gid
        assert session.groups[gid].archived == (gid in model.archived)

    # no annotation is ever lost or duplicated within a group; replay agrees
    replayed = replay(session.event_log)
    assert serialize_session(replayed) == serialize_session(session)
