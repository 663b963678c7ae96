"""Permission resolution: scope, specificity, deny precedence, defaults.

The randomized section rebuilds every decision with a literal transcription
of the resolution rules, working from the raw grant rows and a reachability
oracle for collection membership, then compares it against the engine for
every (agent, ability, target, piece) combination in play.
"""

from __future__ import annotations

import random
from typing import Any

import pytest

from itemgraph import ContentEngine, PermissionGrant
from itemgraph.errors import (
    InvalidPieceAbility,
    PermissionDenied,
    UnknownAbility,
    UnknownGrant,
    UnknownSubject,
)


@pytest.fixture
def world(engine, admin):
    """A small installation: two more people, a doc each, one collection."""
    ada = engine.create_item(admin, "Person", {"first_name": "Ada"}).id
    bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
    engine.grant(admin, PermissionGrant(
        ability="create", effect="allow", subject_kind="everyone",
        target_type="TextDocument"))
    doc = engine.create_item(ada, "TextDocument", {"body": "ada's words"}).id
    coll = engine.create_item(admin, "Collection", {"description": "team"}).id
    return {"engine": engine, "admin": admin, "ada": ada, "bob": bob, "doc": doc, "coll": coll}


class TestDefaults:
    def test_creator_holds_all_abilities(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        for ability in ("view", "edit", "comment_on", "deactivate", "destroy", "modify_permissions"):
            assert e.can(ada, ability, doc)

    def test_everyone_else_holds_none(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        for ability in ("view", "edit", "comment_on", "deactivate", "destroy", "modify_permissions"):
            assert not e.can(bob, ability, doc)
        assert not e.can(None, "view", doc)

    def test_admin_bypasses_everything(self, world):
        e, admin, doc = world["engine"], world["admin"], world["doc"]
        assert e.can(admin, "edit", doc)
        e.grant(world["ada"], PermissionGrant(
            ability="edit", effect="deny", subject_kind="everyone", target_item=doc))
        assert e.can(admin, "edit", doc)


class TestPrecedence:
    def test_item_grant_beats_default(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        assert e.can(bob, "view", doc)

    def test_deny_beats_allow_at_same_level(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="agent", subject_id=bob,
            target_item=doc))
        assert not e.can(bob, "view", doc)

    def test_agent_level_beats_everyone_level(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="everyone", target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        assert e.can(bob, "view", doc)
        assert not e.can(None, "view", doc)

    def test_collection_level_between_agent_and_everyone(self, world):
        e, bob, doc, coll = world["engine"], world["bob"], world["doc"], world["coll"]
        e.add_member(world["admin"], coll, bob)
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="collection", subject_id=coll,
            target_item=doc))
        assert not e.can(bob, "view", doc)  # collection deny outranks everyone allow
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        assert e.can(bob, "view", doc)  # agent allow outranks collection deny

    def test_piece_scope_beats_item_scope(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="everyone", target_item=doc,
            target_piece="body"))
        assert e.can(bob, "view", doc)
        assert not e.can(bob, "view", doc, piece="body")
        assert e.can(bob, "view", doc, piece="description")

    def test_piece_allow_under_item_deny(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="everyone", target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc,
            target_piece="description"))
        assert not e.can(bob, "view", doc)
        assert e.can(bob, "view", doc, piece="description")
        assert not e.can(bob, "view", doc, piece="body")

    def test_collection_subject_matches_indirect_members(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        outer = e.create_item(world["admin"], "Collection", {}).id
        inner = e.create_item(world["admin"], "Collection", {}).id
        e.add_member(world["admin"], outer, inner)
        e.add_member(world["admin"], inner, bob)
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="collection", subject_id=outer,
            target_item=doc))
        assert e.can(bob, "view", doc)

    def test_deactivated_collection_conveys_nothing(self, world):
        e, bob, doc, coll = world["engine"], world["bob"], world["doc"], world["coll"]
        e.add_member(world["admin"], coll, bob)
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="collection", subject_id=coll,
            target_item=doc))
        assert e.can(bob, "view", doc)
        e.deactivate(world["admin"], coll)
        assert not e.can(bob, "view", doc)
        e.reactivate(world["admin"], coll)
        assert e.can(bob, "view", doc)

    def test_revocation_restores_default(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        gid = e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        assert e.can(bob, "view", doc)
        e.revoke(world["ada"], gid)
        assert not e.can(bob, "view", doc)


class TestVisiblePieces:
    def test_creator_sees_all_in_declaration_order(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        assert e.permissions.visible_pieces(ada, doc) == ["description", "creator", "body"]

    def test_non_viewer_sees_nothing(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        assert e.permissions.visible_pieces(bob, doc) == []

    def test_piece_deny_hides_one_column(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        e.grant(world["ada"], PermissionGrant(
            ability="view", effect="deny", subject_kind="everyone", target_item=doc,
            target_piece="body"))
        assert e.permissions.visible_pieces(bob, doc) == ["description", "creator"]


class TestGrantManagement:
    def test_only_permission_holders_may_grant(self, world):
        e, bob, doc = world["engine"], world["bob"], world["doc"]
        with pytest.raises(PermissionDenied):
            e.grant(bob, PermissionGrant(
                ability="view", effect="allow", subject_kind="agent", subject_id=bob,
                target_item=doc))

    def test_modify_permissions_grant_delegates(self, world):
        e, ada, bob, doc = world["engine"], world["ada"], world["bob"], world["doc"]
        e.grant(ada, PermissionGrant(
            ability="modify_permissions", effect="allow", subject_kind="agent",
            subject_id=bob, target_item=doc))
        gid = e.grant(bob, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        assert e.can(None, "view", doc)
        e.revoke(bob, gid)

    def test_anonymous_never_grants_by_default(self, world):
        e, doc = world["engine"], world["doc"]
        with pytest.raises(PermissionDenied):
            e.grant(None, PermissionGrant(
                ability="view", effect="allow", subject_kind="everyone", target_item=doc))

    def test_unknown_ability_rejected(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        with pytest.raises(UnknownAbility):
            e.grant(ada, PermissionGrant(
                ability="launch", effect="allow", subject_kind="everyone", target_item=doc))

    def test_registered_ability_accepted(self, world):
        e, ada, bob, doc = world["engine"], world["ada"], world["bob"], world["doc"]
        e.permissions.register_ability("annotate_margins")
        e.grant(ada, PermissionGrant(
            ability="annotate_margins", effect="allow", subject_kind="agent",
            subject_id=bob, target_item=doc))
        assert e.can(bob, "annotate_margins", doc)
        assert not e.can(None, "annotate_margins", doc)

    def test_subject_must_be_agent_or_collection(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        with pytest.raises(UnknownSubject):
            e.grant(ada, PermissionGrant(
                ability="view", effect="allow", subject_kind="agent", subject_id=doc,
                target_item=doc))
        with pytest.raises(UnknownSubject):
            e.grant(ada, PermissionGrant(
                ability="view", effect="allow", subject_kind="collection",
                subject_id=world["bob"], target_item=doc))
        with pytest.raises(UnknownSubject):
            e.grant(ada, PermissionGrant(
                ability="view", effect="allow", subject_kind="agent", subject_id=None,
                target_item=doc))

    def test_piece_grants_only_view_edit(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        with pytest.raises(InvalidPieceAbility):
            e.grant(ada, PermissionGrant(
                ability="comment_on", effect="allow", subject_kind="everyone",
                target_item=doc, target_piece="body"))

    def test_revoke_unknown_grant(self, world):
        with pytest.raises(UnknownGrant):
            world["engine"].revoke(world["admin"], 9999)

    def test_grants_purged_when_target_destroyed(self, world):
        e, ada, doc = world["engine"], world["ada"], world["doc"]
        before = len(e.permissions.all_grants())
        e.grant(ada, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        assert len(e.permissions.all_grants()) == before + 1
        e.deactivate(ada, doc)
        e.destroy(ada, doc)
        assert len(e.permissions.all_grants()) == before
        assert not any(g.target_item == doc for _, g in e.permissions.all_grants())

    def test_grants_purged_when_subject_destroyed(self, world):
        e, ada, bob, doc = world["engine"], world["ada"], world["bob"], world["doc"]
        before = len(e.permissions.all_grants())
        e.grant(ada, PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        e.deactivate(world["admin"], bob)
        e.destroy(world["admin"], bob)
        assert len(e.permissions.all_grants()) == before
        assert not any(g.subject_id == bob for _, g in e.permissions.all_grants())

    def test_create_grants_are_type_scoped(self, world):
        e, admin, bob = world["engine"], world["admin"], world["bob"]
        assert not e.can(bob, "create", "Collection")
        e.grant(admin, PermissionGrant(
            ability="create", effect="allow", subject_kind="agent", subject_id=bob,
            target_type="Collection"))
        assert e.can(bob, "create", "Collection")
        assert not e.can(bob, "create", "Document")

    def test_create_grants_admin_managed(self, world):
        e, ada = world["engine"], world["ada"]
        with pytest.raises(PermissionDenied):
            e.grant(ada, PermissionGrant(
                ability="create", effect="allow", subject_kind="agent",
                subject_id=ada, target_type="TextDocument"))


# -- randomized comparison against the literal rules -------------------------------


ABILITIES = ("view", "edit", "comment_on", "deactivate", "destroy", "modify_permissions")


def oracle_decide(
    grants: list[dict[str, Any]],
    agent: int | None,
    member_of: dict[int, set[int]],
) -> bool | None:
    """Rules 2-4: specificity ladder with deny-wins inside each rung."""

    def matches(g: dict[str, Any]) -> bool:
        if g["subject_kind"] == "everyone":
            return True
        if agent is None:
            return False
        if g["subject_kind"] == "agent":
            return g["subject_id"] == agent
        return g["subject_id"] in member_of.get(agent, set())

    for kind in ("agent", "collection", "everyone"):
        rung = [g for g in grants if g["subject_kind"] == kind and matches(g)]
        if rung:
            return not any(g["effect"] == "deny" for g in rung)
    return None


def oracle_can(
    grants: list[dict[str, Any]],
    agent: int | None,
    ability: str,
    item: int,
    piece: str | None,
    creator: int,
    member_of: dict[int, set[int]],
    admins: set[int],
) -> bool:
    if agent in admins:
        return True
    if piece is not None:
        scoped = [
            g
            for g in grants
            if g["target_item"] == item
            and g["target_piece"] == piece
            and g["ability"] == ability
        ]
        decision = oracle_decide(scoped, agent, member_of)
        if decision is not None:
            return decision
    item_wide = [
        g
        for g in grants
        if g["target_item"] == item and g["target_piece"] is None and g["ability"] == ability
    ]
    decision = oracle_decide(item_wide, agent, member_of)
    if decision is not None:
        return decision
    return agent is not None and creator == agent  # rule 5


def _oracle_member_of(edges: list[tuple[int, int]], collections: set[int]) -> dict[int, set[int]]:
    """agent/collection -> every collection it is indirectly inside."""
    adjacency: dict[int, set[int]] = {}
    for parent, child in edges:
        adjacency.setdefault(parent, set()).add(child)

    def reachable(start: int) -> set[int]:
        reached: set[int] = set()
        frontier, visited = [start], {start}
        while frontier:
            node = frontier.pop()
            for child in adjacency.get(node, ()):
                reached.add(child)
                if child in collections and child not in visited:
                    visited.add(child)
                    frontier.append(child)
        return reached

    member_of: dict[int, set[int]] = {}
    for coll in collections:
        for node in reachable(coll):
            member_of.setdefault(node, set()).add(coll)
    return member_of


def _random_world(rng: random.Random):
    engine = ContentEngine()
    root_admin = engine.create_item(None, "Person", {"first_name": "Root"}, self_created=True).id
    engine.permissions.admin_agents.add(root_admin)

    agents = [
        engine.create_item(root_admin, "Person", {"first_name": f"P{i}"}).id
        for i in range(rng.randint(2, 4))
    ]
    collections = {
        engine.create_item(root_admin, "Collection", {}).id
        for _ in range(rng.randint(0, 3))
    }
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for _ in range(rng.randint(0, 6)):
        if not collections:
            break
        parent = rng.choice(sorted(collections))
        child = rng.choice(agents + sorted(collections))
        if (parent, child) in seen:
            continue
        seen.add((parent, child))
        engine.add_member(root_admin, parent, child)
        edges.append((parent, child))

    engine.grant(root_admin, PermissionGrant(
        ability="create", effect="allow", subject_kind="everyone",
        target_type="TextDocument"))
    items = {}
    for _ in range(rng.randint(2, 5)):
        creator = rng.choice(agents)
        item = engine.create_item(creator, "TextDocument", {"body": "w"}).id
        items[item] = creator

    grants: list[dict[str, Any]] = []
    for _ in range(rng.randint(0, 12)):
        ability = rng.choice(ABILITIES)
        piece = None
        if ability in ("view", "edit") and rng.random() < 0.35:
            piece = rng.choice(["description", "creator", "body"])
        kind = rng.choice(["agent", "collection", "everyone"])
        subject_id = None
        if kind == "agent":
            subject_id = rng.choice(agents)
        elif kind == "collection":
            if not collections:
                continue
            subject_id = rng.choice(sorted(collections))
        row = {
            "ability": ability,
            "effect": rng.choice(["allow", "deny"]),
            "subject_kind": kind,
            "subject_id": subject_id,
            "target_item": rng.choice(sorted(items)),
            "target_piece": piece,
        }
        engine.grant(root_admin, PermissionGrant(**row, target_type=None))
        grants.append(row)

    admins: set[int] = set()
    if rng.random() < 0.25:
        promoted = rng.choice(agents)
        engine.permissions.admin_agents.add(promoted)
        admins.add(promoted)

    member_of = _oracle_member_of(edges, collections)
    return engine, agents, items, grants, member_of, admins


def test_random_configurations_match_rule_oracle():
    for seed in range(60):
        rng = random.Random(71000 + seed)
        engine, agents, items, grants, member_of, admins = _random_world(rng)
        queries = 0
        for agent in agents + [None]:
            for item, creator in items.items():
                for ability in ABILITIES:
                    expected = oracle_can(
                        grants, agent, ability, item, None, creator, member_of, admins
                    )
                    assert engine.can(agent, ability, item) == expected, (
                        seed, agent, ability, item)
                    queries += 1
                for piece in ("description", "creator", "body"):
                    expected = oracle_can(
                        grants, agent, "view", item, piece, creator, member_of, admins
                    )
                    assert engine.can(agent, "view", item, piece=piece) == expected, (
                        seed, agent, item, piece)
                expected_visible = [
                    p
                    for p in ("description", "creator", "body")
                    if oracle_can(grants, agent, "view", item, p, creator, member_of, admins)
                ]
                assert engine.permissions.visible_pieces(agent, item) == expected_visible
        assert queries > 0
