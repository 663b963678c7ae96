"""Facade-level rules: bootstrap, actor gates, structural checks, persistence."""

from __future__ import annotations

import pytest

from itemgraph import ContentEngine, PermissionGrant
from itemgraph.errors import (
    DuplicateMembership,
    ImmutablePiece,
    ItemInactive,
    OffsetOutOfRange,
    PermissionDenied,
    UnknownVersion,
)
from itemgraph.schema import PieceDefinition


class TestBootstrap:
    def test_first_agent_self_creates(self, engine):
        mike = engine.create_item(
            None, "Person", {"first_name": "Mike"}, self_created=True)
        assert mike.piece_values["creator"] == mike.id

    def test_self_creation_closes_after_first_agent(self, engine, admin):
        with pytest.raises(PermissionDenied):
            engine.create_item(None, "Person", {"first_name": "Eve"}, self_created=True)

    def test_inactive_agents_still_close_the_door(self, engine, admin):
        other_admin = engine.create_item(admin, "Person", {"first_name": "B"}).id
        engine.permissions.admin_agents.add(other_admin)
        engine.deactivate(other_admin, admin)
        with pytest.raises(PermissionDenied):
            engine.create_item(None, "Person", {"first_name": "Eve"}, self_created=True)

    def test_agent_type_read_from_schema(self, engine):
        assert engine.agent_type == "Agent"


class TestActorGates:
    def test_anonymous_may_not_write(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        with pytest.raises(PermissionDenied):
            engine.create_item(None, "TextDocument", {"body": "y"})
        with pytest.raises(PermissionDenied):
            engine.update_item(None, doc, {"body": "y"})
        with pytest.raises(PermissionDenied):
            engine.deactivate(None, doc)
        with pytest.raises(PermissionDenied):
            engine.destroy(None, doc)

    def test_anonymous_may_read_what_everyone_may(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "open"}).id
        with pytest.raises(PermissionDenied):
            engine.read_item(None, doc)
        engine.grant(admin, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        assert engine.read_item(None, doc).piece_values["body"] == "open"

    def test_creation_needs_a_grant_or_admin(self, engine, admin):
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        with pytest.raises(PermissionDenied):
            engine.create_item(bob, "TextDocument", {"body": "mine"})
        engine.grant(admin, PermissionGrant(
            ability="create", effect="allow", subject_kind="agent", subject_id=bob,
            target_type="TextDocument"))
        doc = engine.create_item(bob, "TextDocument", {"body": "mine"})
        assert doc.piece_values["creator"] == bob

    def test_piece_scoped_edit_deny(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        engine.grant(admin, PermissionGrant(
            ability="edit", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        engine.grant(admin, PermissionGrant(
            ability="edit", effect="deny", subject_kind="agent", subject_id=bob,
            target_item=doc, target_piece="description"))
        engine.update_item(bob, doc, {"body": "allowed"})
        with pytest.raises(PermissionDenied):
            engine.update_item(bob, doc, {"description": "blocked"})


class TestStructuralChecksOnGenericCreate:
    """POST-style generic creation cannot slip past typed invariants."""

    def test_duplicate_membership_blocked(self, engine, admin):
        coll = engine.create_item(admin, "Collection", {}).id
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        engine.create_item(admin, "Membership", {
            "collection_pointer": coll, "member_pointer": doc})
        with pytest.raises(DuplicateMembership):
            engine.create_item(admin, "Membership", {
                "collection_pointer": coll, "member_pointer": doc})

    def test_membership_needs_edit_on_collection(self, engine, admin):
        coll = engine.create_item(admin, "Collection", {}).id
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        engine.grant(admin, PermissionGrant(
            ability="create", effect="allow", subject_kind="agent", subject_id=bob,
            target_type="Membership"))
        with pytest.raises(PermissionDenied):
            engine.create_item(bob, "Membership", {
                "collection_pointer": coll, "member_pointer": bob})

    def test_comment_version_checked(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        with pytest.raises(UnknownVersion):
            engine.create_item(admin, "TextComment", {
                "commented_item": doc, "item_version_number": 5, "body": "no"})

    def test_comment_needs_comment_on(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        engine.grant(admin, PermissionGrant(
            ability="create", effect="allow", subject_kind="agent", subject_id=bob,
            target_type="TextComment"))
        with pytest.raises(PermissionDenied):
            engine.create_item(bob, "TextComment", {
                "commented_item": doc, "item_version_number": 1, "body": "no"})

    def test_transclusion_offset_checked(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "ab"}).id
        with pytest.raises(OffsetOutOfRange):
            engine.create_item(admin, "Transclusion", {
                "document_pointer": doc, "document_version": 1,
                "character_offset": 3, "target_item": doc})

    def test_membership_edges_frozen(self, engine, admin):
        coll = engine.create_item(admin, "Collection", {}).id
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        m = engine.add_member(admin, coll, doc)
        with pytest.raises(ImmutablePiece):
            engine.update_item(admin, m, {"member_pointer": coll})


class TestInactiveReadGate:
    def test_plain_viewers_lose_access(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        engine.grant(admin, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        assert engine.read_item(bob, doc).id == doc
        engine.deactivate(admin, doc)
        with pytest.raises(ItemInactive):
            engine.read_item(bob, doc)
        with pytest.raises(ItemInactive):
            engine.versions(bob, doc)
        assert engine.read_item(admin, doc).active is False

    def test_listing_respects_the_gate(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "x"}).id
        engine.grant(admin, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        engine.deactivate(admin, doc)
        assert doc not in engine.list_items(bob, "TextDocument", include_inactive=True)
        assert doc in engine.list_items(admin, "TextDocument", include_inactive=True)
        assert doc not in engine.list_items(admin, "TextDocument")

    def test_reads_are_piece_restricted(self, engine, admin):
        doc = engine.create_item(
            admin, "TextDocument", {"body": "secret", "description": "open"}).id
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        engine.grant(admin, PermissionGrant(
            ability="view", effect="allow", subject_kind="agent", subject_id=bob,
            target_item=doc))
        engine.grant(admin, PermissionGrant(
            ability="view", effect="deny", subject_kind="agent", subject_id=bob,
            target_item=doc, target_piece="body"))
        snapshot = engine.read_item(bob, doc)
        assert "body" not in snapshot.piece_values
        assert snapshot.piece_values["description"] == "open"
        engine.update_item(admin, doc, {"body": "secret2"})
        old = engine.read_version(bob, doc, 1)
        assert "body" not in old.piece_values


class TestSchemaAdministration:
    def test_define_type_requires_admin(self, engine, admin):
        bob = engine.create_item(admin, "Person", {"first_name": "Bob"}).id
        with pytest.raises(PermissionDenied):
            engine.define_type(bob, "Wiki", ["Document"], [])
        with pytest.raises(PermissionDenied):
            engine.load_schema(None, "type Wiki : Document")

    def test_new_type_immediately_usable(self, engine, admin):
        engine.define_type(admin, "Wiki", ["TextDocument"], [
            PieceDefinition(name="slug", kind="text")])
        page = engine.create_item(admin, "Wiki", {"slug": "home", "body": "hi"})
        assert page.type_name == "Wiki"
        assert engine.registry.ancestry("Wiki")[0] == "Wiki"
        assert engine.registry.ancestry("Wiki")[-1] == "Item"
        # wikis comment like text documents transclude
        target = engine.create_item(admin, "TextDocument", {"body": "t"}).id
        engine.create_transclusion(admin, page.id, 1, 0, target)


class TestPersistence:
    def _populate(self, engine, admin):
        doc = engine.create_item(admin, "TextDocument", {"body": "v1"}).id
        engine.update_item(admin, doc, {"body": "v2"})
        coll = engine.create_item(admin, "Collection", {"description": "c"}).id
        engine.add_member(admin, coll, doc)
        engine.create_comment(admin, doc, 1, "note")
        engine.grant(admin, PermissionGrant(
            ability="view", effect="allow", subject_kind="everyone", target_item=doc))
        return doc, coll

    def test_state_round_trip_preserves_everything(self, engine, admin):
        doc, coll = self._populate(engine, admin)
        clone = ContentEngine.from_state(engine.to_state())
        assert clone.store.serialize_state() == engine.store.serialize_state()
        assert clone.permissions.to_state() == engine.permissions.to_state()
        assert clone.read_item(None, doc).piece_values["body"] == "v2"
        assert clone.collections.direct_members(coll) == {doc}
        # the clone is live, not a snapshot in amber
        clone.permissions.admin_agents.add(admin)
        clone.update_item(admin, doc, {"body": "v3"})
        assert clone.read_item(None, doc).version == 3
        assert engine.store.current_version(doc) == 2

    def test_save_load_file_round_trip(self, engine, admin, tmp_path):
        doc, _ = self._populate(engine, admin)
        path = tmp_path / "store.json"
        engine.save(str(path))
        loaded = ContentEngine.load(str(path))
        assert loaded.store.serialize_state() == engine.store.serialize_state()
        assert loaded.read_item(None, doc).piece_values["body"] == "v2"

    def test_custom_types_survive_the_trip(self, engine, admin):
        engine.define_type(admin, "Wiki", ["TextDocument"], [
            PieceDefinition(name="slug", kind="text")])
        page = engine.create_item(admin, "Wiki", {"slug": "home", "body": "hi"}).id
        clone = ContentEngine.from_state(engine.to_state())
        assert clone.store.type_of(page) == "Wiki"
        assert clone.registry.ancestry("Wiki") == engine.registry.ancestry("Wiki")
