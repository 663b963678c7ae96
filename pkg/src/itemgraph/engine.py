"""The facade that composes storage, permissions, collections, annotations
and viewers into one permission-enforcing surface.

Every public method takes the acting agent first (None for anonymous) and
checks permissions before touching state, so the HTTP service, the CLI and
embedding code all go through identical enforcement.  The lower layers stay
importable on their own for tests and tools that need raw access.
"""

from __future__ import annotations

import json
import os
from dataclasses import replace
from typing import Any, Mapping

from .annotations import (
    ANCHOR_PIECES,
    COMMENT_TYPE,
    COMMENTED_ITEM,
    DOCUMENT_POINTER,
    TRANSCLUSION_TYPE,
    AnnotationRecord,
    AnnotationService,
    ExcerptValue,
    check_new_comment,
    check_new_transclusion,
)
from .collections import (
    COLLECTION_POINTER,
    EDGE_PIECES,
    MEMBERSHIP_TYPE,
    CollectionService,
    MembershipEntry,
    check_new_membership,
)
from .errors import ImmutablePiece, ItemInactive, PermissionDenied
from .permissions import PermissionEngine, PermissionGrant
from .schema import (
    PieceDefinition,
    TypeRegistry,
    bootstrap_schema,
    load_schema_text,
    registry_from_defs,
    registry_to_defs,
)
from .store import CREATOR_PIECE, INCLUDE_INACTIVE, ItemSnapshot, ItemStore
from .viewers import RenderedView, ViewerRegistry, register_default_viewer

STATE_FORMAT = 1

_FROZEN_PIECES: dict[str, frozenset[str]] = {**ANCHOR_PIECES, **EDGE_PIECES}


class ContentEngine:
    def __init__(self, registry: TypeRegistry | None = None) -> None:
        self.registry = registry if registry is not None else bootstrap_schema()
        self.store = ItemStore(self.registry)
        self.collections = CollectionService(self.store)
        self.permissions = PermissionEngine(self.store, self.collections)
        self.annotations = AnnotationService(self.store, self.permissions)
        self.viewers = ViewerRegistry(
            self.registry, self.store, self.permissions, self.annotations
        )
        register_default_viewer(self.viewers, self.registry.root_name)

    # -- small shared guards ---------------------------------------------------------

    def _require_actor(self, agent: int | None) -> int:
        # items always record their author, so writes need a real agent
        if agent is None:
            raise PermissionDenied("anonymous requests may not write")
        return agent

    def _may_see_inactive(self, agent: int | None, item_id: int) -> bool:
        return self.permissions.can(agent, "deactivate", item_id)

    def _require_readable(self, agent: int | None, item_id: int) -> None:
        self.store.current_version(item_id)
        self.permissions.require(agent, "view", item_id)
        if not self.store.is_active(item_id) and not self._may_see_inactive(agent, item_id):
            raise ItemInactive(f"item {item_id} is deactivated")

    def _restrict(self, agent: int | None, snapshot: ItemSnapshot) -> ItemSnapshot:
        visible = set(self.permissions.visible_pieces(agent, snapshot.id))
        values = {k: v for k, v in snapshot.piece_values.items() if k in visible}
        return replace(snapshot, piece_values=values)

    # -- schema ----------------------------------------------------------------------

    def define_type(
        self,
        agent: int | None,
        name: str,
        parents: list[str],
        pieces: list[PieceDefinition],
    ) -> None:
        """Extending the live type registry is an installation-level act."""
        if not self.permissions.is_admin(agent):
            raise PermissionDenied("only administrators may define types")
        self.registry.define(name, parents, pieces)
        self.registry.validate_pointer_targets()

    def load_schema(self, agent: int | None, text: str) -> None:
        if not self.permissions.is_admin(agent):
            raise PermissionDenied("only administrators may define types")
        load_schema_text(self.registry, text)

    @property
    def agent_type(self) -> str:
        piece = self.registry.piece(self.registry.root_name, CREATOR_PIECE)
        assert piece.target_type is not None
        return piece.target_type

    # -- item lifecycle ----------------------------------------------------------

    def _structural_checks(
        self, agent: int | None, type_name: str, piece_values: Mapping[str, Any]
    ) -> None:
        """Typed invariants enforced on every create path, generic or not."""
        is_subtype = self.registry.is_subtype
        if is_subtype(type_name, MEMBERSHIP_TYPE):
            check_new_membership(self.store, piece_values)
            collection_id = piece_values.get(COLLECTION_POINTER)
            if isinstance(collection_id, int) and not isinstance(collection_id, bool):
                if self.store.exists(collection_id) and not self.store.is_destroyed(
                    collection_id
                ):
                    self.permissions.require(agent, "edit", collection_id)
        if is_subtype(type_name, COMMENT_TYPE):
            check_new_comment(self.store, piece_values)
            target = piece_values.get(COMMENTED_ITEM)
            if isinstance(target, int) and not isinstance(target, bool):
                if self.store.exists(target) and not self.store.is_destroyed(target):
                    self.permissions.require(agent, "comment_on", target)
        if is_subtype(type_name, TRANSCLUSION_TYPE):
            check_new_transclusion(self.store, piece_values)
            document = piece_values.get(DOCUMENT_POINTER)
            if isinstance(document, int) and not isinstance(document, bool):
                if self.store.exists(document) and not self.store.is_destroyed(document):
                    self.permissions.require(agent, "comment_on", document)

    def create_item(
        self,
        agent: int | None,
        type_name: str,
        piece_values: Mapping[str, Any] | None = None,
        self_created: bool = False,
    ) -> ItemSnapshot:
        """Create an item as ``agent``.

        ``self_created`` bootstraps an empty installation: the new item acts
        as its own creator, which is only allowed for agent types and only
        while no agent exists yet.
        """
        piece_values = dict(piece_values or {})
        self.registry.get(type_name)
        if self_created:
            if self.store.list_items(
                self.agent_type, include_subtypes=True, filters={INCLUDE_INACTIVE: True}
            ):
                raise PermissionDenied(
                    "self-creation is only for bootstrapping; this installation "
                    "already has agents"
                )
            creator: int | None = None
        else:
            self._require_actor(agent)
            self.permissions.require(agent, "create", type_name)
            creator = agent
        self._structural_checks(agent, type_name, piece_values)
        return self.store.create_item(type_name, piece_values, creator=creator)

    def read_item(self, agent: int | None, item_id: int) -> ItemSnapshot:
        self._require_readable(agent, item_id)
        return self._restrict(agent, self.store.get_item(item_id))

    def read_version(self, agent: int | None, item_id: int, version: int) -> ItemSnapshot:
        self._require_readable(agent, item_id)
        return self._restrict(agent, self.store.get_version(item_id, version))

    def versions(self, agent: int | None, item_id: int) -> list[int]:
        self._require_readable(agent, item_id)
        return self.store.archived_versions(item_id) + [self.store.current_version(item_id)]

    def update_item(
        self, agent: int | None, item_id: int, piece_values: Mapping[str, Any]
    ) -> ItemSnapshot:
        self._require_actor(agent)
        self.store.current_version(item_id)
        type_name = self.store.type_of(item_id)
        changed = set(piece_values)
        for owner_type, frozen in _FROZEN_PIECES.items():
            if owner_type in self.registry and self.registry.is_subtype(type_name, owner_type):
                stuck = sorted(changed & frozen)
                if stuck:
                    raise ImmutablePiece(
                        f"{', '.join(stuck)}: anchors cannot be re-pointed after creation"
                    )
        for name in piece_values:
            self.permissions.require(agent, "edit", item_id, piece=name)
        return self.store.update_item(item_id, piece_values, editor=agent)

    def list_items(
        self,
        agent: int | None,
        type_name: str,
        include_subtypes: bool = True,
        filters: Mapping[str, Any] | None = None,
        include_inactive: bool = False,
    ) -> list[int]:
        filters = dict(filters or {})
        if include_inactive:
            filters[INCLUDE_INACTIVE] = True
        ids = self.store.list_items(type_name, include_subtypes, filters)
        readable = []
        for item_id in ids:
            if not self.permissions.can(agent, "view", item_id):
                continue
            if not self.store.is_active(item_id) and not self._may_see_inactive(agent, item_id):
                continue
            readable.append(item_id)
        return readable

    def deactivate(self, agent: int | None, item_id: int) -> None:
        actor = self._require_actor(agent)
        self.permissions.require(agent, "deactivate", item_id)
        self.store.deactivate(item_id, actor)

    def reactivate(self, agent: int | None, item_id: int) -> None:
        actor = self._require_actor(agent)
        self.permissions.require(agent, "deactivate", item_id)
        self.store.reactivate(item_id, actor)

    def destroy(self, agent: int | None, item_id: int) -> None:
        actor = self._require_actor(agent)
        self.permissions.require(agent, "destroy", item_id)
        self.store.destroy(item_id, actor)
        self.permissions.purge_item(item_id)

    # -- collections ----------------------------------------------------------

    def add_member(self, agent: int | None, collection_id: int, member_id: int) -> int:
        actor = self._require_actor(agent)
        self.collections.require_collection(collection_id)
        self.permissions.require(agent, "edit", collection_id)
        return self.collections.add_membership(collection_id, member_id, actor)

    def remove_member(self, agent: int | None, membership_id: int) -> None:
        actor = self._require_actor(agent)
        self.store.current_version(membership_id)
        allowed = self.permissions.can(agent, "deactivate", membership_id)
        if not allowed:
            raw = self.store.get_item(membership_id).piece_values.get(COLLECTION_POINTER)
            if isinstance(raw, int) and self.store.exists(raw) and not self.store.is_destroyed(
                raw
            ):
                allowed = self.permissions.can(agent, "edit", raw)
        if not allowed:
            raise PermissionDenied(f"agent {actor} may not remove membership {membership_id}")
        self.collections.remove_membership(membership_id, actor)

    def direct_members(self, agent: int | None, collection_id: int) -> list[int]:
        self._require_readable(agent, collection_id)
        members = self.collections.direct_members(collection_id)
        return sorted(m for m in members if self.permissions.can(agent, "view", m))

    def indirect_members(self, agent: int | None, collection_id: int) -> list[int]:
        self._require_readable(agent, collection_id)
        members = self.collections.indirect_members(collection_id)
        return sorted(m for m in members if self.permissions.can(agent, "view", m))

    def membership_entries(
        self, agent: int | None, collection_id: int
    ) -> list[MembershipEntry]:
        self._require_readable(agent, collection_id)
        entries = []
        for entry in self.collections.membership_entries(collection_id):
            if not entry.dangling and not self.permissions.can(agent, "view", entry.member_id):
                continue
            entries.append(entry)
        return entries

    def collections_of(
        self, agent: int | None, item_id: int, direct_only: bool = False
    ) -> list[int]:
        self._require_readable(agent, item_id)
        containers = self.collections.collections_containing(item_id, direct_only)
        return sorted(c for c in containers if self.permissions.can(agent, "view", c))

    # -- annotations ----------------------------------------------------------

    def create_comment(
        self, agent: int | None, item_id: int, item_version: int, body: str | None
    ) -> int:
        self._require_actor(agent)
        return self.annotations.create_comment(agent, item_id, item_version, body)

    def create_transclusion(
        self,
        agent: int | None,
        document_id: int,
        document_version: int,
        character_offset: int,
        target_id: int,
    ) -> int:
        self._require_actor(agent)
        return self.annotations.create_transclusion(
            agent, document_id, document_version, character_offset, target_id
        )

    def create_excerpt(self, agent: int | None, source_item: int, source_piece: str) -> int:
        self._require_actor(agent)
        return self.annotations.create_excerpt(agent, source_item, source_piece)

    def annotations_for(
        self, agent: int | None, item_id: int, version: int | None = None
    ) -> list[AnnotationRecord]:
        self._require_readable(agent, item_id)
        return self.annotations.annotations_for(agent, item_id, version)

    def resolve_excerpt(self, agent: int | None, excerpt_id: int) -> ExcerptValue:
        self._require_readable(agent, excerpt_id)
        return self.annotations.resolve_excerpt(agent, excerpt_id)

    # -- permissions ----------------------------------------------------------

    def grant(self, agent: int | None, grant: PermissionGrant) -> int:
        return self.permissions.add_grant(agent, grant)

    def revoke(self, agent: int | None, grant_id: int) -> None:
        self.permissions.revoke(agent, grant_id)

    def grants_for(self, agent: int | None, item_id: int) -> list[tuple[int, PermissionGrant]]:
        # reading an item's access table is itself controlled
        self.permissions.require(agent, "modify_permissions", item_id)
        return self.permissions.grants_for_item(item_id)

    def can(
        self, agent: int | None, ability: str, target: int | str, piece: str | None = None
    ) -> bool:
        return self.permissions.can(agent, ability, target, piece)

    # -- viewers ----------------------------------------------------------

    def dispatch(
        self,
        agent: int | None,
        item_id: int,
        action: str = "item_show",
        viewer: str | None = None,
        version: int | None = None,
        params: Mapping[str, Any] | None = None,
    ) -> RenderedView:
        return self.viewers.dispatch(
            agent, item_id, action, viewer_name=viewer, version=version, params=params
        )

    def actions_for(self, agent: int | None, item_id: int) -> list[str]:
        self._require_readable(agent, item_id)
        return sorted(self.viewers.actions_for(self.store.type_of(item_id)))

    # -- persistence ----------------------------------------------------------

    def to_state(self) -> dict[str, Any]:
        return {
            "format": STATE_FORMAT,
            "schema": registry_to_defs(self.registry),
            "store": self.store.to_state(),
            "permissions": self.permissions.to_state(),
        }

    @classmethod
    def from_state(cls, state: Mapping[str, Any]) -> "ContentEngine":
        registry = registry_from_defs(state["schema"])
        engine = cls(registry)
        engine.store = ItemStore.from_state(registry, state["store"])
        engine.collections = CollectionService(engine.store)
        engine.permissions = PermissionEngine(engine.store, engine.collections)
        engine.permissions.load_state(state["permissions"])
        engine.annotations = AnnotationService(engine.store, engine.permissions)
        engine.viewers = ViewerRegistry(
            registry, engine.store, engine.permissions, engine.annotations
        )
        register_default_viewer(engine.viewers, registry.root_name)
        return engine

    def save(self, path: str) -> None:
        payload = json.dumps(self.to_state(), sort_keys=True, ensure_ascii=False, indent=1)
        tmp = f"{path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "ContentEngine":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_state(json.load(fh))
