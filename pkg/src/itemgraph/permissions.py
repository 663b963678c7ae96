"""Pluggable ability checks with per-piece resolution.

Every decision reduces to an ordered scan of explicit grants:

1. piece-scoped grants beat item-scoped grants beat the default
2. within a scope, an agent subject beats a collection subject beats everyone
3. within a scope and specificity level, any deny beats any allow
4. collection subjects match agents who are indirect members
5. with no matching grant at all, the item's creator holds every ability
   and everyone else holds none

Abilities are open-ended strings so installations can add their own, but
piece-scoped grants only make sense for ``view`` and ``edit``: the other
abilities act on whole items.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .collections import COLLECTION_TYPE, CollectionService
from .errors import (
    InvalidPieceAbility,
    PermissionDenied,
    UnknownAbility,
    UnknownGrant,
    UnknownItem,
    UnknownSubject,
)
from .store import ItemStore

ITEM_ABILITIES = ("view", "edit", "comment_on", "deactivate", "destroy", "modify_permissions")
CREATE_ABILITY = "create"
PIECE_ABILITIES = ("view", "edit")
SUBJECT_KINDS = ("agent", "collection", "everyone")
EFFECTS = ("allow", "deny")


@dataclass(frozen=True)
class PermissionGrant:
    """One row of the access table.

    Exactly one of target_item / target_type is set: item-directed grants
    (optionally narrowed to a piece) versus type-directed create grants.
    """

    ability: str
    effect: str
    subject_kind: str
    subject_id: int | None = None
    target_item: int | None = None
    target_type: str | None = None
    target_piece: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "ability": self.ability,
            "effect": self.effect,
            "subject_kind": self.subject_kind,
            "subject_id": self.subject_id,
            "target_item": self.target_item,
            "target_type": self.target_type,
            "target_piece": self.target_piece,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PermissionGrant":
        return cls(
            ability=data["ability"],
            effect=data["effect"],
            subject_kind=data["subject_kind"],
            subject_id=data.get("subject_id"),
            target_item=data.get("target_item"),
            target_type=data.get("target_type"),
            target_piece=data.get("target_piece"),
        )


class PermissionEngine:
    def __init__(self, store: ItemStore, collections: CollectionService) -> None:
        self._store = store
        self._collections = collections
        self._abilities: set[str] = set(ITEM_ABILITIES) | {CREATE_ABILITY}
        self._grants: dict[int, PermissionGrant] = {}
        self._next_grant_id = 1
        self.admin_agents: set[int] = set()

    # -- ability registry ----------------------------------------------------------

    @property
    def abilities(self) -> set[str]:
        return set(self._abilities)

    def register_ability(self, name: str) -> None:
        if not name or not name.replace("_", "").isalnum():
            raise UnknownAbility(f"invalid ability name {name!r}")
        self._abilities.add(name)

    def is_admin(self, agent: int | None) -> bool:
        return agent is not None and agent in self.admin_agents

    # -- decision procedure ----------------------------------------------------------

    def _subject_matches(self, grant: PermissionGrant, agent: int | None) -> bool:
        if grant.subject_kind == "everyone":
            return True
        if agent is None:
            return False
        if grant.subject_kind == "agent":
            return grant.subject_id == agent
        # collection subject: conveys nothing while hidden or gone
        collection_id = grant.subject_id
        assert collection_id is not None
        if not self._store.exists(collection_id) or self._store.is_destroyed(collection_id):
            return False
        if not self._store.is_active(collection_id):
            return False
        return agent in self._collections.indirect_members(collection_id)

    def _decide(self, grants: Iterable[PermissionGrant], agent: int | None) -> bool | None:
        grants = list(grants)
        for kind in SUBJECT_KINDS:
            bucket = [
                g for g in grants if g.subject_kind == kind and self._subject_matches(g, agent)
            ]
            if bucket:
                return all(g.effect == "allow" for g in bucket)
        return None

    def can(
        self,
        agent: int | None,
        ability: str,
        target: int | str,
        piece: str | None = None,
    ) -> bool:
        """Decide one (agent, ability, target) query.  None means anonymous."""
        if ability not in self._abilities:
            raise UnknownAbility(f"no ability named {ability!r}")
        if piece is not None and ability not in PIECE_ABILITIES:
            raise InvalidPieceAbility(f"{ability} cannot be scoped to a piece")
        if agent is not None:
            self._store.current_version(agent)  # unknown or destroyed actors are errors

        if ability == CREATE_ABILITY:
            if not isinstance(target, str):
                raise TypeError("create is decided against a type name")
            self._store.registry.get(target)
            if self.is_admin(agent):
                return True
            matching = [
                g
                for g in self._grants.values()
                if g.target_type == target and g.ability == CREATE_ABILITY
            ]
            decision = self._decide(matching, agent)
            return bool(decision)

        if not isinstance(target, int) or isinstance(target, bool):
            raise TypeError(f"{ability} is decided against an item id")
        self._store.current_version(target)  # raises UnknownItem / ItemDestroyed
        if piece is not None:
            self._store.registry.piece(self._store.type_of(target), piece)
        if self.is_admin(agent):
            return True

        if piece is not None:
            scoped = [
                g
                for g in self._grants.values()
                if g.target_item == target and g.target_piece == piece and g.ability == ability
            ]
            decision = self._decide(scoped, agent)
            if decision is not None:
                return decision

        item_wide = [
            g
            for g in self._grants.values()
            if g.target_item == target and g.target_piece is None and g.ability == ability
        ]
        decision = self._decide(item_wide, agent)
        if decision is not None:
            return decision

        return agent is not None and self._store.creator_of(target) == agent

    def require(
        self,
        agent: int | None,
        ability: str,
        target: int | str,
        piece: str | None = None,
    ) -> None:
        if not self.can(agent, ability, target, piece):
            who = "anonymous" if agent is None else f"agent {agent}"
            where = f"{target}.{piece}" if piece else str(target)
            raise PermissionDenied(f"{who} may not {ability} {where}")

    def visible_pieces(self, agent: int | None, item_id: int) -> list[str]:
        """Piece names the agent may read, in declaration order."""
        type_name = self._store.type_of(item_id)
        names = [p.name for p in self._store.registry.all_pieces(type_name)]
        return [name for name in names if self.can(agent, "view", item_id, piece=name)]

    # -- grant management ----------------------------------------------------------

    def _validate_grant(self, grant: PermissionGrant) -> PermissionGrant:
        if grant.ability not in self._abilities:
            raise UnknownAbility(f"no ability named {grant.ability!r}")
        if grant.effect not in EFFECTS:
            raise UnknownGrant(f"effect must be allow or deny, got {grant.effect!r}")
        if grant.subject_kind not in SUBJECT_KINDS:
            raise UnknownSubject(f"unknown subject kind {grant.subject_kind!r}")

        if grant.subject_kind == "everyone":
            if grant.subject_id is not None:
                raise UnknownSubject("everyone takes no subject id")
        else:
            subject = grant.subject_id
            if subject is None or not self._store.exists(subject) or self._store.is_destroyed(
                subject
            ):
                raise UnknownSubject(f"no live item with id {subject}")
            subject_type = self._store.type_of(subject)
            registry = self._store.registry
            if grant.subject_kind == "agent":
                agent_type = registry.piece(registry.root_name, "creator").target_type
                if not registry.is_subtype(subject_type, agent_type or ""):
                    raise UnknownSubject(f"item {subject} is not an agent")
            elif not registry.is_subtype(subject_type, COLLECTION_TYPE):
                raise UnknownSubject(f"item {subject} is not a collection")

        targets_set = (grant.target_item is not None) + (grant.target_type is not None)
        if targets_set != 1:
            raise UnknownGrant("a grant names exactly one of target_item or target_type")

        if grant.ability == CREATE_ABILITY:
            if grant.target_type is None:
                raise UnknownGrant("create grants are scoped to a type")
            self._store.registry.get(grant.target_type)
            if grant.target_piece is not None:
                raise InvalidPieceAbility("create cannot be scoped to a piece")
            return grant

        if grant.target_item is None:
            raise UnknownGrant(f"{grant.ability} grants are scoped to an item")
        self._store.current_version(grant.target_item)
        if grant.target_piece is not None:
            if grant.ability not in PIECE_ABILITIES:
                raise InvalidPieceAbility(f"{grant.ability} cannot be scoped to a piece")
            item_type = self._store.type_of(grant.target_item)
            self._store.registry.piece(item_type, grant.target_piece)
        return grant

    def _require_grant_authority(self, grantor: int | None, grant: PermissionGrant) -> None:
        if grant.target_item is not None:
            self.require(grantor, "modify_permissions", grant.target_item)
            return
        # type-directed grants govern creation across the installation
        if not self.is_admin(grantor):
            who = "anonymous" if grantor is None else f"agent {grantor}"
            raise PermissionDenied(f"{who} may not manage create grants")

    def add_grant(self, grantor: int | None, grant: PermissionGrant) -> int:
        grant = self._validate_grant(grant)
        self._require_grant_authority(grantor, grant)
        grant_id = self._next_grant_id
        self._next_grant_id += 1
        self._grants[grant_id] = grant
        return grant_id

    def revoke(self, grantor: int | None, grant_id: int) -> None:
        grant = self._grants.get(grant_id)
        if grant is None:
            raise UnknownGrant(f"no grant with id {grant_id}")
        self._require_grant_authority(grantor, grant)
        del self._grants[grant_id]

    def grants_for_item(self, item_id: int) -> list[tuple[int, PermissionGrant]]:
        self._store.current_version(item_id)
        return sorted(
            (gid, g) for gid, g in self._grants.items() if g.target_item == item_id
        )

    def all_grants(self) -> list[tuple[int, PermissionGrant]]:
        return sorted(self._grants.items())

    def purge_item(self, item_id: int) -> None:
        """Drop grants that point at a destroyed item, as target or subject."""
        doomed = [
            gid
            for gid, g in self._grants.items()
            if g.target_item == item_id or g.subject_id == item_id
        ]
        for gid in doomed:
            del self._grants[gid]

    # -- persistence ----------------------------------------------------------

    def to_state(self) -> dict[str, Any]:
        return {
            "next_grant_id": self._next_grant_id,
            "admins": sorted(self.admin_agents),
            "extra_abilities": sorted(self._abilities - set(ITEM_ABILITIES) - {CREATE_ABILITY}),
            "grants": [
                {"id": gid, **grant.to_dict()} for gid, grant in sorted(self._grants.items())
            ],
        }

    def load_state(self, state: Mapping[str, Any]) -> None:
        self._next_grant_id = state["next_grant_id"]
        self.admin_agents = set(state.get("admins", ()))
        for name in state.get("extra_abilities", ()):
            self._abilities.add(name)
        self._grants = {
            entry["id"]: PermissionGrant.from_dict(entry) for entry in state.get("grants", ())
        }


__all__ = [
    "CREATE_ABILITY",
    "EFFECTS",
    "ITEM_ABILITIES",
    "PIECE_ABILITIES",
    "PermissionEngine",
    "PermissionGrant",
    "SUBJECT_KINDS",
]
