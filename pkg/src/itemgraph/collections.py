"""Referential containers: Collections whose contents are Membership items.

A Collection never stores its members; Memberships point at both ends, so an
item can sit in any number of collections while existing exactly once.  Each
Membership is itself a versioned, permission-bearing item.  Removal means
deactivating the Membership, which keeps the two-step deletion protocol
intact for container edges too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .errors import DuplicateMembership, NotACollection, UnknownItem
from .store import ItemStore

COLLECTION_TYPE = "Collection"
MEMBERSHIP_TYPE = "Membership"
COLLECTION_POINTER = "collection_pointer"
MEMBER_POINTER = "member_pointer"

# Membership edges never re-point; removal deactivates the edge instead.
EDGE_PIECES: dict[str, frozenset[str]] = {
    MEMBERSHIP_TYPE: frozenset({COLLECTION_POINTER, MEMBER_POINTER}),
}


@dataclass(frozen=True)
class MembershipEntry:
    membership_id: int
    member_id: int
    active: bool
    dangling: bool


def check_new_membership(store: ItemStore, piece_values: Mapping[str, Any]) -> None:
    """Reject a second active Membership for the same (collection, member) pair."""
    collection_id = piece_values.get(COLLECTION_POINTER)
    member_id = piece_values.get(MEMBER_POINTER)
    if collection_id is None or member_id is None:
        return  # store will reject the missing required piece
    existing = store.list_items(
        MEMBERSHIP_TYPE,
        include_subtypes=True,
        filters={COLLECTION_POINTER: collection_id, MEMBER_POINTER: member_id},
    )
    if existing:
        raise DuplicateMembership(
            f"collection {collection_id} already has an active membership "
            f"for item {member_id}"
        )


class CollectionService:
    def __init__(self, store: ItemStore) -> None:
        self._store = store

    def require_collection(self, collection_id: int) -> None:
        if not self._store.exists(collection_id):
            raise UnknownItem(f"no item with id {collection_id}")
        self._store.current_version(collection_id)  # raises ItemDestroyed for tombstones
        type_name = self._store.type_of(collection_id)
        if not self._store.registry.is_subtype(type_name, COLLECTION_TYPE):
            raise NotACollection(f"item {collection_id} is a {type_name}, not a Collection")

    def add_membership(self, collection_id: int, member_id: int, agent: int) -> int:
        self.require_collection(collection_id)
        if not self._store.exists(member_id) or self._store.is_destroyed(member_id):
            raise UnknownItem(f"no item with id {member_id}")
        values = {COLLECTION_POINTER: collection_id, MEMBER_POINTER: member_id}
        check_new_membership(self._store, values)
        snapshot = self._store.create_item(MEMBERSHIP_TYPE, values, creator=agent)
        return snapshot.id

    def remove_membership(self, membership_id: int, agent: int) -> None:
        """Deactivate (recoverably) the membership edge."""
        if not self._store.exists(membership_id):
            raise UnknownItem(f"no item with id {membership_id}")
        type_name = self._store.type_of(membership_id)
        if not self._store.registry.is_subtype(type_name, MEMBERSHIP_TYPE):
            raise UnknownItem(f"item {membership_id} is a {type_name}, not a Membership")
        self._store.deactivate(membership_id, agent)

    def membership_entries(self, collection_id: int) -> list[MembershipEntry]:
        """Every active Membership of the collection, dangling edges flagged."""
        self.require_collection(collection_id)
        entries = []
        for membership_id in self._store.list_items(
            MEMBERSHIP_TYPE, include_subtypes=True, filters={COLLECTION_POINTER: collection_id}
        ):
            member_id = self._raw_member(membership_id)
            entries.append(
                MembershipEntry(
                    membership_id=membership_id,
                    member_id=member_id,
                    active=True,
                    dangling=self._store.is_destroyed(member_id),
                )
            )
        return entries

    def _raw_member(self, membership_id: int) -> int:
        snapshot = self._store.get_item(membership_id)
        value = snapshot.piece_values[MEMBER_POINTER]
        return value.item_id if hasattr(value, "item_id") else value

    def direct_members(self, collection_id: int) -> set[int]:
        """Members linked by an active Membership, minus hidden endpoints."""
        members = set()
        for entry in self.membership_entries(collection_id):
            if entry.dangling:
                continue
            if not self._store.is_active(entry.member_id):
                continue
            members.add(entry.member_id)
        return members

    def indirect_members(self, collection_id: int) -> set[int]:
        """Transitive containment: expand through nested Collections.

        Cycles are allowed in the data; a visited set bounds the walk.  The
        starting collection itself appears only when a cycle reaches it.
        """
        self.require_collection(collection_id)
        registry = self._store.registry
        reached: set[int] = set()
        expanded: set[int] = set()
        frontier = [collection_id]
        while frontier:
            current = frontier.pop()
            if current in expanded:
                continue
            expanded.add(current)
            for member in self.direct_members(current):
                reached.add(member)
                if registry.is_subtype(self._store.type_of(member), COLLECTION_TYPE):
                    frontier.append(member)
        return reached

    def collections_containing(self, item_id: int, direct_only: bool = False) -> set[int]:
        """All active Collections whose membership set includes the item."""
        if not self._store.exists(item_id):
            raise UnknownItem(f"no item with id {item_id}")
        self._store.current_version(item_id)
        containers = set()
        for collection_id in self._store.list_items(COLLECTION_TYPE, include_subtypes=True):
            members = (
                self.direct_members(collection_id)
                if direct_only
                else self.indirect_members(collection_id)
            )
            if item_id in members:
                containers.add(collection_id)
        return containers
