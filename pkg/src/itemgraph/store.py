"""Multi-table item storage with comprehensive version archives.

An item of most-derived type T occupies one row in the logical table of every
type in ``ancestry(T)``; each row holds only the pieces that type owns.  All
rows share the item's immutable id.  Every update archives the full prior row
set, so any historical version can be reassembled exactly.  Deletion is a two
step protocol: ``deactivate`` (recoverable flag) then ``destroy`` (scrubs all
piece values everywhere, leaving an id/type tombstone so dangling pointers
stay detectable).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .errors import (
    AlreadyActive,
    AlreadyDestroyed,
    AlreadyInactive,
    DanglingPointer,
    ImmutablePiece,
    InvalidPieceValue,
    ItemDestroyed,
    ItemInactive,
    MissingRequiredPiece,
    NotDeactivated,
    PointerTypeMismatch,
    UnknownFilterPiece,
    UnknownItem,
    UnknownPiece,
    UnknownVersion,
)
from .schema import PieceDefinition, PiecePointer, TypeRegistry

CREATOR_PIECE = "creator"
INCLUDE_INACTIVE = "include_inactive"


@dataclass(frozen=True)
class DanglingRef:
    """Explicit marker a read yields where a pointer targets a destroyed item."""

    item_id: int
    piece_name: str | None = None


@dataclass(frozen=True)
class ItemSnapshot:
    id: int
    type_name: str
    version: int
    active: bool
    piece_values: Mapping[str, Any]


@dataclass
class _Record:
    type_name: str
    version: int
    active: bool
    destroyed: bool


class ItemStore:
    """Single-writer, multi-reader persistence engine.

    Mutations serialize through an internal lock; reads work on plain dict
    state and may run concurrently once mutation traffic quiesces.
    """

    def __init__(self, registry: TypeRegistry) -> None:
        self.registry = registry
        self._lock = threading.RLock()
        self._next_id = 1
        self._catalog: dict[int, _Record] = {}
        # per type: item id -> {piece name: value} holding only that type's own pieces
        self._tables: dict[str, dict[int, dict[str, Any]]] = {}
        # per type: item id -> version -> row as it was before it was superseded
        self._archive: dict[str, dict[int, dict[int, dict[str, Any]]]] = {}

    # -- record access ---------------------------------------------------------

    def _record(self, item_id: int, allow_destroyed: bool = False) -> _Record:
        record = self._catalog.get(item_id)
        if record is None:
            raise UnknownItem(f"no item with id {item_id}")
        if record.destroyed and not allow_destroyed:
            raise ItemDestroyed(f"item {item_id} has been destroyed")
        return record

    def exists(self, item_id: int) -> bool:
        return item_id in self._catalog

    def is_destroyed(self, item_id: int) -> bool:
        record = self._catalog.get(item_id)
        return record is not None and record.destroyed

    def type_of(self, item_id: int) -> str:
        return self._record(item_id, allow_destroyed=True).type_name

    def is_active(self, item_id: int) -> bool:
        return self._record(item_id).active

    def current_version(self, item_id: int) -> int:
        return self._record(item_id).version

    def creator_of(self, item_id: int) -> int | None:
        self._record(item_id)
        return self._tables[self.registry.root_name][item_id].get(CREATOR_PIECE)

    # -- validation --------------------------------------------------------------

    def _agent_type(self) -> str:
        # Whatever type the root's creator piece targets plays the agent role.
        piece = self.registry.piece(self.registry.root_name, CREATOR_PIECE)
        assert piece.target_type is not None
        return piece.target_type

    def _validate_agent(self, agent_id: int, role: str) -> None:
        if not isinstance(agent_id, int) or isinstance(agent_id, bool):
            raise InvalidPieceValue(f"{role} must be an item id, got {agent_id!r}")
        record = self._catalog.get(agent_id)
        if record is None or record.destroyed:
            raise DanglingPointer(f"{role} {agent_id} does not exist")
        if not self.registry.is_subtype(record.type_name, self._agent_type()):
            raise PointerTypeMismatch(
                f"{role} {agent_id} is a {record.type_name}, not a {self._agent_type()}"
            )

    def _validate_value(self, piece: PieceDefinition, value: Any) -> Any:
        if value is None:
            if piece.required:
                raise MissingRequiredPiece(f"piece {piece.name!r} is required")
            return None
        if piece.kind == "text":
            if not isinstance(value, str):
                raise InvalidPieceValue(f"piece {piece.name!r} expects text, got {value!r}")
        elif piece.kind == "integer":
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidPieceValue(f"piece {piece.name!r} expects an integer, got {value!r}")
        elif piece.kind == "boolean":
            if not isinstance(value, bool):
                raise InvalidPieceValue(f"piece {piece.name!r} expects a boolean, got {value!r}")
        elif piece.kind == "item_pointer":
            self._validate_pointer_target(piece, value)
        elif piece.kind == "piece_pointer":
            if not isinstance(value, PiecePointer):
                raise InvalidPieceValue(
                    f"piece {piece.name!r} expects a PiecePointer, got {value!r}"
                )
            target_type = self._validate_pointer_target(piece, value.item_id)
            # Raises UnknownPiece unless the named piece exists on the target.
            self.registry.piece(target_type, value.piece_name)
        return value

    def _validate_pointer_target(self, piece: PieceDefinition, target_id: Any) -> str:
        if not isinstance(target_id, int) or isinstance(target_id, bool):
            raise InvalidPieceValue(f"piece {piece.name!r} expects an item id, got {target_id!r}")
        record = self._catalog.get(target_id)
        if record is None or record.destroyed:
            raise DanglingPointer(f"piece {piece.name!r} points at missing item {target_id}")
        assert piece.target_type is not None
        if not self.registry.is_subtype(record.type_name, piece.target_type):
            raise PointerTypeMismatch(
                f"piece {piece.name!r} needs a {piece.target_type}, "
                f"item {target_id} is a {record.type_name}"
            )
        return record.type_name

    # -- creation -----------------------------------------------------------------

    def create_item(
        self,
        type_name: str,
        piece_values: Mapping[str, Any],
        creator: int | None,
    ) -> ItemSnapshot:
        """Create an item; ``creator=None`` lets an agent-typed item create itself.

        Self-creation exists so the first agent of an installation can be
        made before any other agent exists to own it.
        """
        with self._lock:
            self.registry.get(type_name)
            pieces = {p.name: p for p in self.registry.all_pieces(type_name)}
            if CREATOR_PIECE in piece_values:
                raise ImmutablePiece("creator is set from the acting agent, not as a piece")
            for name in piece_values:
                if name not in pieces:
                    raise UnknownPiece(f"type {type_name!r} has no piece {name!r}")

            if creator is None:
                if not self.registry.is_subtype(type_name, self._agent_type()):
                    raise DanglingPointer(
                        f"only {self._agent_type()} items may be self-created"
                    )
            else:
                self._validate_agent(creator, CREATOR_PIECE)

            values: dict[str, Any] = {}
            for name, piece in pieces.items():
                if name == CREATOR_PIECE:
                    continue
                values[name] = self._validate_value(piece, piece_values.get(name))

            item_id = self._next_id
            self._next_id += 1
            values[CREATOR_PIECE] = item_id if creator is None else creator

            self._catalog[item_id] = _Record(
                type_name=type_name, version=1, active=True, destroyed=False
            )
            for ancestor in self.registry.ancestry(type_name):
                row = {p.name: values[p.name] for p in self.registry.get(ancestor).own_pieces}
                self._tables.setdefault(ancestor, {})[item_id] = row
            return self.get_item(item_id)

    # -- updates --------------------------------------------------------------------

    def update_item(
        self, item_id: int, changed_pieces: Mapping[str, Any], editor: int
    ) -> ItemSnapshot:
        with self._lock:
            record = self._record(item_id)
            if not record.active:
                raise ItemInactive(f"item {item_id} is deactivated")
            self._validate_agent(editor, "editor")

            pieces = {p.name: p for p in self.registry.all_pieces(record.type_name)}
            for name in changed_pieces:
                if name in ("id", CREATOR_PIECE):
                    raise ImmutablePiece(f"piece {name!r} is immutable")
                if name not in pieces:
                    raise UnknownPiece(f"type {record.type_name!r} has no piece {name!r}")
            validated = {
                name: self._validate_value(pieces[name], value)
                for name, value in changed_pieces.items()
            }

            # Archive the full prior state across every ancestor table, then apply.
            for ancestor in self.registry.ancestry(record.type_name):
                row = self._tables[ancestor][item_id]
                self._archive.setdefault(ancestor, {}).setdefault(item_id, {})[
                    record.version
                ] = dict(row)
            for name, value in validated.items():
                owner = self.registry.owner_of_piece(record.type_name, name)
                self._tables[owner][item_id][name] = value
            record.version += 1
            return self.get_item(item_id)

    # -- retrieval ---------------------------------------------------------------

    def _assemble(self, item_id: int, record: _Record, rows_for: Any) -> ItemSnapshot:
        values: dict[str, Any] = {}
        for piece in self.registry.all_pieces(record.type_name):
            owner = self.registry.owner_of_piece(record.type_name, piece.name)
            value = rows_for(owner)[piece.name]
            values[piece.name] = self._mark_dangling(piece, value)
        return ItemSnapshot(
            id=item_id,
            type_name=record.type_name,
            version=record.version,
            active=record.active,
            piece_values=values,
        )

    def _mark_dangling(self, piece: PieceDefinition, value: Any) -> Any:
        if piece.kind == "item_pointer" and isinstance(value, int):
            if self.is_destroyed(value):
                return DanglingRef(item_id=value)
        elif piece.kind == "piece_pointer" and isinstance(value, PiecePointer):
            if self.is_destroyed(value.item_id):
                return DanglingRef(item_id=value.item_id, piece_name=value.piece_name)
        return value

    def get_item(self, item_id: int) -> ItemSnapshot:
        record = self._record(item_id)
        return self._assemble(item_id, record, lambda t: self._tables[t][item_id])

    def get_version(self, item_id: int, version: int) -> ItemSnapshot:
        record = self._record(item_id)
        if not isinstance(version, int) or isinstance(version, bool):
            raise UnknownVersion(f"bad version number {version!r}")
        if version < 1 or version > record.version:
            raise UnknownVersion(
                f"item {item_id} has versions 1..{record.version}, not {version}"
            )
        if version == record.version:
            return self.get_item(item_id)
        snapshot = self._assemble(
            item_id, record, lambda t: self._archive[t][item_id][version]
        )
        return ItemSnapshot(
            id=snapshot.id,
            type_name=snapshot.type_name,
            version=version,
            active=record.active,
            piece_values=snapshot.piece_values,
        )

    def archived_versions(self, item_id: int) -> list[int]:
        self._record(item_id)
        return sorted(self._archive.get(self.registry.root_name, {}).get(item_id, {}))

    # -- listing ------------------------------------------------------------------

    def list_items(
        self,
        type_name: str,
        include_subtypes: bool = True,
        filters: Mapping[str, Any] | None = None,
    ) -> list[int]:
        """Ids of items with a row in this type's table, ascending.

        ``filters`` are equality predicates on piece values; the reserved key
        ``include_inactive`` widens the result to deactivated items.
        Destroyed items never appear (their rows are gone).
        """
        self.registry.get(type_name)
        filters = dict(filters or {})
        include_inactive = bool(filters.pop(INCLUDE_INACTIVE, False))
        piece_names = {p.name for p in self.registry.all_pieces(type_name)}
        for name in filters:
            if name not in piece_names:
                raise UnknownFilterPiece(f"type {type_name!r} has no piece {name!r}")

        result = []
        for item_id in self._tables.get(type_name, {}):
            record = self._catalog[item_id]
            if not include_subtypes and record.type_name != type_name:
                continue
            if not record.active and not include_inactive:
                continue
            if all(
                self._raw_value(item_id, record.type_name, name) == wanted
                for name, wanted in filters.items()
            ):
                result.append(item_id)
        return sorted(result)

    def _raw_value(self, item_id: int, type_name: str, piece_name: str) -> Any:
        owner = self.registry.owner_of_piece(type_name, piece_name)
        return self._tables[owner][item_id][piece_name]

    # -- deletion protocol ----------------------------------------------------------

    def deactivate(self, item_id: int, agent: int) -> None:
        with self._lock:
            record = self._record(item_id)
            self._validate_agent(agent, "agent")
            if not record.active:
                raise AlreadyInactive(f"item {item_id} is already inactive")
            record.active = False

    def reactivate(self, item_id: int, agent: int) -> None:
        with self._lock:
            record = self._record(item_id)
            self._validate_agent(agent, "agent")
            if record.active:
                raise AlreadyActive(f"item {item_id} is already active")
            record.active = True

    def destroy(self, item_id: int, agent: int) -> None:
        """Irreversibly scrub every stored value of the item.

        Requires prior deactivation at this engine boundary, not just in UIs.
        Only the (id, type, destroyed) tombstone survives, so the id is never
        reused and pointers at it read as explicit dangling markers.
        """
        with self._lock:
            record = self._catalog.get(item_id)
            if record is None:
                raise UnknownItem(f"no item with id {item_id}")
            if record.destroyed:
                raise AlreadyDestroyed(f"item {item_id} is already destroyed")
            self._validate_agent(agent, "agent")
            if record.active:
                raise NotDeactivated(f"item {item_id} must be deactivated before destroy")
            for ancestor in self.registry.ancestry(record.type_name):
                self._tables.get(ancestor, {}).pop(item_id, None)
                self._archive.get(ancestor, {}).pop(item_id, None)
            record.destroyed = True
            record.active = False
            record.version = 0

    # -- introspection ---------------------------------------------------------------

    def table_counts(self) -> dict[str, int]:
        """Live row count per logical table, for every defined type."""
        return {name: len(self._tables.get(name, {})) for name in self.registry.type_names()}

    def all_item_ids(self, include_destroyed: bool = False) -> list[int]:
        return sorted(
            item_id
            for item_id, record in self._catalog.items()
            if include_destroyed or not record.destroyed
        )

    def serialize_state(self) -> str:
        """The entire storage state as canonical text (used by scrub checks)."""
        return json.dumps(self.to_state(), sort_keys=True, ensure_ascii=False)

    # -- persistence -----------------------------------------------------------------

    def to_state(self) -> dict[str, Any]:
        def encode_row(row: dict[str, Any]) -> dict[str, Any]:
            return {name: encode_value(value) for name, value in row.items()}

        return {
            "next_id": self._next_id,
            "catalog": {
                str(item_id): {
                    "type": r.type_name,
                    "version": r.version,
                    "active": r.active,
                    "destroyed": r.destroyed,
                }
                for item_id, r in sorted(self._catalog.items())
            },
            "tables": {
                type_name: {str(i): encode_row(row) for i, row in sorted(rows.items())}
                for type_name, rows in sorted(self._tables.items())
            },
            "archive": {
                type_name: {
                    str(i): {str(v): encode_row(row) for v, row in sorted(versions.items())}
                    for i, versions in sorted(per_item.items())
                }
                for type_name, per_item in sorted(self._archive.items())
            },
        }

    @classmethod
    def from_state(cls, registry: TypeRegistry, state: Mapping[str, Any]) -> "ItemStore":
        store = cls(registry)
        store._next_id = int(state["next_id"])
        for item_id, r in state["catalog"].items():
            store._catalog[int(item_id)] = _Record(
                type_name=r["type"],
                version=int(r["version"]),
                active=bool(r["active"]),
                destroyed=bool(r["destroyed"]),
            )
        for type_name, rows in state["tables"].items():
            pieces = {p.name: p for p in registry.get(type_name).own_pieces}
            store._tables[type_name] = {
                int(i): {name: decode_value(pieces[name], v) for name, v in row.items()}
                for i, row in rows.items()
            }
        for type_name, per_item in state.get("archive", {}).items():
            pieces = {p.name: p for p in registry.get(type_name).own_pieces}
            store._archive[type_name] = {
                int(i): {
                    int(v): {name: decode_value(pieces[name], val) for name, val in row.items()}
                    for v, row in versions.items()
                }
                for i, versions in per_item.items()
            }
        return store


def encode_value(value: Any) -> Any:
    """JSON-safe encoding of a stored piece value."""
    if isinstance(value, PiecePointer):
        return {"item_id": value.item_id, "piece_name": value.piece_name}
    return value


def decode_value(piece: PieceDefinition, encoded: Any) -> Any:
    if encoded is not None and piece.kind == "piece_pointer":
        return PiecePointer(item_id=int(encoded["item_id"]), piece_name=encoded["piece_name"])
    return encoded
