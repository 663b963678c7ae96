"""Item type registry: an inheritance hierarchy with typed pieces.

Types form a DAG with multiple inheritance rooted at a single parentless
type (named ``Item`` in the bootstrap hierarchy).  Each type owns an ordered
list of piece definitions and inherits every piece of its ancestors.  The
registry is append-only: once defined, a descriptor never changes, which is
what makes the versioning and multi-table storage semantics unambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

from .errors import (
    CycleDetected,
    DuplicateTypeName,
    PieceNameCollision,
    RootAlreadyDefined,
    SchemaError,
    SchemaFileError,
    UnknownParent,
    UnknownPiece,
    UnknownType,
)

PIECE_KINDS = ("text", "integer", "boolean", "item_pointer", "piece_pointer")
POINTER_KINDS = ("item_pointer", "piece_pointer")

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class PiecePointer:
    """Value of a piece_pointer piece: a specific piece of another item."""

    item_id: int
    piece_name: str


@dataclass(frozen=True)
class PieceDefinition:
    """A named, typed field owned by exactly one item type."""

    name: str
    kind: str
    target_type: str | None = None
    required: bool = False

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name):
            raise SchemaError(f"invalid piece name: {self.name!r}")
        if self.kind not in PIECE_KINDS:
            raise SchemaError(f"unknown piece kind: {self.kind!r}")
        if self.kind in POINTER_KINDS:
            if not self.target_type:
                raise SchemaError(f"piece {self.name!r}: pointer kinds need a target_type")
        elif self.target_type is not None:
            raise SchemaError(f"piece {self.name!r}: target_type only valid on pointer kinds")


@dataclass(frozen=True)
class TypeDescriptor:
    name: str
    parents: tuple[str, ...]
    own_pieces: tuple[PieceDefinition, ...]


class TypeRegistry:
    """Append-only registry of item types.

    Writes happen during a single-threaded definition phase; afterwards the
    registry is read-only and safe to share between threads.
    """

    def __init__(self) -> None:
        self._types: dict[str, TypeDescriptor] = {}
        self._root: str | None = None

    # -- definition ---------------------------------------------------------

    def define(
        self,
        name: str,
        parents: Iterable[str],
        own_pieces: Iterable[PieceDefinition] = (),
    ) -> TypeDescriptor:
        parents = tuple(parents)
        own_pieces = tuple(own_pieces)
        if name in parents:
            raise CycleDetected(f"type {name!r} cannot be its own parent")
        if not _NAME_RE.match(name):
            raise SchemaError(f"invalid type name: {name!r}")
        if name in self._types:
            raise DuplicateTypeName(f"type {name!r} is already defined")
        if not parents:
            if self._root is not None:
                raise RootAlreadyDefined(
                    f"root type {self._root!r} exists; {name!r} must declare a parent"
                )
        for parent in parents:
            if parent not in self._types:
                raise UnknownParent(f"unknown parent type {parent!r}")

        self._check_piece_names(name, parents, own_pieces)

        descriptor = TypeDescriptor(name=name, parents=parents, own_pieces=own_pieces)
        self._types[name] = descriptor
        if not parents:
            self._root = name
        return descriptor

    def _check_piece_names(
        self, name: str, parents: tuple[str, ...], own_pieces: tuple[PieceDefinition, ...]
    ) -> None:
        # A piece name may be reachable through several parents only when all
        # routes lead back to the same owning ancestor (diamond).
        owner_of: dict[str, str] = {}
        seen_ancestors: set[str] = set()
        for parent in parents:
            for ancestor in self.ancestry(parent):
                if ancestor in seen_ancestors:
                    continue
                seen_ancestors.add(ancestor)
                for piece in self._types[ancestor].own_pieces:
                    other = owner_of.get(piece.name)
                    if other is not None and other != ancestor:
                        raise PieceNameCollision(
                            f"piece {piece.name!r} defined independently by "
                            f"{other!r} and {ancestor!r}"
                        )
                    owner_of[piece.name] = ancestor
        own_names: set[str] = set()
        for piece in own_pieces:
            if piece.name in own_names:
                raise PieceNameCollision(f"piece {piece.name!r} listed twice on {name!r}")
            own_names.add(piece.name)
            if piece.name in owner_of:
                raise PieceNameCollision(
                    f"piece {piece.name!r} on {name!r} collides with the one "
                    f"inherited from {owner_of[piece.name]!r}"
                )

    def validate_pointer_targets(self) -> None:
        """Check that every pointer piece targets a defined type.

        Target types may be forward references while a schema file loads
        (``Item.creator`` points at ``Agent``, defined later), so this runs
        after a batch of definitions rather than inside ``define``.
        """
        for descriptor in self._types.values():
            for piece in descriptor.own_pieces:
                if piece.target_type and piece.target_type not in self._types:
                    raise UnknownType(
                        f"piece {descriptor.name}.{piece.name} targets undefined "
                        f"type {piece.target_type!r}"
                    )

    # -- queries --------------------------------------------------------------

    @property
    def root_name(self) -> str:
        if self._root is None:
            raise UnknownType("registry has no root type")
        return self._root

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def get(self, name: str) -> TypeDescriptor:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownType(f"unknown type {name!r}") from None

    def type_names(self) -> list[str]:
        """All defined type names, in definition order."""
        return list(self._types)

    def descriptors(self) -> Iterator[TypeDescriptor]:
        return iter(self._types.values())

    def is_subtype(self, candidate: str, ancestor: str) -> bool:
        """True iff ``ancestor`` is reachable from ``candidate`` (reflexive)."""
        self.get(ancestor)
        return ancestor in self.ancestry(candidate)

    def ancestry(self, name: str) -> tuple[str, ...]:
        """Deterministic linearization of a type and all its ancestors.

        Depth-first over parents left to right, then duplicates removed
        keeping the last occurrence, which places the type itself first and
        the root last.  Used for storage-table ordering and viewer
        resolution, so it must stay stable across runs.
        """
        self.get(name)
        sequence: list[str] = []
        self._dfs(name, sequence, frozenset())
        last_index = {t: i for i, t in enumerate(sequence)}
        return tuple(t for i, t in enumerate(sequence) if last_index[t] == i)

    def _dfs(self, name: str, out: list[str], on_path: frozenset[str]) -> None:
        if name in on_path:
            raise CycleDetected(f"type hierarchy cycle through {name!r}")
        out.append(name)
        for parent in self._types[name].parents:
            self._dfs(parent, out, on_path | {name})

    def all_pieces(self, name: str) -> tuple[PieceDefinition, ...]:
        """Inherited pieces in linearization order, then own pieces.

        Diamond-shared pieces appear once because each ancestor type appears
        once in the linearization.
        """
        chain = self.ancestry(name)
        pieces: list[PieceDefinition] = []
        for ancestor in chain[1:]:
            pieces.extend(self._types[ancestor].own_pieces)
        pieces.extend(self._types[name].own_pieces)
        return tuple(pieces)

    def piece(self, type_name: str, piece_name: str) -> PieceDefinition:
        for piece in self.all_pieces(type_name):
            if piece.name == piece_name:
                return piece
        raise UnknownPiece(f"type {type_name!r} has no piece {piece_name!r}")

    def owner_of_piece(self, type_name: str, piece_name: str) -> str:
        """The ancestor type whose table stores this piece."""
        for ancestor in self.ancestry(type_name):
            for piece in self._types[ancestor].own_pieces:
                if piece.name == piece_name:
                    return ancestor
        raise UnknownPiece(f"type {type_name!r} has no piece {piece_name!r}")


# -- declarative schema files -------------------------------------------------
#
# Grammar (one directive per line, '#' starts a comment):
#
#   type NAME                      root type, legal once per registry
#   type NAME: PARENT[, PARENT]*   subtype
#   piece NAME: KIND               owned piece of the preceding type
#   piece NAME: KIND -> TARGET     pointer piece (item_pointer/piece_pointer)
#   ... trailing ", required" marks the piece as mandatory
#
# See docs/schema-format.md for the full description.

_TYPE_LINE = re.compile(r"^type\s+(\w+)\s*(?::\s*(.+))?$")
_PIECE_LINE = re.compile(r"^piece\s+(\w+)\s*:\s*(\w+)\s*(?:->\s*(\w+)\s*)?(,\s*required)?$")


def parse_schema_text(text: str) -> list[tuple[str, list[str], list[PieceDefinition]]]:
    """Parse schema source into (name, parents, pieces) entries."""
    entries: list[tuple[str, list[str], list[PieceDefinition]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _TYPE_LINE.match(line)
        if m:
            name, parent_clause = m.groups()
            parents = [p.strip() for p in parent_clause.split(",")] if parent_clause else []
            entries.append((name, parents, []))
            continue
        m = _PIECE_LINE.match(line)
        if m:
            if not entries:
                raise SchemaFileError(f"line {lineno}: piece before any type")
            piece_name, kind, target, required = m.groups()
            try:
                piece = PieceDefinition(
                    name=piece_name,
                    kind=kind,
                    target_type=target,
                    required=required is not None,
                )
            except SchemaError as exc:
                raise SchemaFileError(f"line {lineno}: {exc}") from exc
            entries[-1][2].append(piece)
            continue
        raise SchemaFileError(f"line {lineno}: cannot parse {raw.strip()!r}")
    return entries


def load_schema_text(registry: TypeRegistry, text: str) -> None:
    """Define every type from schema source into ``registry``."""
    for name, parents, pieces in parse_schema_text(text):
        registry.define(name, parents, pieces)
    registry.validate_pointer_targets()


def load_schema_file(registry: TypeRegistry, path: str) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        load_schema_text(registry, fh.read())


def bootstrap_schema() -> TypeRegistry:
    """A fresh registry populated with the core type hierarchy.

    The hierarchy ships as a packaged schema file so installations can read
    and extend it with the same grammar they use for their own types.
    """
    registry = TypeRegistry()
    text = resources.files("itemgraph.data").joinpath("bootstrap.schema").read_text("utf-8")
    load_schema_text(registry, text)
    return registry


def registry_to_defs(registry: TypeRegistry) -> list[dict]:
    """Serialize every type definition, preserving definition order."""
    defs = []
    for descriptor in registry.descriptors():
        defs.append(
            {
                "name": descriptor.name,
                "parents": list(descriptor.parents),
                "pieces": [
                    {
                        "name": piece.name,
                        "kind": piece.kind,
                        "target_type": piece.target_type,
                        "required": piece.required,
                    }
                    for piece in descriptor.own_pieces
                ],
            }
        )
    return defs


def registry_from_defs(defs: list[dict]) -> TypeRegistry:
    registry = TypeRegistry()
    for entry in defs:
        pieces = [
            PieceDefinition(
                name=p["name"],
                kind=p["kind"],
                target_type=p.get("target_type"),
                required=p.get("required", False),
            )
            for p in entry.get("pieces", ())
        ]
        registry.define(entry["name"], list(entry.get("parents", ())), pieces)
    registry.validate_pointer_targets()
    return registry
