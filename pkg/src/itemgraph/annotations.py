"""Annotations as first-class items: comments, transclusions, excerpts.

Comments anchor to an (item, version) pair, transclusions to an exact
character offset inside one version of a text document, excerpts to a named
piece of another item.  Because every annotation is an ordinary item, it
versions, carries permissions and deactivates like anything else; anchors
are immutable once written, so editing the annotated item never silently
remaps what an annotation points at.

Offsets count Unicode code points, which is what ``len`` measures on a
Python str.  Clients working in UTF-16 must convert before calling in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .errors import (
    DanglingSource,
    ItemInactive,
    NotATextDocument,
    OffsetOutOfRange,
    UnknownItem,
    UnknownVersion,
)
from .permissions import PermissionEngine
from .schema import PiecePointer
from .store import DanglingRef, ItemStore

COMMENT_TYPE = "Comment"
TEXT_COMMENT_TYPE = "TextComment"
TRANSCLUSION_TYPE = "Transclusion"
EXCERPT_TYPE = "Excerpt"
TEXT_DOCUMENT_TYPE = "TextDocument"

COMMENTED_ITEM = "commented_item"
ITEM_VERSION_NUMBER = "item_version_number"
DOCUMENT_POINTER = "document_pointer"
DOCUMENT_VERSION = "document_version"
CHARACTER_OFFSET = "character_offset"
TRANSCLUSION_TARGET = "target_item"
SOURCE_PIECE = "source_piece"
BODY_PIECE = "body"

# Anchors never move once written; editing these would silently repoint
# an annotation, so updates must replace the annotation instead.
ANCHOR_PIECES: dict[str, frozenset[str]] = {
    COMMENT_TYPE: frozenset({COMMENTED_ITEM, ITEM_VERSION_NUMBER}),
    TRANSCLUSION_TYPE: frozenset(
        {DOCUMENT_POINTER, DOCUMENT_VERSION, CHARACTER_OFFSET, TRANSCLUSION_TARGET}
    ),
    EXCERPT_TYPE: frozenset({SOURCE_PIECE}),
}


@dataclass(frozen=True)
class AnnotationRecord:
    annotation_id: int
    kind: str  # "comment" or "transclusion"
    type_name: str
    anchored_version: int
    offset: int | None = None
    referenced_item: int | None = None

    def sort_key(self) -> tuple[int, int]:
        # comments precede positioned transclusions, then document order
        return (self.offset if self.offset is not None else -1, self.annotation_id)

    def as_dict(self) -> dict[str, Any]:
        return {
            "id": self.annotation_id,
            "kind": self.kind,
            "type_name": self.type_name,
            "anchored_version": self.anchored_version,
            "offset": self.offset,
            "referenced_item": self.referenced_item,
        }


@dataclass(frozen=True)
class ExcerptValue:
    source_item: int
    source_piece: str
    value: Any


def _anchor_version(store: ItemStore, target: Any, version: Any) -> None:
    """Shared guard: a declared anchor version must exist on the target."""
    if not isinstance(target, int) or isinstance(target, bool):
        return  # the store's own pointer validation reports this
    if not isinstance(version, int) or isinstance(version, bool):
        return
    if not store.exists(target) or store.is_destroyed(target):
        return
    current = store.current_version(target)
    if not 1 <= version <= current:
        raise UnknownVersion(
            f"item {target} has versions 1..{current}, not {version}"
        )


def check_new_comment(store: ItemStore, piece_values: Mapping[str, Any]) -> None:
    _anchor_version(
        store, piece_values.get(COMMENTED_ITEM), piece_values.get(ITEM_VERSION_NUMBER)
    )


def check_new_transclusion(store: ItemStore, piece_values: Mapping[str, Any]) -> None:
    doc = piece_values.get(DOCUMENT_POINTER)
    if isinstance(doc, int) and not isinstance(doc, bool) and store.exists(doc):
        if not store.is_destroyed(doc):
            doc_type = store.type_of(doc)
            if not store.registry.is_subtype(doc_type, TEXT_DOCUMENT_TYPE):
                raise NotATextDocument(f"item {doc} is a {doc_type}, not a text document")
    _anchor_version(store, doc, piece_values.get(DOCUMENT_VERSION))

    offset = piece_values.get(CHARACTER_OFFSET)
    version = piece_values.get(DOCUMENT_VERSION)
    if not isinstance(offset, int) or isinstance(offset, bool):
        return
    if not isinstance(doc, int) or not isinstance(version, int):
        return
    if not store.exists(doc) or store.is_destroyed(doc):
        return
    body = store.get_version(doc, version).piece_values.get(BODY_PIECE) or ""
    if not 0 <= offset <= len(body):
        raise OffsetOutOfRange(
            f"offset {offset} outside 0..{len(body)} for item {doc} version {version}"
        )


class AnnotationService:
    def __init__(self, store: ItemStore, permissions: PermissionEngine) -> None:
        self._store = store
        self._permissions = permissions

    def create_comment(
        self, agent: int | None, item_id: int, item_version: int, body: str | None
    ) -> int:
        self._store.current_version(item_id)  # raises UnknownItem / ItemDestroyed
        values = {
            COMMENTED_ITEM: item_id,
            ITEM_VERSION_NUMBER: item_version,
            BODY_PIECE: body,
        }
        check_new_comment(self._store, values)
        self._permissions.require(agent, "comment_on", item_id)
        return self._store.create_item(TEXT_COMMENT_TYPE, values, creator=agent).id

    def create_transclusion(
        self,
        agent: int | None,
        document_id: int,
        document_version: int,
        character_offset: int,
        target_id: int,
    ) -> int:
        self._store.current_version(document_id)
        if not self._store.exists(target_id) or self._store.is_destroyed(target_id):
            raise UnknownItem(f"no item with id {target_id}")
        values = {
            DOCUMENT_POINTER: document_id,
            DOCUMENT_VERSION: document_version,
            CHARACTER_OFFSET: character_offset,
            TRANSCLUSION_TARGET: target_id,
        }
        check_new_transclusion(self._store, values)
        self._permissions.require(agent, "comment_on", document_id)
        return self._store.create_item(TRANSCLUSION_TYPE, values, creator=agent).id

    def create_excerpt(self, agent: int | None, source_item: int, source_piece: str) -> int:
        self._store.current_version(source_item)
        self._store.registry.piece(self._store.type_of(source_item), source_piece)
        # excerpting is a read; you may only excerpt what you can see
        self._permissions.require(agent, "view", source_item, piece=source_piece)
        values = {SOURCE_PIECE: PiecePointer(source_item, source_piece)}
        return self._store.create_item(EXCERPT_TYPE, values, creator=agent).id

    def annotations_for(
        self, agent: int | None, item_id: int, version: int | None = None
    ) -> list[AnnotationRecord]:
        """Visible annotations anchored to one version, in document order."""
        current = self._store.current_version(item_id)
        if version is None:
            version = current
        if not 1 <= version <= current:
            raise UnknownVersion(f"item {item_id} has versions 1..{current}, not {version}")

        records = []
        for comment_id in self._store.list_items(
            COMMENT_TYPE,
            include_subtypes=True,
            filters={COMMENTED_ITEM: item_id, ITEM_VERSION_NUMBER: version},
        ):
            if not self._permissions.can(agent, "view", comment_id):
                continue
            records.append(
                AnnotationRecord(
                    annotation_id=comment_id,
                    kind="comment",
                    type_name=self._store.type_of(comment_id),
                    anchored_version=version,
                )
            )
        for transclusion_id in self._store.list_items(
            TRANSCLUSION_TYPE,
            include_subtypes=True,
            filters={DOCUMENT_POINTER: item_id, DOCUMENT_VERSION: version},
        ):
            if not self._permissions.can(agent, "view", transclusion_id):
                continue
            snapshot = self._store.get_item(transclusion_id)
            referenced = snapshot.piece_values.get(TRANSCLUSION_TARGET)
            if isinstance(referenced, DanglingRef):
                referenced = referenced.item_id
            records.append(
                AnnotationRecord(
                    annotation_id=transclusion_id,
                    kind="transclusion",
                    type_name=self._store.type_of(transclusion_id),
                    anchored_version=version,
                    offset=snapshot.piece_values.get(CHARACTER_OFFSET),
                    referenced_item=referenced,
                )
            )
        records.sort(key=AnnotationRecord.sort_key)
        return records

    def resolve_excerpt(self, agent: int | None, excerpt_id: int) -> ExcerptValue:
        """Follow an excerpt to the current value of the piece it names."""
        self._store.current_version(excerpt_id)
        excerpt_type = self._store.type_of(excerpt_id)
        if not self._store.registry.is_subtype(excerpt_type, EXCERPT_TYPE):
            raise UnknownItem(f"item {excerpt_id} is a {excerpt_type}, not an Excerpt")
        pointer = self._store.get_item(excerpt_id).piece_values[SOURCE_PIECE]
        if isinstance(pointer, DanglingRef):
            raise DanglingSource(f"excerpt {excerpt_id} points at a destroyed item")
        assert isinstance(pointer, PiecePointer)
        if not self._store.is_active(pointer.item_id):
            raise ItemInactive(f"excerpt source {pointer.item_id} is deactivated")
        self._permissions.require(agent, "view", pointer.item_id, piece=pointer.piece_name)
        value = self._store.get_item(pointer.item_id).piece_values.get(pointer.piece_name)
        return ExcerptValue(
            source_item=pointer.item_id, source_piece=pointer.piece_name, value=value
        )
