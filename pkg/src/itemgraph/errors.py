"""Exception hierarchy for the engine.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures 1:1 without string matching on messages.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine failures."""

    code = "engine_error"


# --- schema ---------------------------------------------------------------

class SchemaError(EngineError):
    code = "schema_error"


class UnknownType(SchemaError):
    code = "unknown_type"


class UnknownParent(SchemaError):
    code = "unknown_parent"


class DuplicateTypeName(SchemaError):
    code = "duplicate_type_name"


class PieceNameCollision(SchemaError):
    code = "piece_name_collision"


class CycleDetected(SchemaError):
    code = "cycle_detected"


class RootAlreadyDefined(SchemaError):
    code = "root_already_defined"


class UnknownPiece(SchemaError):
    code = "unknown_piece"


class SchemaFileError(SchemaError):
    code = "schema_file_error"


# --- store ----------------------------------------------------------------

class StoreError(EngineError):
    code = "store_error"


class UnknownItem(StoreError):
    code = "unknown_item"


class UnknownVersion(StoreError):
    code = "unknown_version"


class ItemDestroyed(StoreError):
    """The id exists only as a tombstone."""

    code = "item_destroyed"


class ItemInactive(StoreError):
    code = "item_inactive"


class MissingRequiredPiece(StoreError):
    code = "missing_required_piece"


class InvalidPieceValue(StoreError):
    code = "invalid_piece_value"


class DanglingPointer(StoreError):
    code = "dangling_pointer"


class PointerTypeMismatch(StoreError):
    code = "pointer_type_mismatch"


class ImmutablePiece(StoreError):
    code = "immutable_piece"


class UnknownFilterPiece(StoreError):
    code = "unknown_filter_piece"


class AlreadyInactive(StoreError):
    code = "already_inactive"


class AlreadyActive(StoreError):
    code = "already_active"


class NotDeactivated(StoreError):
    """Destroy was attempted on an item that is still active."""

    code = "not_deactivated"


class AlreadyDestroyed(StoreError):
    code = "already_destroyed"


# --- collections ------------------------------------------------------------

class NotACollection(EngineError):
    code = "not_a_collection"


class DuplicateMembership(EngineError):
    code = "duplicate_membership"


# --- annotations ------------------------------------------------------------

class NotATextDocument(EngineError):
    code = "not_a_text_document"


class OffsetOutOfRange(EngineError):
    code = "offset_out_of_range"


class DanglingSource(EngineError):
    """The item an excerpt points into has been destroyed."""

    code = "dangling_source"


# --- permissions ------------------------------------------------------------

class PermissionDenied(EngineError):
    code = "permission_denied"


class UnknownAbility(EngineError):
    code = "unknown_ability"


class UnknownSubject(EngineError):
    code = "unknown_subject"


class InvalidPieceAbility(EngineError):
    """Piece-scoped grants are only meaningful for view/edit."""

    code = "invalid_piece_ability"


class UnknownGrant(EngineError):
    code = "unknown_grant"


# --- viewers ----------------------------------------------------------------

class DuplicateViewer(EngineError):
    code = "duplicate_viewer"


class NoViewer(EngineError):
    code = "no_viewer"


class ViewerTypeMismatch(EngineError):
    code = "viewer_type_mismatch"


class UnknownAction(EngineError):
    code = "unknown_action"


# --- export / import --------------------------------------------------------

class FormatVersionMismatch(EngineError):
    code = "format_version_mismatch"


class ChecksumMismatch(EngineError):
    code = "checksum_mismatch"


class NonEmptyTarget(EngineError):
    code = "non_empty_target"
