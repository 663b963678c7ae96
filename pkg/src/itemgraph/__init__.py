"""itemgraph: a typed, versioned content-object engine.

Everything an installation stores is an item of some type in a
single-inheritance-free hierarchy (multiple parents allowed); items carry
typed pieces, keep every prior version, deactivate before they can be
destroyed, point at each other through referential collections and
annotations, and answer reads through per-piece permissions and
type-dispatched viewers.
"""

from .annotations import AnnotationRecord, AnnotationService, ExcerptValue
from .api import export_bundle, import_bundle, wire_item
from .collections import CollectionService, MembershipEntry
from .engine import ContentEngine
from .errors import EngineError
from .permissions import PermissionEngine, PermissionGrant
from .schema import (
    PieceDefinition,
    PiecePointer,
    TypeDescriptor,
    TypeRegistry,
    bootstrap_schema,
    load_schema_file,
    load_schema_text,
)
from .store import DanglingRef, ItemSnapshot, ItemStore
from .viewers import RenderedView, ViewContext, ViewerRegistry

__version__ = "1.0.0"

__all__ = [
    "AnnotationRecord",
    "AnnotationService",
    "CollectionService",
    "ContentEngine",
    "DanglingRef",
    "EngineError",
    "ExcerptValue",
    "ItemSnapshot",
    "ItemStore",
    "MembershipEntry",
    "PermissionEngine",
    "PermissionGrant",
    "PieceDefinition",
    "PiecePointer",
    "RenderedView",
    "TypeDescriptor",
    "TypeRegistry",
    "ViewContext",
    "ViewerRegistry",
    "bootstrap_schema",
    "export_bundle",
    "import_bundle",
    "load_schema_file",
    "load_schema_text",
    "wire_item",
    "__version__",
]
