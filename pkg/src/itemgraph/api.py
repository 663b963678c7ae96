"""Wire-level representations and the portable export bundle.

The JSON surface is deliberately explicit: every piece is tagged with its
kind, dangling pointers carry a marker instead of pretending to be live
references, and item payloads embed the links a client needs so nothing has
to be derived from URL conventions.

An export bundle is a canonical, self-checksummed snapshot of everything an
installation owns: schema, every item with all archived versions, the
membership index, permission grants and the id counters.  Importing it into
a fresh installation reproduces reads exactly; importing over existing data
is refused.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Mapping

from .annotations import AnnotationRecord
from .collections import MEMBERSHIP_TYPE
from .engine import ContentEngine
from .errors import ChecksumMismatch, FormatVersionMismatch, NonEmptyTarget
from .schema import PiecePointer, registry_to_defs
from .store import DanglingRef, INCLUDE_INACTIVE, ItemSnapshot

WIRE_FORMAT_VERSION = "1"


def canonical_json(payload: Any) -> str:
    """One spelling per value: sorted keys, no whitespace, raw unicode."""
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# -- item payloads ----------------------------------------------------------


def wire_value(value: Any) -> dict[str, Any]:
    if isinstance(value, DanglingRef):
        wired: dict[str, Any] = {"value": value.item_id, "dangling": True}
        if value.piece_name is not None:
            wired["piece_name"] = value.piece_name
        return wired
    if isinstance(value, PiecePointer):
        return {"value": {"item_id": value.item_id, "piece_name": value.piece_name}}
    return {"value": value}


def wire_item(
    engine: ContentEngine,
    agent: int | None,
    snapshot: ItemSnapshot,
    base_url: str,
) -> dict[str, Any]:
    """A permission-reduced snapshot as a JSON payload with link relations."""
    base = base_url.rstrip("/")
    defs = {p.name: p for p in engine.registry.all_pieces(snapshot.type_name)}
    pieces = {}
    for name, value in snapshot.piece_values.items():
        entry: dict[str, Any] = {"kind": defs[name].kind}
        entry.update(wire_value(value))
        pieces[name] = entry
    return {
        "id": snapshot.id,
        "type_name": snapshot.type_name,
        "version": snapshot.version,
        "active": snapshot.active,
        "pieces": pieces,
        "links": {
            "self": f"{base}/item/{snapshot.id}",
            "versions": f"{base}/item/{snapshot.id}/versions",
            "annotations": f"{base}/item/{snapshot.id}/annotations",
        },
    }


def wire_annotation(record: AnnotationRecord, base_url: str) -> dict[str, Any]:
    base = base_url.rstrip("/")
    payload = record.as_dict()
    payload["links"] = {"self": f"{base}/item/{record.annotation_id}"}
    return payload


# -- export / import ----------------------------------------------------------


def _membership_index(engine: ContentEngine) -> list[dict[str, Any]]:
    index = []
    for membership_id in engine.store.list_items(
        MEMBERSHIP_TYPE, include_subtypes=True, filters={INCLUDE_INACTIVE: True}
    ):
        snapshot = engine.store.get_item(membership_id)

        def plain(value: Any) -> Any:
            return value.item_id if isinstance(value, DanglingRef) else value

        index.append(
            {
                "membership": membership_id,
                "collection": plain(snapshot.piece_values.get("collection_pointer")),
                "member": plain(snapshot.piece_values.get("member_pointer")),
                "active": snapshot.active,
            }
        )
    return index


def bundle_checksum(payload: Mapping[str, Any]) -> str:
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
    return f"sha256:{digest}"


def export_bundle(engine: ContentEngine) -> dict[str, Any]:
    payload = {
        "schema": registry_to_defs(engine.registry),
        "store": engine.store.to_state(),
        "memberships": _membership_index(engine),
        "permissions": engine.permissions.to_state(),
    }
    return {
        "manifest": {
            "format_version": WIRE_FORMAT_VERSION,
            "checksum": bundle_checksum(payload),
        },
        **payload,
    }


def dumps_bundle(bundle: Mapping[str, Any]) -> str:
    return canonical_json(bundle) + "\n"


def import_bundle(
    bundle: Mapping[str, Any], target: ContentEngine | None = None
) -> ContentEngine:
    """Rebuild an installation from a bundle.

    ``target`` (when given) is the installation being imported into; it must
    be completely empty, since imported ids and version counters are only
    meaningful from a blank slate.
    """
    manifest = bundle.get("manifest") or {}
    found = manifest.get("format_version")
    if found != WIRE_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"bundle format {found!r}, this build reads {WIRE_FORMAT_VERSION!r}"
        )
    payload = {key: value for key, value in bundle.items() if key != "manifest"}
    expected = manifest.get("checksum")
    actual = bundle_checksum(payload)
    if expected != actual:
        raise ChecksumMismatch(f"bundle checksum {expected!r} does not match {actual!r}")

    if target is not None:
        untouched = (
            not target.store.all_item_ids(include_destroyed=True)
            and not target.permissions.all_grants()
        )
        if not untouched:
            raise NonEmptyTarget("imports only land in a fresh installation")

    return ContentEngine.from_state(
        {
            "format": 1,
            "schema": payload["schema"],
            "store": payload["store"],
            "permissions": payload["permissions"],
        }
    )
