"""HTTP/JSON service over the content engine.

Authentication is a static bearer-token table from the installation config;
requests without a token act as the anonymous everyone-subject.  Every
handler delegates to the engine facade, so the wire surface adds no policy
of its own: it only translates payloads and maps engine errors onto HTTP
status codes.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .api import (
    WIRE_FORMAT_VERSION,
    export_bundle,
    import_bundle,
    wire_annotation,
    wire_item,
    wire_value,
)
from .config import ServiceConfig
from .engine import ContentEngine
from .errors import EngineError, PermissionDenied
from .permissions import PermissionGrant
from .schema import PiecePointer, registry_to_defs

# engine error code -> HTTP status; anything unlisted is a 400 validation error
STATUS_BY_CODE = {
    "unknown_type": 404,
    "unknown_parent": 404,
    "unknown_item": 404,
    "unknown_version": 404,
    "unknown_piece": 404,
    "unknown_grant": 404,
    "no_viewer": 404,
    "unknown_action": 404,
    "permission_denied": 403,
    "item_destroyed": 410,
    "item_inactive": 410,
    "dangling_source": 410,
    "duplicate_type_name": 409,
    "root_already_defined": 409,
    "piece_name_collision": 409,
    "already_inactive": 409,
    "already_active": 409,
    "already_destroyed": 409,
    "not_deactivated": 409,
    "immutable_piece": 409,
    "duplicate_membership": 409,
    "duplicate_viewer": 409,
    "non_empty_target": 409,
}


class CreateItemBody(BaseModel):
    type_name: str
    pieces: dict[str, Any] = Field(default_factory=dict)
    self_created: bool = False


class UpdateItemBody(BaseModel):
    pieces: dict[str, Any]


class CommentBody(BaseModel):
    body: Optional[str] = None
    item_version: Optional[int] = None  # default: the current version


class TransclusionBody(BaseModel):
    document_version: int
    character_offset: int
    target_item: int


class ExcerptBody(BaseModel):
    piece: str


class MemberBody(BaseModel):
    member: int


class GrantBody(BaseModel):
    ability: str
    effect: str = "allow"
    subject_kind: str = "everyone"
    subject_id: Optional[int] = None
    target_item: Optional[int] = None
    target_type: Optional[str] = None
    target_piece: Optional[str] = None


class SchemaBody(BaseModel):
    text: str


def acting_agent(request: Request) -> int | None:
    header = request.headers.get("Authorization")
    if not header:
        return None
    scheme, _, token = header.partition(" ")
    config: ServiceConfig = request.app.state.config
    if scheme.lower() != "bearer" or token not in config.tokens:
        raise HTTPException(status_code=401, detail="unrecognized bearer token")
    return config.tokens[token]


def _decode_pieces(engine: ContentEngine, type_name: str, pieces: dict[str, Any]) -> dict:
    """Lift JSON piece values into stored ones (piece pointers become objects)."""
    if type_name not in engine.registry:
        return dict(pieces)
    kinds = {p.name: p.kind for p in engine.registry.all_pieces(type_name)}
    decoded = {}
    for name, value in pieces.items():
        if kinds.get(name) == "piece_pointer" and isinstance(value, dict):
            decoded[name] = PiecePointer(
                item_id=int(value["item_id"]), piece_name=str(value["piece_name"])
            )
        else:
            decoded[name] = value
    return decoded


def create_app(
    engine: ContentEngine | None = None,
    config: ServiceConfig | None = None,
    persist: bool = False,
) -> FastAPI:
    app = FastAPI(title="itemgraph", version=WIRE_FORMAT_VERSION)
    app.state.engine = engine if engine is not None else ContentEngine()
    app.state.config = config if config is not None else ServiceConfig()
    app.state.persist = persist
    app.state.engine.permissions.admin_agents.update(app.state.config.admins)
    # Browser clients live on their own origin; access control is the bearer
    # token, not the Origin header, so any origin may talk to the API.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["Authorization", "Content-Type"],
    )

    def current() -> ContentEngine:
        return app.state.engine

    def base_url() -> str:
        return app.state.config.base_url

    def saved() -> None:
        if app.state.persist:
            current().save(app.state.config.store_path)

    @app.exception_handler(EngineError)
    async def engine_error(request: Request, exc: EngineError) -> JSONResponse:
        status = getattr(exc, "http_status", None) or STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    # -- introspection ----------------------------------------------------------

    @app.get("/")
    def service_root() -> dict:
        return {
            "service": "itemgraph",
            "format_version": WIRE_FORMAT_VERSION,
            "root_type": current().registry.root_name,
        }

    @app.get("/whoami")
    def whoami(agent: int | None = Depends(acting_agent)) -> dict:
        return {"agent": agent, "admin": current().permissions.is_admin(agent)}

    @app.get("/types")
    def list_types() -> dict:
        return {"types": registry_to_defs(current().registry)}

    @app.get("/type/{name}")
    def show_type(name: str) -> dict:
        engine = current()
        descriptor = engine.registry.get(name)
        return {
            "name": descriptor.name,
            "parents": list(descriptor.parents),
            "ancestry": list(engine.registry.ancestry(name)),
            "own_pieces": [
                {
                    "name": p.name,
                    "kind": p.kind,
                    "target_type": p.target_type,
                    "required": p.required,
                }
                for p in descriptor.own_pieces
            ],
            "all_pieces": [
                {
                    "name": p.name,
                    "kind": p.kind,
                    "target_type": p.target_type,
                    "required": p.required,
                    "owner": engine.registry.owner_of_piece(name, p.name),
                }
                for p in engine.registry.all_pieces(name)
            ],
        }

    @app.post("/types", status_code=201)
    def define_types(body: SchemaBody, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        before = set(engine.registry.type_names())
        engine.load_schema(agent, body.text)
        saved()
        return {"defined": sorted(set(engine.registry.type_names()) - before)}

    # -- items ----------------------------------------------------------

    @app.get("/items")
    def list_items(
        type: str = Query(default=None),
        subtypes: bool = True,
        include_inactive: bool = False,
        where: list[str] = Query(default=[]),
        agent: int | None = Depends(acting_agent),
    ) -> dict:
        engine = current()
        type_name = type or engine.registry.root_name
        filters: dict[str, Any] = {}
        kinds = (
            {p.name: p.kind for p in engine.registry.all_pieces(type_name)}
            if type_name in engine.registry
            else {}
        )
        for clause in where:
            name, _, raw = clause.partition(":")
            kind = kinds.get(name)
            value: Any = raw
            if kind in ("integer", "item_pointer"):
                value = int(raw)
            elif kind == "boolean":
                value = raw.lower() in ("1", "true", "yes")
            filters[name] = value
        ids = engine.list_items(
            agent,
            type_name,
            include_subtypes=subtypes,
            filters=filters,
            include_inactive=include_inactive,
        )
        return {"type": type_name, "items": ids}

    @app.post("/item", status_code=201)
    def create_item(body: CreateItemBody, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        pieces = _decode_pieces(engine, body.type_name, body.pieces)
        snapshot = engine.create_item(
            agent, body.type_name, pieces, self_created=body.self_created
        )
        saved()
        viewer_agent = snapshot.id if body.self_created else agent
        return wire_item(engine, viewer_agent, engine.read_item(viewer_agent, snapshot.id), base_url())

    @app.get("/item/{item_id}")
    def get_item(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        return wire_item(engine, agent, engine.read_item(agent, item_id), base_url())

    @app.patch("/item/{item_id}")
    def update_item(
        item_id: int, body: UpdateItemBody, agent: int | None = Depends(acting_agent)
    ) -> dict:
        engine = current()
        type_name = engine.store.type_of(item_id) if engine.store.exists(item_id) else ""
        pieces = _decode_pieces(engine, type_name, body.pieces)
        engine.update_item(agent, item_id, pieces)
        saved()
        return wire_item(engine, agent, engine.read_item(agent, item_id), base_url())

    @app.get("/item/{item_id}/versions")
    def item_versions(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        versions = engine.versions(agent, item_id)
        return {"id": item_id, "versions": versions, "current": versions[-1]}

    @app.get("/item/{item_id}/version/{version}")
    def item_version(
        item_id: int, version: int, agent: int | None = Depends(acting_agent)
    ) -> dict:
        engine = current()
        return wire_item(engine, agent, engine.read_version(agent, item_id, version), base_url())

    @app.post("/item/{item_id}/deactivate")
    def deactivate(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        current().deactivate(agent, item_id)
        saved()
        return {"id": item_id, "active": False}

    @app.post("/item/{item_id}/reactivate")
    def reactivate(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        current().reactivate(agent, item_id)
        saved()
        return {"id": item_id, "active": True}

    @app.post("/item/{item_id}/destroy")
    def destroy(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        current().destroy(agent, item_id)
        saved()
        return {"id": item_id, "destroyed": True}

    # -- annotations ----------------------------------------------------------

    @app.get("/item/{item_id}/annotations")
    def annotations(
        item_id: int,
        version: int | None = None,
        agent: int | None = Depends(acting_agent),
    ) -> dict:
        engine = current()
        records = engine.annotations_for(agent, item_id, version)
        shown = version if version is not None else engine.store.current_version(item_id)
        return {
            "id": item_id,
            "version": shown,
            "annotations": [wire_annotation(r, base_url()) for r in records],
        }

    @app.post("/item/{item_id}/comments", status_code=201)
    def comment(
        item_id: int, body: CommentBody, agent: int | None = Depends(acting_agent)
    ) -> dict:
        engine = current()
        version = (
            body.item_version
            if body.item_version is not None
            else engine.store.current_version(item_id)
        )
        comment_id = engine.create_comment(agent, item_id, version, body.body)
        saved()
        return wire_item(engine, agent, engine.read_item(agent, comment_id), base_url())

    @app.post("/item/{item_id}/transclusions", status_code=201)
    def transclude(
        item_id: int, body: TransclusionBody, agent: int | None = Depends(acting_agent)
    ) -> dict:
        engine = current()
        transclusion_id = engine.create_transclusion(
            agent, item_id, body.document_version, body.character_offset, body.target_item
        )
        saved()
        return wire_item(engine, agent, engine.read_item(agent, transclusion_id), base_url())

    @app.post("/item/{item_id}/excerpts", status_code=201)
    def excerpt(
        item_id: int, body: ExcerptBody, agent: int | None = Depends(acting_agent)
    ) -> dict:
        engine = current()
        excerpt_id = engine.create_excerpt(agent, item_id, body.piece)
        saved()
        return wire_item(engine, agent, engine.read_item(agent, excerpt_id), base_url())

    @app.get("/excerpt/{excerpt_id}")
    def resolve_excerpt(excerpt_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        resolved = engine.resolve_excerpt(agent, excerpt_id)
        payload = {
            "id": excerpt_id,
            "source_item": resolved.source_item,
            "source_piece": resolved.source_piece,
        }
        payload.update(wire_value(resolved.value))
        return payload

    # -- views ----------------------------------------------------------

    @app.get("/item/{item_id}/view")
    def view(
        item_id: int,
        action: str = "item_show",
        viewer: str | None = None,
        version: int | None = None,
        agent: int | None = Depends(acting_agent),
    ) -> dict:
        rendered = current().dispatch(
            agent, item_id, action=action, viewer=viewer, version=version
        )
        return {
            "item_id": rendered.item_id,
            "version": rendered.version,
            "viewer": rendered.viewer,
            "action": rendered.action,
            "content_kind": rendered.content_kind,
            "body": rendered.body,
            "annotations": list(rendered.annotations),
        }

    @app.get("/item/{item_id}/actions")
    def actions(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        return {"id": item_id, "actions": current().actions_for(agent, item_id)}

    # -- collections ----------------------------------------------------------

    @app.get("/collection/{collection_id}/members")
    def members(
        collection_id: int,
        indirect: bool = False,
        agent: int | None = Depends(acting_agent),
    ) -> dict:
        engine = current()
        if indirect:
            ids = engine.indirect_members(agent, collection_id)
            return {"id": collection_id, "indirect": True, "members": ids}
        entries = engine.membership_entries(agent, collection_id)
        return {
            "id": collection_id,
            "indirect": False,
            "members": sorted(e.member_id for e in entries if not e.dangling),
            "entries": [
                {
                    "membership": e.membership_id,
                    "member": e.member_id,
                    "dangling": e.dangling,
                }
                for e in entries
            ],
        }

    @app.post("/collection/{collection_id}/members", status_code=201)
    def add_member(
        collection_id: int, body: MemberBody, agent: int | None = Depends(acting_agent)
    ) -> dict:
        membership_id = current().add_member(agent, collection_id, body.member)
        saved()
        return {"collection": collection_id, "member": body.member, "membership": membership_id}

    @app.delete("/membership/{membership_id}")
    def remove_member(membership_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        current().remove_member(agent, membership_id)
        saved()
        return {"membership": membership_id, "active": False}

    @app.get("/item/{item_id}/collections")
    def item_collections(
        item_id: int, direct: bool = False, agent: int | None = Depends(acting_agent)
    ) -> dict:
        ids = current().collections_of(agent, item_id, direct_only=direct)
        return {"id": item_id, "collections": ids}

    # -- permissions ----------------------------------------------------------

    @app.get("/item/{item_id}/grants")
    def item_grants(item_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        grants = current().grants_for(agent, item_id)
        return {
            "id": item_id,
            "grants": [{"id": gid, **grant.to_dict()} for gid, grant in grants],
        }

    @app.post("/grants", status_code=201)
    def add_grant(body: GrantBody, agent: int | None = Depends(acting_agent)) -> dict:
        grant = PermissionGrant(
            ability=body.ability,
            effect=body.effect,
            subject_kind=body.subject_kind,
            subject_id=body.subject_id,
            target_item=body.target_item,
            target_type=body.target_type,
            target_piece=body.target_piece,
        )
        grant_id = current().grant(agent, grant)
        saved()
        return {"grant_id": grant_id}

    @app.delete("/grant/{grant_id}")
    def drop_grant(grant_id: int, agent: int | None = Depends(acting_agent)) -> dict:
        current().revoke(agent, grant_id)
        saved()
        return {"grant_id": grant_id, "revoked": True}

    # -- export / import ----------------------------------------------------------

    @app.get("/export")
    def export(agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        if not engine.permissions.is_admin(agent):
            raise PermissionDenied("only administrators may export the installation")
        return export_bundle(engine)

    @app.post("/import")
    def run_import(bundle: dict, agent: int | None = Depends(acting_agent)) -> dict:
        engine = current()
        if not engine.permissions.is_admin(agent):
            raise PermissionDenied("only administrators may import a bundle")
        imported = import_bundle(bundle, target=engine)
        imported.permissions.admin_agents.update(app.state.config.admins)
        app.state.engine = imported
        saved()
        return {
            "imported": True,
            "items": len(imported.store.all_item_ids(include_destroyed=True)),
        }

    return app
