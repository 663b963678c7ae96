#!/usr/bin/env python3
"""Command line administration for an itemgraph installation.

The CLI operates directly on the store file named by the config, loading
the engine, applying one operation and writing the store back.  It is a
local, trusted surface: pass ``--as AGENT`` to act as a specific agent, and
add agent ids to the config's ``admins`` list to give them blanket rights.

All failures print a machine-readable JSON error on stderr and exit 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from .api import dumps_bundle, export_bundle, import_bundle, wire_value
from .config import ServiceConfig, load_config, save_config
from .engine import ContentEngine
from .errors import EngineError
from .permissions import PermissionGrant
from .schema import PiecePointer
from .store import ItemSnapshot

DEFAULT_CONFIG = "itemgraph.json"


# -- plumbing ----------------------------------------------------------


def _load(args: argparse.Namespace) -> tuple[ContentEngine, ServiceConfig]:
    config = load_config(args.config)
    engine = ContentEngine.load(config.store_path)
    engine.permissions.admin_agents.update(config.admins)
    return engine, config


def _save(engine: ContentEngine, config: ServiceConfig) -> None:
    engine.save(config.store_path)


def _emit(args: argparse.Namespace, payload: Any, human: str | None = None) -> None:
    if getattr(args, "json", False) or human is None:
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(human)


def _parse_piece(engine: ContentEngine, type_name: str, clause: str) -> tuple[str, Any]:
    name, eq, raw = clause.partition("=")
    if not eq:
        raise SystemExit(f"--piece wants name=value, got {clause!r}")
    kinds = {p.name: p.kind for p in engine.registry.all_pieces(type_name)}
    kind = kinds.get(name)
    value: Any = raw
    if raw == "":
        value = None if kind != "text" else ""
    elif kind in ("integer", "item_pointer"):
        value = int(raw)
    elif kind == "boolean":
        value = raw.lower() in ("1", "true", "yes")
    elif kind == "piece_pointer":
        item_part, colon, piece_part = raw.partition(":")
        if not colon:
            raise SystemExit(f"piece_pointer values look like ITEM:piece, got {raw!r}")
        value = PiecePointer(item_id=int(item_part), piece_name=piece_part)
    return name, value


def _pieces(engine: ContentEngine, type_name: str, clauses: list[str]) -> dict[str, Any]:
    return dict(_parse_piece(engine, type_name, clause) for clause in clauses)


def _snapshot_payload(engine: ContentEngine, snapshot: ItemSnapshot) -> dict[str, Any]:
    pieces = {}
    for name, value in snapshot.piece_values.items():
        pieces[name] = wire_value(value)
    return {
        "id": snapshot.id,
        "type_name": snapshot.type_name,
        "version": snapshot.version,
        "active": snapshot.active,
        "pieces": pieces,
    }


# -- commands ----------------------------------------------------------


def cmd_init(args: argparse.Namespace) -> None:
    config = ServiceConfig(
        store_path=args.store,
        base_url=args.base_url,
        tokens={},
        admins=[],
    )
    if os.path.exists(args.config) and not args.force:
        raise SystemExit(f"{args.config} already exists (use --force to overwrite)")
    engine = ContentEngine()
    engine.save(config.store_path)
    save_config(config, args.config)
    _emit(
        args,
        {"config": args.config, "store": config.store_path},
        f"initialized {config.store_path} (config: {args.config})",
    )


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from .http import create_app

    engine, config = _load(args)
    app = create_app(engine, config, persist=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")


def cmd_type_define(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    before = set(engine.registry.type_names())
    engine.load_schema(args.acting, text)
    _save(engine, config)
    defined = sorted(set(engine.registry.type_names()) - before)
    _emit(args, {"defined": defined}, f"defined: {', '.join(defined) or '(nothing new)'}")


def cmd_type_list(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    names = engine.registry.type_names()
    _emit(args, {"types": names}, "\n".join(names))


def cmd_type_show(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    descriptor = engine.registry.get(args.name)
    payload = {
        "name": descriptor.name,
        "parents": list(descriptor.parents),
        "ancestry": list(engine.registry.ancestry(args.name)),
        "all_pieces": [
            {
                "name": p.name,
                "kind": p.kind,
                "target_type": p.target_type,
                "required": p.required,
                "owner": engine.registry.owner_of_piece(args.name, p.name),
            }
            for p in engine.registry.all_pieces(args.name)
        ],
    }
    lines = [f"{payload['name']} ({' -> '.join(payload['ancestry'])})"]
    for piece in payload["all_pieces"]:
        flags = []
        if piece["target_type"]:
            flags.append(f"-> {piece['target_type']}")
        if piece["required"]:
            flags.append("required")
        suffix = f" ({', '.join(flags)})" if flags else ""
        lines.append(f"  {piece['name']}: {piece['kind']}{suffix} [{piece['owner']}]")
    _emit(args, payload, "\n".join(lines))


def cmd_item_create(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    pieces = _pieces(engine, args.type, args.piece)
    snapshot = engine.create_item(args.acting, args.type, pieces, self_created=args.self_created)
    if args.self_created and snapshot.id not in config.admins:
        # the installation's first agent administers it until it says otherwise
        config.admins.append(snapshot.id)
        save_config(config, args.config)
    _save(engine, config)
    _emit(
        args,
        _snapshot_payload(engine, snapshot),
        f"created {snapshot.type_name} {snapshot.id} (version {snapshot.version})",
    )


def cmd_item_show(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    if args.version is None:
        snapshot = engine.read_item(args.acting, args.id)
    else:
        snapshot = engine.read_version(args.acting, args.id, args.version)
    payload = _snapshot_payload(engine, snapshot)
    lines = [
        f"{snapshot.type_name} {snapshot.id}"
        f" version {snapshot.version}{'' if snapshot.active else ' (deactivated)'}"
    ]
    for name, entry in payload["pieces"].items():
        marker = " (dangling)" if entry.get("dangling") else ""
        lines.append(f"  {name} = {json.dumps(entry['value'], ensure_ascii=False)}{marker}")
    _emit(args, payload, "\n".join(lines))


def cmd_item_update(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    type_name = engine.store.type_of(args.id) if engine.store.exists(args.id) else ""
    pieces = _pieces(engine, type_name, args.piece) if type_name else {}
    snapshot = engine.update_item(args.acting, args.id, pieces)
    _save(engine, config)
    _emit(
        args,
        _snapshot_payload(engine, snapshot),
        f"updated {snapshot.type_name} {snapshot.id} to version {snapshot.version}",
    )


def cmd_item_list(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    type_name = args.type or engine.registry.root_name
    filters = dict(
        _parse_piece(engine, type_name, clause.replace(":", "=", 1))
        for clause in args.where
    )
    ids = engine.list_items(
        args.acting,
        type_name,
        include_subtypes=not args.exact_type,
        filters=filters,
        include_inactive=args.include_inactive,
    )
    _emit(args, {"type": type_name, "items": ids}, "\n".join(str(i) for i in ids))


def cmd_item_versions(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    versions = engine.versions(args.acting, args.id)
    _emit(args, {"id": args.id, "versions": versions}, " ".join(str(v) for v in versions))


def cmd_item_deactivate(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    engine.deactivate(args.acting, args.id)
    _save(engine, config)
    _emit(args, {"id": args.id, "active": False}, f"deactivated {args.id}")


def cmd_item_reactivate(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    engine.reactivate(args.acting, args.id)
    _save(engine, config)
    _emit(args, {"id": args.id, "active": True}, f"reactivated {args.id}")


def cmd_item_destroy(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    engine.destroy(args.acting, args.id)
    _save(engine, config)
    _emit(args, {"id": args.id, "destroyed": True}, f"destroyed {args.id}")


def cmd_item_view(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    rendered = engine.dispatch(
        args.acting, args.id, action=args.action, viewer=args.viewer, version=args.version
    )
    payload = {
        "item_id": rendered.item_id,
        "version": rendered.version,
        "viewer": rendered.viewer,
        "action": rendered.action,
        "content_kind": rendered.content_kind,
        "body": rendered.body,
        "annotations": list(rendered.annotations),
    }
    human = rendered.body if isinstance(rendered.body, str) else None
    _emit(args, payload, human)


def cmd_comment(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    version = args.version if args.version is not None else engine.store.current_version(args.id)
    comment_id = engine.create_comment(args.acting, args.id, version, args.body)
    _save(engine, config)
    _emit(
        args,
        {"comment": comment_id, "item": args.id, "item_version": version},
        f"comment {comment_id} on item {args.id} version {version}",
    )


def cmd_annotations(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    records = engine.annotations_for(args.acting, args.id, args.version)
    payload = {"id": args.id, "annotations": [r.as_dict() for r in records]}
    lines = [
        f"{r.kind} {r.annotation_id}"
        + ("" if r.offset is None else f" at offset {r.offset}")
        for r in records
    ]
    _emit(args, payload, "\n".join(lines))


def cmd_collection_add(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    membership_id = engine.add_member(args.acting, args.collection, args.member)
    _save(engine, config)
    _emit(
        args,
        {"collection": args.collection, "member": args.member, "membership": membership_id},
        f"membership {membership_id}: item {args.member} in collection {args.collection}",
    )


def cmd_collection_remove(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    engine.remove_member(args.acting, args.membership)
    _save(engine, config)
    _emit(args, {"membership": args.membership, "active": False}, "removed")


def cmd_collection_list(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    if args.indirect:
        members = engine.indirect_members(args.acting, args.collection)
    else:
        members = engine.direct_members(args.acting, args.collection)
    _emit(
        args,
        {"collection": args.collection, "members": members, "indirect": args.indirect},
        "\n".join(str(m) for m in members),
    )


def cmd_grant_add(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    grant = PermissionGrant(
        ability=args.ability,
        effect=args.effect,
        subject_kind=args.subject_kind,
        subject_id=args.subject,
        target_item=args.item,
        target_type=args.type,
        target_piece=args.piece,
    )
    grant_id = engine.grant(args.acting, grant)
    _save(engine, config)
    _emit(args, {"grant_id": grant_id}, f"grant {grant_id}")


def cmd_grant_revoke(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    engine.revoke(args.acting, args.grant_id)
    _save(engine, config)
    _emit(args, {"grant_id": args.grant_id, "revoked": True}, "revoked")


def cmd_grant_list(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    grants = engine.grants_for(args.acting, args.id)
    payload = {"id": args.id, "grants": [{"id": gid, **g.to_dict()} for gid, g in grants]}
    lines = [
        f"{gid}: {g.effect} {g.ability} to {g.subject_kind}"
        + (f" {g.subject_id}" if g.subject_id is not None else "")
        + (f" on piece {g.target_piece}" if g.target_piece else "")
        for gid, g in grants
    ]
    _emit(args, payload, "\n".join(lines))


def cmd_export(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    bundle = export_bundle(engine)
    text = dumps_bundle(bundle)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        _emit(
            args,
            {"output": args.output, "checksum": bundle["manifest"]["checksum"]},
            f"exported to {args.output}",
        )


def cmd_import(args: argparse.Namespace) -> None:
    engine, config = _load(args)
    with open(args.input, "r", encoding="utf-8") as fh:
        bundle = json.load(fh)
    imported = import_bundle(bundle, target=engine)
    imported.permissions.admin_agents.update(config.admins)
    _save(imported, config)
    count = len(imported.store.all_item_ids(include_destroyed=True))
    _emit(args, {"imported": True, "items": count}, f"imported {count} items")


def cmd_debug_tables(args: argparse.Namespace) -> None:
    engine, _ = _load(args)
    counts = engine.store.table_counts()
    _emit(
        args,
        {"tables": counts},
        "\n".join(f"{name}: {count}" for name, count in counts.items()),
    )


# -- parser ----------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=DEFAULT_CONFIG, help="config file path")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument(
        "--as",
        dest="acting",
        type=int,
        default=None,
        metavar="AGENT",
        help="act as this agent id (default: anonymous)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itemgraph")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a fresh store and config")
    _add_common(p)
    p.add_argument("--store", default="itemgraph-store.json")
    p.add_argument("--base-url", default="http://127.0.0.1:8000")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p_type = sub.add_parser("type", help="type registry operations")
    type_sub = p_type.add_subparsers(dest="type_command", required=True)
    p = type_sub.add_parser("define", help="define types from a schema file")
    _add_common(p)
    p.add_argument("-f", "--file", required=True)
    p.set_defaults(func=cmd_type_define)
    p = type_sub.add_parser("list")
    _add_common(p)
    p.set_defaults(func=cmd_type_list)
    p = type_sub.add_parser("show")
    _add_common(p)
    p.add_argument("name")
    p.set_defaults(func=cmd_type_show)

    p_item = sub.add_parser("item", help="item lifecycle operations")
    item_sub = p_item.add_subparsers(dest="item_command", required=True)
    p = item_sub.add_parser("create")
    _add_common(p)
    p.add_argument("type")
    p.add_argument("--piece", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--self-created", action="store_true")
    p.set_defaults(func=cmd_item_create)
    p = item_sub.add_parser("show")
    _add_common(p)
    p.add_argument("id", type=int)
    p.add_argument("--version", type=int, default=None)
    p.set_defaults(func=cmd_item_show)
    p = item_sub.add_parser("update")
    _add_common(p)
    p.add_argument("id", type=int)
    p.add_argument("--piece", action="append", default=[], metavar="NAME=VALUE")
    p.set_defaults(func=cmd_item_update)
    p = item_sub.add_parser("list")
    _add_common(p)
    p.add_argument("--type", default=None)
    p.add_argument("--exact-type", action="store_true", help="exclude subtypes")
    p.add_argument("--include-inactive", action="store_true")
    p.add_argument("--where", action="append", default=[], metavar="NAME:VALUE")
    p.set_defaults(func=cmd_item_list)
    p = item_sub.add_parser("versions")
    _add_common(p)
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_item_versions)
    p = item_sub.add_parser("deactivate")
    _add_common(p)
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_item_deactivate)
    p = item_sub.add_parser("reactivate")
    _add_common(p)
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_item_reactivate)
    p = item_sub.add_parser("destroy")
    _add_common(p)
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_item_destroy)
    p = item_sub.add_parser("view")
    _add_common(p)
    p.add_argument("id", type=int)
    p.add_argument("--action", default="item_show")
    p.add_argument("--viewer", default=None)
    p.add_argument("--version", type=int, default=None)
    p.set_defaults(func=cmd_item_view)

    p = sub.add_parser("comment", help="comment on one version of an item")
    _add_common(p)
    p.add_argument("id", type=int)
    p.add_argument("--body", required=True)
    p.add_argument("--version", type=int, default=None)
    p.set_defaults(func=cmd_comment)

    p = sub.add_parser("annotations", help="list annotations anchored to a version")
    _add_common(p)
    p.add_argument("id", type=int)
    p.add_argument("--version", type=int, default=None)
    p.set_defaults(func=cmd_annotations)

    p_coll = sub.add_parser("collection", help="collection membership operations")
    coll_sub = p_coll.add_subparsers(dest="collection_command", required=True)
    p = coll_sub.add_parser("add")
    _add_common(p)
    p.add_argument("collection", type=int)
    p.add_argument("member", type=int)
    p.set_defaults(func=cmd_collection_add)
    p = coll_sub.add_parser("remove")
    _add_common(p)
    p.add_argument("membership", type=int)
    p.set_defaults(func=cmd_collection_remove)
    p = coll_sub.add_parser("list")
    _add_common(p)
    p.add_argument("collection", type=int)
    p.add_argument("--indirect", action="store_true")
    p.set_defaults(func=cmd_collection_list)

    p_grant = sub.add_parser("grant", help="permission grant operations")
    grant_sub = p_grant.add_subparsers(dest="grant_command", required=True)
    p = grant_sub.add_parser("add")
    _add_common(p)
    p.add_argument("--ability", required=True)
    p.add_argument("--effect", default="allow", choices=["allow", "deny"])
    p.add_argument(
        "--subject-kind", default="everyone", choices=["agent", "collection", "everyone"]
    )
    p.add_argument("--subject", type=int, default=None)
    p.add_argument("--item", type=int, default=None)
    p.add_argument("--type", default=None)
    p.add_argument("--piece", default=None)
    p.set_defaults(func=cmd_grant_add)
    p = grant_sub.add_parser("revoke")
    _add_common(p)
    p.add_argument("grant_id", type=int)
    p.set_defaults(func=cmd_grant_revoke)
    p = grant_sub.add_parser("list")
    _add_common(p)
    p.add_argument("id", type=int)
    p.set_defaults(func=cmd_grant_list)

    p = sub.add_parser("export", help="write a portable bundle")
    _add_common(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", help="load a bundle into a fresh installation")
    _add_common(p)
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_import)

    p_debug = sub.add_parser("debug", help="introspection helpers")
    debug_sub = p_debug.add_subparsers(dest="debug_command", required=True)
    p = debug_sub.add_parser("tables", help="row count per logical table")
    _add_common(p)
    p.set_defaults(func=cmd_debug_tables)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except EngineError as exc:
        print(
            json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
            file=sys.stderr,
        )
        return 1
    except FileNotFoundError as exc:
        print(
            json.dumps({"error": {"code": "file_not_found", "message": str(exc)}}),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
