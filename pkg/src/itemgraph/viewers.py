"""Server-side rendering dispatch, polymorphic over the type hierarchy.

A viewer registers once with the type it accepts and the actions it offers.
Asked to render an item, the registry picks the viewer whose accepted type
is nearest the item's own type (the item's type itself, then each ancestor
in linearization order); registration order breaks ties.  Handlers never
see the raw item: they get a snapshot already reduced to the pieces the
requesting agent may view, so a rendering cannot leak a denied value no
matter how the handler is written.
"""

from __future__ import annotations

import html
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

from .annotations import AnnotationService
from .errors import (
    DuplicateViewer,
    ItemInactive,
    NoViewer,
    UnknownAction,
    ViewerTypeMismatch,
)
from .permissions import PermissionEngine
from .schema import PiecePointer, TypeRegistry
from .store import DanglingRef, ItemSnapshot, ItemStore

DEFAULT_VIEWER = "item"
SHOW_ACTION = "item_show"

Handler = Callable[["ViewContext"], Any]


@dataclass(frozen=True)
class ViewerRegistration:
    name: str
    accepted_type: str
    actions: Mapping[str, Handler]


@dataclass(frozen=True)
class ViewContext:
    """Everything a handler may touch while rendering one item."""

    agent: int | None
    item: ItemSnapshot  # piece_values already reduced to what agent may view
    visible_pieces: tuple[str, ...]
    piece_kinds: Mapping[str, str]
    annotations: tuple[Any, ...]
    params: Mapping[str, Any] = field(default_factory=dict)
    # permission-filtered fetch of another item; None when not viewable
    lookup: Callable[[int], ItemSnapshot | None] = lambda _: None


@dataclass(frozen=True)
class RenderedView:
    item_id: int
    version: int
    viewer: str
    action: str
    content_kind: str  # "hypertext" for str bodies, "data" for structured ones
    body: Any
    annotations: tuple[dict[str, Any], ...]


class ViewerRegistry:
    def __init__(
        self,
        registry: TypeRegistry,
        store: ItemStore,
        permissions: PermissionEngine,
        annotations: AnnotationService,
    ) -> None:
        self._registry = registry
        self._store = store
        self._permissions = permissions
        self._annotations = annotations
        self._viewers: dict[str, ViewerRegistration] = {}
        self._order: list[str] = []

    # -- registration ----------------------------------------------------------

    def register(
        self, name: str, accepted_type: str, actions: Mapping[str, Handler]
    ) -> None:
        if name in self._viewers:
            raise DuplicateViewer(f"a viewer named {name!r} is already registered")
        self._registry.get(accepted_type)  # raises UnknownType
        if not actions:
            raise UnknownAction(f"viewer {name!r} must offer at least one action")
        for action in actions:
            if not action or not action.replace("_", "").isalnum():
                raise UnknownAction(f"invalid action name {action!r}")
        self._viewers[name] = ViewerRegistration(name, accepted_type, dict(actions))
        self._order.append(name)

    def registrations(self) -> list[ViewerRegistration]:
        return [self._viewers[name] for name in self._order]

    # -- resolution ----------------------------------------------------------

    def _accepting(self, item_type: str) -> list[ViewerRegistration]:
        return [
            self._viewers[name]
            for name in self._order
            if self._registry.is_subtype(item_type, self._viewers[name].accepted_type)
        ]

    def _nearest(self, item_type: str, candidates: list[ViewerRegistration]) -> ViewerRegistration:
        ancestry = self._registry.ancestry(item_type)
        return min(candidates, key=lambda reg: ancestry.index(reg.accepted_type))

    def resolve(self, item_type: str, viewer_name: str | None = None) -> str:
        """Name of the viewer that renders items of this type."""
        self._registry.get(item_type)
        if viewer_name is not None:
            registration = self._viewers.get(viewer_name)
            if registration is None:
                raise NoViewer(f"no viewer named {viewer_name!r}")
            if not self._registry.is_subtype(item_type, registration.accepted_type):
                raise ViewerTypeMismatch(
                    f"viewer {viewer_name!r} accepts {registration.accepted_type}, "
                    f"which {item_type} is not"
                )
            return viewer_name
        candidates = self._accepting(item_type)
        if not candidates:
            raise NoViewer(f"no registered viewer accepts {item_type}")
        return self._nearest(item_type, candidates).name

    def resolve_for_action(self, item_type: str, action: str) -> str:
        """Nearest accepting viewer that actually offers the action."""
        self._registry.get(item_type)
        candidates = [reg for reg in self._accepting(item_type) if action in reg.actions]
        if not candidates:
            offered = sorted(self.actions_for(item_type))
            raise UnknownAction(
                f"no viewer offers {action!r} for {item_type}; available: {offered}"
            )
        return self._nearest(item_type, candidates).name

    def actions_for(self, item_type: str) -> set[str]:
        self._registry.get(item_type)
        names: set[str] = set()
        for registration in self._accepting(item_type):
            names.update(registration.actions)
        return names

    # -- dispatch ----------------------------------------------------------

    def _may_see_inactive(self, agent: int | None, item_id: int) -> bool:
        # whoever could have hidden the item may still look at it
        return self._permissions.can(agent, "deactivate", item_id)

    def _restricted_snapshot(self, agent: int | None, item_id: int, version: int | None):
        if version is None:
            snapshot = self._store.get_item(item_id)
        else:
            snapshot = self._store.get_version(item_id, version)
        visible = self._permissions.visible_pieces(agent, item_id)
        values = {k: v for k, v in snapshot.piece_values.items() if k in visible}
        return replace(snapshot, piece_values=values), tuple(visible)

    def _lookup_for(self, agent: int | None) -> Callable[[int], ItemSnapshot | None]:
        def lookup(item_id: int) -> ItemSnapshot | None:
            try:
                if not self._store.is_active(item_id) and not self._may_see_inactive(
                    agent, item_id
                ):
                    return None
                if not self._permissions.can(agent, "view", item_id):
                    return None
                snapshot, _ = self._restricted_snapshot(agent, item_id, None)
                return snapshot
            except Exception:
                return None

        return lookup

    def dispatch(
        self,
        agent: int | None,
        item_id: int,
        action: str,
        viewer_name: str | None = None,
        version: int | None = None,
        params: Mapping[str, Any] | None = None,
    ) -> RenderedView:
        self._store.current_version(item_id)  # raises UnknownItem / ItemDestroyed
        self._permissions.require(agent, "view", item_id)
        if not self._store.is_active(item_id) and not self._may_see_inactive(agent, item_id):
            raise ItemInactive(f"item {item_id} is deactivated")

        item_type = self._store.type_of(item_id)
        if viewer_name is not None:
            resolved = self.resolve(item_type, viewer_name)
            registration = self._viewers[resolved]
            if action not in registration.actions:
                raise UnknownAction(
                    f"viewer {resolved!r} offers {sorted(registration.actions)}, "
                    f"not {action!r}"
                )
        else:
            resolved = self.resolve_for_action(item_type, action)
            registration = self._viewers[resolved]

        snapshot, visible = self._restricted_snapshot(agent, item_id, version)
        annotations = self._annotations.annotations_for(agent, item_id, snapshot.version)
        piece_kinds = {
            piece.name: piece.kind for piece in self._registry.all_pieces(item_type)
        }
        context = ViewContext(
            agent=agent,
            item=snapshot,
            visible_pieces=visible,
            piece_kinds=piece_kinds,
            annotations=tuple(annotations),
            params=dict(params or {}),
            lookup=self._lookup_for(agent),
        )
        body = registration.actions[action](context)
        return RenderedView(
            item_id=item_id,
            version=snapshot.version,
            viewer=resolved,
            action=action,
            content_kind="hypertext" if isinstance(body, str) else "data",
            body=body,
            annotations=tuple(record.as_dict() for record in annotations),
        )


# -- default rendering ----------------------------------------------------------


def _render_value(kind: str, value: Any) -> str:
    if value is None:
        return '<em class="empty">empty</em>'
    if isinstance(value, DanglingRef):
        return f'<span class="dangling">destroyed item {value.item_id}</span>'
    if isinstance(value, PiecePointer):
        return (
            f'<a href="/item/{value.item_id}">item {value.item_id}</a>'
            f" &middot; {html.escape(value.piece_name)}"
        )
    if kind == "item_pointer":
        return f'<a href="/item/{value}">item {value}</a>'
    if kind == "boolean":
        return "yes" if value else "no"
    return html.escape(str(value))


def _item_show(context: ViewContext) -> str:
    item = context.item
    rows = []
    for name, value in item.piece_values.items():
        kind = context.piece_kinds.get(name, "text")
        rows.append(
            f"<dt>{html.escape(name)}</dt><dd>{_render_value(kind, value)}</dd>"
        )
    notes = []
    for record in context.annotations:
        where = "" if record.offset is None else f" at offset {record.offset}"
        notes.append(
            f'<li data-annotation-id="{record.annotation_id}">'
            f"{html.escape(record.kind)} {record.annotation_id}{where}</li>"
        )
    annotation_block = f"<ol class=\"annotations\">{''.join(notes)}</ol>" if notes else ""
    status = "" if item.active else ' <em class="inactive">(deactivated)</em>'
    return (
        f'<article class="item" data-item-id="{item.id}" data-version="{item.version}">'
        f"<h1>{html.escape(item.type_name)} {item.id}{status}</h1>"
        f"<dl>{''.join(rows)}</dl>{annotation_block}</article>"
    )


def register_default_viewer(viewers: ViewerRegistry, root_type: str) -> None:
    """The fallback renderer: accepts the root type, offers item_show."""
    viewers.register(DEFAULT_VIEWER, root_type, {SHOW_ACTION: _item_show})
