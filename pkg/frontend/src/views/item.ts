/** Single item: server-rendered view, versions, annotations, lifecycle. */

import { h } from "../dom.js";
import type { AppContext } from "../context.js";
import type { AnnotationPayload } from "../types.js";

function annotationRow(annotation: AnnotationPayload): HTMLElement {
  const where =
    annotation.offset === null ? "" : ` at offset ${annotation.offset}`;
  const target =
    annotation.referenced_item === null
      ? null
      : h("a", { href: `#/item/${annotation.referenced_item}` }, ` → #${annotation.referenced_item}`);
  return h(
    "li",
    {},
    h("a", { href: `#/item/${annotation.id}` }, `#${annotation.id}`),
    ` ${annotation.kind} (${annotation.type_name}) on v${annotation.anchored_version}${where}`,
    target,
  );
}

export async function renderItem(
  root: HTMLElement,
  ctx: AppContext,
  id: number,
  params: { version?: number; action?: string },
): Promise<void> {
  const item = await ctx.api.getItem(id);
  const typeInfo = await ctx.api.getType(item.type_name);
  const { versions } = await ctx.api.versions(id);
  const { actions } = await ctx.api.actions(id);
  const action = params.action ?? "item_show";
  const shownVersion = params.version ?? item.version;

  const versionSelect = h("select", {});
  for (const v of versions) {
    const option = h("option", { value: String(v) }, `v${v}`);
    if (v === shownVersion) option.setAttribute("selected", "");
    versionSelect.append(option);
  }
  const actionSelect = h("select", {});
  for (const a of actions) {
    const option = h("option", { value: a }, a);
    if (a === action) option.setAttribute("selected", "");
    actionSelect.append(option);
  }
  const go = () => {
    const query = new URLSearchParams();
    if (Number(versionSelect.value) !== item.version) query.set("version", versionSelect.value);
    if (actionSelect.value !== "item_show") query.set("action", actionSelect.value);
    const suffix = query.toString();
    ctx.navigate(`#/item/${id}${suffix ? `?${suffix}` : ""}`);
  };
  versionSelect.addEventListener("change", go);
  actionSelect.addEventListener("change", go);

  const nav = h(
    "div",
    { class: "controls" },
    h("label", {}, "version ", versionSelect),
    h("label", {}, "action ", actionSelect),
    h("a", { href: `#/edit/${id}` }, "edit"),
    h("a", { href: `#/grants/${id}` }, "permissions"),
  );
  // annotation anchoring needs the real body text, so the document view is
  // offered for text documents; collections get their membership manager
  if (typeInfo.ancestry.includes("TextDocument")) {
    nav.append(h("a", { href: `#/doc/${id}?version=${shownVersion}` }, "document view"));
  }
  if (typeInfo.ancestry.includes("Collection")) {
    nav.append(h("a", { href: `#/collection/${id}` }, "members"));
  }

  const lifecycle = h("div", { class: "controls" });
  const act = (label: string, run: () => Promise<unknown>, confirmText?: string) =>
    h(
      "button",
      {
        onclick: async () => {
          if (confirmText && !window.confirm(confirmText)) return;
          ctx.clearError();
          try {
            await run();
            ctx.refresh();
          } catch (error) {
            ctx.showError(error);
          }
        },
      },
      label,
    );
  if (item.active) {
    lifecycle.append(act("deactivate", () => ctx.api.deactivate(id)));
  } else {
    lifecycle.append(act("reactivate", () => ctx.api.reactivate(id)));
  }
  // the service refuses to destroy an active item; the 409 is surfaced as-is
  lifecycle.append(
    act(
      "destroy",
      () => ctx.api.destroy(id),
      `Destroy #${id} permanently? Its stored values are scrubbed and the id is never reused.`,
    ),
  );

  const rendered = await ctx.api.view(id, {
    action,
    version: params.version,
  });
  const body = h("div", { class: "rendered" });
  if (rendered.content_kind === "hypertext" && typeof rendered.body === "string") {
    // server-rendered and already escaped there; shown verbatim
    body.innerHTML = rendered.body;
  } else {
    body.append(h("pre", {}, JSON.stringify(rendered.body, null, 2)));
  }

  const annotations = await ctx.api.annotations(id, shownVersion);
  const list = h("ul", {}, ...annotations.annotations.map(annotationRow));

  root.append(
    h(
      "h2",
      {},
      `#${item.id} · ${item.type_name} · v${shownVersion}`,
      item.active ? "" : " (deactivated)",
    ),
    nav,
    lifecycle,
    body,
    h("h3", {}, `annotations on v${annotations.version}`),
    annotations.annotations.length ? list : h("p", { class: "hint" }, "none"),
  );
}
