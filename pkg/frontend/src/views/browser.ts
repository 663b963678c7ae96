/** Item browser: list by type, with subtype and inactive toggles. */

import { h } from "../dom.js";
import type { AppContext } from "../context.js";
import type { ItemPayload } from "../types.js";

export interface BrowserParams {
  type?: string;
  subtypes: boolean;
  inactive: boolean;
}

function describe(item: ItemPayload): string {
  const description = item.pieces["description"]?.value;
  return typeof description === "string" ? description : "";
}

export async function renderBrowser(
  root: HTMLElement,
  ctx: AppContext,
  params: BrowserParams,
): Promise<void> {
  const { types } = await ctx.api.listTypes();
  const rootType = (await ctx.api.serviceRoot()).root_type;
  const selected = params.type ?? rootType;

  const typeSelect = h("select", {});
  for (const def of types) {
    const option = h("option", { value: def.name }, def.name);
    if (def.name === selected) option.setAttribute("selected", "");
    typeSelect.append(option);
  }
  const subtypesBox = h("input", { type: "checkbox" }) as HTMLInputElement;
  subtypesBox.checked = params.subtypes;
  const inactiveBox = h("input", { type: "checkbox" }) as HTMLInputElement;
  inactiveBox.checked = params.inactive;

  const go = () => {
    const query = new URLSearchParams({ type: typeSelect.value });
    if (!subtypesBox.checked) query.set("subtypes", "0");
    if (inactiveBox.checked) query.set("inactive", "1");
    ctx.navigate(`#/items?${query}`);
  };
  typeSelect.addEventListener("change", go);
  subtypesBox.addEventListener("change", go);
  inactiveBox.addEventListener("change", go);

  const controls = h(
    "div",
    { class: "controls" },
    h("label", {}, "type ", typeSelect),
    h("label", {}, subtypesBox, " include subtypes"),
    h("label", {}, inactiveBox, " include deactivated"),
    h("a", { href: `#/new/${encodeURIComponent(typeSelect.value)}`, class: "button" }, "new item"),
  );

  const listing = await ctx.api.listItems({
    type: selected,
    subtypes: params.subtypes,
    include_inactive: params.inactive,
  });

  const rows = await Promise.allSettled(listing.items.map((id) => ctx.api.getItem(id)));
  const table = h(
    "table",
    {},
    h(
      "tr",
      {},
      h("th", {}, "id"),
      h("th", {}, "type"),
      h("th", {}, "version"),
      h("th", {}, "active"),
      h("th", {}, "description"),
      h("th", {}, ""),
    ),
  );
  rows.forEach((result, index) => {
    const id = listing.items[index];
    if (result.status === "fulfilled") {
      const item = result.value;
      table.append(
        h(
          "tr",
          {},
          h("td", {}, h("a", { href: `#/item/${item.id}` }, `#${item.id}`)),
          h("td", {}, item.type_name),
          h("td", {}, String(item.version)),
          h("td", {}, item.active ? "yes" : "no"),
          h("td", {}, describe(item)),
          h("td", {}, h("a", { href: `#/edit/${item.id}` }, "edit")),
        ),
      );
    } else {
      const code = (result.reason as { code?: string }).code ?? "error";
      table.append(
        h(
          "tr",
          { class: "unreadable" },
          h("td", {}, `#${id}`),
          h("td", { colspan: "5" }, `unreadable (${code})`),
        ),
      );
    }
  });

  root.append(
    h("h2", {}, `items of type ${selected}`),
    controls,
    table,
    h("p", { class: "hint" }, `${listing.items.length} item(s)`),
  );
}
