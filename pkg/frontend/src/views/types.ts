/** Type browser and runtime schema definition. */

import { h } from "../dom.js";
import type { AppContext } from "../context.js";

export async function renderTypes(root: HTMLElement, ctx: AppContext): Promise<void> {
  const { types } = await ctx.api.listTypes();
  const me = await ctx.api.whoami();

  const table = h(
    "table",
    {},
    h("tr", {}, h("th", {}, "type"), h("th", {}, "parents"), h("th", {}, "own pieces")),
  );
  for (const def of types) {
    table.append(
      h(
        "tr",
        {},
        h(
          "td",
          {},
          h("a", { href: `#/items?type=${encodeURIComponent(def.name)}` }, def.name),
        ),
        h("td", {}, def.parents.join(", ")),
        h(
          "td",
          {},
          def.pieces
            .map((p) => `${p.name}: ${p.kind}${p.required ? " (required)" : ""}`)
            .join(", "),
        ),
      ),
    );
  }

  root.append(h("h2", {}, "types"), table);

  if (!me.admin) return;
  const schemaInput = h("textarea", {
    rows: "6",
    placeholder: "type Wiki : TextDocument\n  piece slug : text, required",
  }) as HTMLTextAreaElement;
  const defineButton = h(
    "button",
    {
      onclick: async () => {
        ctx.clearError();
        try {
          const result = await ctx.api.defineTypes(schemaInput.value);
          window.alert(`defined: ${result.defined.join(", ") || "(nothing new)"}`);
          ctx.refresh();
        } catch (error) {
          ctx.showError(error);
        }
      },
    },
    "define types",
  );
  root.append(
    h("h3", {}, "define new types"),
    schemaInput,
    h("div", { class: "controls" }, defineButton),
  );
}
