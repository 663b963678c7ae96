/** Client settings: API base URL and the identities (tokens) to act as. */

import { h } from "../dom.js";
import { saveConfig } from "../config.js";
import type { AppContext } from "../context.js";

export async function renderSettings(root: HTMLElement, ctx: AppContext): Promise<void> {
  const baseInput = h("input", { type: "text", size: "40" }) as HTMLInputElement;
  baseInput.value = ctx.config.baseUrl;

  const rows = h("table", {}, h("tr", {}, h("th", {}, "label"), h("th", {}, "token"), h("th", {}, "")));
  const inputs: { label: HTMLInputElement; token: HTMLInputElement }[] = [];

  const addRow = (label: string, token: string | null) => {
    const labelInput = h("input", { type: "text" }) as HTMLInputElement;
    labelInput.value = label;
    const tokenInput = h("input", { type: "text", placeholder: "empty = anonymous" }) as HTMLInputElement;
    tokenInput.value = token ?? "";
    const entry = { label: labelInput, token: tokenInput };
    inputs.push(entry);
    const tr = h(
      "tr",
      {},
      h("td", {}, labelInput),
      h("td", {}, tokenInput),
      h(
        "td",
        {},
        h(
          "button",
          {
            onclick: () => {
              inputs.splice(inputs.indexOf(entry), 1);
              tr.remove();
            },
          },
          "remove",
        ),
      ),
    );
    rows.append(tr);
  };
  for (const identity of ctx.config.identities) addRow(identity.label, identity.token);

  const saveButton = h(
    "button",
    {
      onclick: () => {
        const identities = inputs.map((entry) => ({
          label: entry.label.value.trim() || "unnamed",
          token: entry.token.value.trim() || null,
        }));
        const config = {
          baseUrl: baseInput.value.trim().replace(/\/+$/, "") || ctx.config.baseUrl,
          identities: identities.length ? identities : ctx.config.identities,
          active: Math.min(ctx.config.active, Math.max(identities.length - 1, 0)),
        };
        saveConfig(config);
        window.location.reload();
      },
    },
    "save",
  );

  root.append(
    h("h2", {}, "settings"),
    h("label", {}, "API base URL ", baseInput),
    h("h3", {}, "identities"),
    rows,
    h(
      "div",
      { class: "controls" },
      h("button", { onclick: () => addRow("new identity", null) }, "add identity"),
      saveButton,
    ),
  );
}
