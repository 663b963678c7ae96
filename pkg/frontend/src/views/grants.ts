/** Permission editor: per-item grant table with piece scope, plus a live
 * "view as" preview that re-reads the item under another configured token
 * and shows exactly what the API returns for it.
 */

import { ApiError } from "../api.js";
import { h } from "../dom.js";
import { formFields, previewFields } from "../formModel.js";
import type { AppContext } from "../context.js";
import type { GrantPayload } from "../types.js";

// installations may register more abilities; these ship built in
const BUILTIN_ABILITIES = [
  "view",
  "edit",
  "comment_on",
  "deactivate",
  "destroy",
  "modify_permissions",
];

function grantRow(ctx: AppContext, grant: GrantPayload): HTMLElement {
  const subject =
    grant.subject_kind === "everyone"
      ? "everyone"
      : `${grant.subject_kind} #${grant.subject_id}`;
  const scope = grant.target_piece ? `piece ${grant.target_piece}` : "whole item";
  return h(
    "tr",
    {},
    h("td", {}, String(grant.id)),
    h("td", { class: grant.effect }, grant.effect),
    h("td", {}, grant.ability),
    h("td", {}, subject),
    h("td", {}, scope),
    h(
      "td",
      {},
      h(
        "button",
        {
          onclick: async () => {
            ctx.clearError();
            try {
              await ctx.api.revokeGrant(grant.id);
              ctx.refresh();
            } catch (error) {
              ctx.showError(error);
            }
          },
        },
        "revoke",
      ),
    ),
  );
}

export async function renderGrants(root: HTMLElement, ctx: AppContext, id: number): Promise<void> {
  const item = await ctx.api.getItem(id);
  const info = await ctx.api.getType(item.type_name);
  const { grants } = await ctx.api.grantsFor(id);

  const table = h(
    "table",
    {},
    h(
      "tr",
      {},
      h("th", {}, "id"),
      h("th", {}, "effect"),
      h("th", {}, "ability"),
      h("th", {}, "subject"),
      h("th", {}, "scope"),
      h("th", {}, ""),
    ),
    ...grants.map((grant) => grantRow(ctx, grant)),
  );

  // add-grant form, scoped to this item or one of its pieces
  const abilityInput = h("input", { type: "text", list: "abilities" }) as HTMLInputElement;
  abilityInput.value = "view";
  const abilityList = h(
    "datalist",
    { id: "abilities" },
    ...BUILTIN_ABILITIES.map((name) => h("option", { value: name })),
  );
  const effectSelect = h("select", {}, h("option", {}, "allow"), h("option", {}, "deny"));
  const kindSelect = h(
    "select",
    {},
    h("option", {}, "everyone"),
    h("option", {}, "agent"),
    h("option", {}, "collection"),
  );
  const subjectInput = h("input", {
    type: "text",
    placeholder: "subject id",
    disabled: true,
  }) as HTMLInputElement;
  kindSelect.addEventListener("change", () => {
    subjectInput.disabled = kindSelect.value === "everyone";
  });
  const pieceSelect = h("select", {}, h("option", { value: "" }, "whole item"));
  for (const field of formFields(info)) {
    pieceSelect.append(h("option", { value: field.name }, `piece ${field.name}`));
  }
  const addButton = h(
    "button",
    {
      onclick: async () => {
        ctx.clearError();
        try {
          await ctx.api.addGrant({
            ability: abilityInput.value.trim(),
            effect: effectSelect.value as "allow" | "deny",
            subject_kind: kindSelect.value as "agent" | "collection" | "everyone",
            subject_id: kindSelect.value === "everyone" ? null : Number(subjectInput.value),
            target_item: id,
            target_piece: pieceSelect.value || null,
          });
          ctx.refresh();
        } catch (error) {
          ctx.showError(error);
        }
      },
    },
    "add grant",
  );

  // view-as preview: one identity from the config, or anonymous
  const identitySelect = h("select", {});
  ctx.config.identities.forEach((identity, index) => {
    identitySelect.append(h("option", { value: String(index) }, identity.label));
  });
  const previewBox = h("div", { class: "preview" });
  const previewButton = h(
    "button",
    {
      onclick: async () => {
        previewBox.replaceChildren();
        const identity = ctx.config.identities[Number(identitySelect.value)];
        const client = ctx.api.withToken(identity.token);
        try {
          const visible = await client.getItem(id);
          const { shown, hidden } = previewFields(item, visible);
          previewBox.append(
            h("p", {}, `${identity.label} sees: ${shown.join(", ") || "(nothing)"}`),
            h(
              "p",
              { class: "hint" },
              hidden.length ? `hidden from them: ${hidden.join(", ")}` : "nothing hidden",
            ),
          );
        } catch (error) {
          const code = error instanceof ApiError ? error.code : "error";
          previewBox.append(h("p", {}, `${identity.label} cannot read this item (${code})`));
        }
      },
    },
    "preview",
  );

  root.append(
    h("h2", {}, `permissions on #${id} · ${item.type_name}`),
    h("div", { class: "controls" }, h("a", { href: `#/item/${id}` }, "item view")),
    grants.length ? table : h("p", { class: "hint" }, "no grants; creator defaults apply"),
    h("h3", {}, "add a grant"),
    abilityList,
    h(
      "div",
      { class: "controls" },
      h("label", {}, "ability ", abilityInput),
      h("label", {}, "effect ", effectSelect),
      h("label", {}, "subject ", kindSelect, subjectInput),
      h("label", {}, "scope ", pieceSelect),
      addButton,
    ),
    h("h3", {}, "view as"),
    h("div", { class: "controls" }, identitySelect, previewButton),
    previewBox,
  );
}
