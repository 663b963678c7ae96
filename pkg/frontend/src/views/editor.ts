/** Schema-driven create/update forms with version history and restore. */

import { h } from "../dom.js";
import { buildForm } from "../fields.js";
import {
  changedPieces,
  createPieces,
  editableFields,
  formFields,
  pieceValue,
} from "../formModel.js";
import type { AppContext } from "../context.js";
import type { ItemPayload } from "../types.js";

/** Datalist choices for pointer fields: the target type and its subtypes. */
async function pointerChoices(
  ctx: AppContext,
  fields: { name: string; kind: string; targetType: string | null }[],
): Promise<Map<string, number[]>> {
  const choices = new Map<string, number[]>();
  for (const field of fields) {
    if (field.kind !== "item_pointer" || !field.targetType) continue;
    try {
      const listing = await ctx.api.listItems({ type: field.targetType });
      choices.set(field.name, listing.items);
    } catch {
      // pointer stays a plain numeric input when the listing is not readable
    }
  }
  return choices;
}

function valuesOf(item: ItemPayload): Record<string, unknown> {
  const values: Record<string, unknown> = {};
  for (const [name, piece] of Object.entries(item.pieces)) {
    values[name] = pieceValue(piece);
  }
  return values;
}

export async function renderCreate(
  root: HTMLElement,
  ctx: AppContext,
  typeName: string,
): Promise<void> {
  const info = await ctx.api.getType(typeName);
  const fields = formFields(info);
  const form = buildForm(fields, {}, { choices: await pointerChoices(ctx, fields) });

  const submit = h(
    "button",
    {
      onclick: async () => {
        ctx.clearError();
        try {
          const created = await ctx.api.createItem(typeName, createPieces(form.read()));
          ctx.navigate(`#/item/${created.id}`);
        } catch (error) {
          ctx.showError(error);
        }
      },
    },
    "create",
  );

  root.append(h("h2", {}, `new ${typeName}`), form.element, h("div", { class: "controls" }, submit));
}

export async function renderEdit(root: HTMLElement, ctx: AppContext, id: number): Promise<void> {
  const item = await ctx.api.getItem(id);
  const info = await ctx.api.getType(item.type_name);
  const fields = formFields(info);
  const form = buildForm(fields, valuesOf(item), {
    choices: await pointerChoices(ctx, fields),
  });

  const save = h(
    "button",
    {
      onclick: async () => {
        ctx.clearError();
        try {
          const changed = changedPieces(item, form.read());
          if (Object.keys(changed).length === 0) {
            ctx.navigate(`#/item/${id}`);
            return;
          }
          const updated = await ctx.api.updateItem(id, changed);
          ctx.navigate(`#/item/${updated.id}`);
        } catch (error) {
          ctx.showError(error);
        }
      },
    },
    "save as new version",
  );

  const { versions, current } = await ctx.api.versions(id);
  const history = h("ul", {});
  for (const v of versions) {
    const row = h(
      "li",
      {},
      h("a", { href: `#/item/${id}?version=${v}` }, `v${v}`),
      v === current ? " (current)" : "",
    );
    if (v !== current) {
      row.append(
        h(
          "button",
          {
            onclick: async () => {
              ctx.clearError();
              try {
                const snapshot = await ctx.api.getVersion(id, v);
                // restoring = one update that sets back whatever differs
                const changed = changedPieces(item, valuesOf(snapshot));
                if (Object.keys(changed).length) await ctx.api.updateItem(id, changed);
                ctx.navigate(`#/item/${id}`);
              } catch (error) {
                ctx.showError(error);
              }
            },
          },
          "restore as new version",
        ),
      );
    }
    history.append(row);
  }

  root.append(
    h("h2", {}, `edit #${id} · ${item.type_name} · v${item.version}`),
    form.element,
    h("div", { class: "controls" }, save),
    h("h3", {}, "versions"),
    history,
  );
}
