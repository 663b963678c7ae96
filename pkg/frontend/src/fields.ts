/** Build the DOM for a schema-derived form and read values back out.
 *
 * Works from FormField descriptors alone, so the same code renders the
 * editor for every type, built-in or defined at runtime.
 */

import { h } from "./dom.js";
import {
  fieldInputText,
  parseFieldInput,
  type FormField,
} from "./formModel.js";

export interface BoundForm {
  element: HTMLElement;
  /** Parsed piece values for every editable field, keyed by piece name. */
  read(): Record<string, unknown>;
  /** Replace the form's contents with another value set. */
  fill(values: Record<string, unknown>): void;
}

export interface PickerOptions {
  /** item ids offered for a pointer field, keyed by field name */
  choices?: Map<string, number[]>;
}

function placeholderFor(field: FormField): string {
  switch (field.kind) {
    case "item_pointer":
      return field.targetType ? `id of a ${field.targetType}` : "item id";
    case "piece_pointer":
      return "ITEM:piece, e.g. 3:body";
    case "integer":
      return "integer";
    case "boolean":
      return "true / false / empty";
    case "text":
      return "";
  }
}

export function buildForm(
  fields: FormField[],
  initial: Record<string, unknown> = {},
  options: PickerOptions = {},
): BoundForm {
  const inputs = new Map<string, HTMLInputElement | HTMLTextAreaElement>();
  const element = h("div", { class: "fields" });

  for (const field of fields) {
    const caption = h(
      "span",
      { class: "field-name" },
      field.name,
      h(
        "small",
        {},
        ` ${field.kind}` +
          (field.targetType ? ` → ${field.targetType}` : "") +
          (field.required ? ", required" : "") +
          ` · from ${field.owner}`,
      ),
    );
    if (field.system) {
      element.append(
        h(
          "label",
          { class: "field system" },
          caption,
          h("span", { class: "system-note" }, "set by the service"),
        ),
      );
      continue;
    }
    const start = fieldInputText(field, initial[field.name] ?? null);
    let input: HTMLInputElement | HTMLTextAreaElement;
    if (field.kind === "text") {
      input = h("textarea", { rows: "3" });
      input.value = start;
    } else {
      input = h("input", { type: "text", placeholder: placeholderFor(field) });
      input.value = start;
      const choices = options.choices?.get(field.name);
      if (choices && choices.length) {
        const listId = `picker-${field.name}`;
        input.setAttribute("list", listId);
        element.append(
          h("datalist", { id: listId }, ...choices.map((id) => h("option", { value: String(id) }))),
        );
      }
    }
    inputs.set(field.name, input);
    element.append(h("label", { class: "field" }, caption, input));
  }

  return {
    element,
    read(): Record<string, unknown> {
      const values: Record<string, unknown> = {};
      for (const field of fields) {
        const input = inputs.get(field.name);
        if (!input) continue;
        values[field.name] = parseFieldInput(field, input.value);
      }
      return values;
    },
    fill(values: Record<string, unknown>): void {
      for (const field of fields) {
        const input = inputs.get(field.name);
        if (!input) continue;
        input.value = fieldInputText(field, values[field.name] ?? null);
      }
    },
  };
}
