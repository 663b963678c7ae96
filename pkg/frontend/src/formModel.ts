/** Derive editor forms from type introspection.
 *
 * A form is built entirely from GET /type/{name}: one field per declared
 * piece, inherited ones included, in declaration order. Nothing here knows
 * any concrete type; defining a new type on the server immediately yields
 * a working editor for it.
 */

import type {
  ItemPayload,
  OwnedPieceDef,
  PieceKind,
  PiecePointerValue,
  TypeInfo,
  WirePiece,
} from "./types.js";

/** Pieces the service computes itself and rejects from request payloads. */
export const SYSTEM_PIECES: ReadonlySet<string> = new Set(["creator"]);

export interface FormField {
  name: string;
  kind: PieceKind;
  required: boolean;
  /** pointer fields: the type an item picker should list (subtypes included) */
  targetType: string | null;
  /** type that declared the piece; display hint only */
  owner: string;
  /** true when the service assigns the value; shown read-only, never sent */
  system: boolean;
}

export function formFields(info: TypeInfo): FormField[] {
  return info.all_pieces.map((piece: OwnedPieceDef) => ({
    name: piece.name,
    kind: piece.kind,
    required: piece.required,
    targetType: piece.target_type,
    owner: piece.owner,
    system: SYSTEM_PIECES.has(piece.name),
  }));
}

export function editableFields(info: TypeInfo): FormField[] {
  return formFields(info).filter((field) => !field.system);
}

/** Unwrap a wire piece into the editable value (dangling pointers read as their id). */
export function pieceValue(piece: WirePiece | undefined): unknown {
  if (piece === undefined) return null;
  return piece.value ?? null;
}

export function isPiecePointer(value: unknown): value is PiecePointerValue {
  return (
    typeof value === "object" &&
    value !== null &&
    "item_id" in value &&
    "piece_name" in value
  );
}

/** Parse one text input into the piece value to send. Empty means unset. */
export function parseFieldInput(field: FormField, raw: string): unknown {
  const text = raw.trim();
  if (text === "") return null;
  switch (field.kind) {
    case "integer":
    case "item_pointer": {
      const value = Number(text);
      if (!Number.isInteger(value)) {
        throw new Error(`${field.name}: expected an integer, got ${JSON.stringify(raw)}`);
      }
      return value;
    }
    case "boolean":
      return text === "true" || text === "1" || text === "yes";
    case "piece_pointer": {
      // written ITEM:piece, e.g. 3:body
      const [head, ...rest] = text.split(":");
      const item = Number(head);
      const piece = rest.join(":").trim();
      if (!Number.isInteger(item) || !piece) {
        throw new Error(`${field.name}: expected ITEM:piece, got ${JSON.stringify(raw)}`);
      }
      return { item_id: item, piece_name: piece };
    }
    case "text":
      return raw;
  }
}

/** Render a piece value back into its input text. */
export function fieldInputText(field: FormField, value: unknown): string {
  if (value === null || value === undefined) return "";
  if (field.kind === "piece_pointer" && isPiecePointer(value)) {
    return `${value.item_id}:${value.piece_name}`;
  }
  if (field.kind === "boolean") return value ? "true" : "false";
  return String(value);
}

function sameValue(a: unknown, b: unknown): boolean {
  if (isPiecePointer(a) && isPiecePointer(b)) {
    return a.item_id === b.item_id && a.piece_name === b.piece_name;
  }
  return a === b;
}

/** The pieces to send in an update: only what differs from the original.
 *
 * Sending untouched pieces would trip the immutability of anchor pieces,
 * so edits and version restores both diff before patching.
 */
export function changedPieces(
  original: ItemPayload,
  values: Record<string, unknown>,
): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const [name, value] of Object.entries(values)) {
    if (SYSTEM_PIECES.has(name)) continue;
    const before = pieceValue(original.pieces[name]);
    if (!sameValue(before, value ?? null)) out[name] = value;
  }
  return out;
}

/** Pieces to send on create: system pieces and unset values are omitted. */
export function createPieces(values: Record<string, unknown>): Record<string, unknown> {
  const out: Record<string, unknown> = {};
  for (const [name, value] of Object.entries(values)) {
    if (SYSTEM_PIECES.has(name)) continue;
    if (value === null || value === undefined) continue;
    out[name] = value;
  }
  return out;
}

/** What a "view as" preview shows: exactly the pieces the API returned.
 *
 * `full` is the operator's own read of the item; anything it has that the
 * previewed read lacks is hidden from that subject by permissions.
 */
export function previewFields(
  full: ItemPayload | null,
  visible: ItemPayload,
): { shown: string[]; hidden: string[] } {
  const shown = Object.keys(visible.pieces);
  const have = new Set(shown);
  const hidden = full ? Object.keys(full.pieces).filter((name) => !have.has(name)) : [];
  return { shown, hidden };
}
