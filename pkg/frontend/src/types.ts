/** Wire payload shapes, mirroring the service's JSON documented in docs/wire-format.md. */

export type PieceKind =
  | "text"
  | "integer"
  | "boolean"
  | "item_pointer"
  | "piece_pointer";

export interface PieceDef {
  name: string;
  kind: PieceKind;
  target_type: string | null;
  required: boolean;
}

export interface OwnedPieceDef extends PieceDef {
  owner: string;
}

export interface TypeInfo {
  name: string;
  parents: string[];
  ancestry: string[];
  own_pieces: PieceDef[];
  all_pieces: OwnedPieceDef[];
}

export interface TypeDef {
  name: string;
  parents: string[];
  pieces: PieceDef[];
}

/** A piece pointer value on the wire. */
export interface PiecePointerValue {
  item_id: number;
  piece_name: string;
}

export interface WirePiece {
  kind: PieceKind;
  value: unknown;
  /** Present and true when the pointed-at item has been destroyed. */
  dangling?: boolean;
  piece_name?: string;
}

export interface ItemPayload {
  id: number;
  type_name: string;
  version: number;
  active: boolean;
  pieces: Record<string, WirePiece>;
  links: Record<string, string>;
}

export interface AnnotationPayload {
  id: number;
  kind: "comment" | "transclusion";
  type_name: string;
  anchored_version: number;
  offset: number | null;
  referenced_item: number | null;
  links?: Record<string, string>;
}

export interface AnnotationsPayload {
  id: number;
  version: number;
  annotations: AnnotationPayload[];
}

export interface RenderedViewPayload {
  item_id: number;
  version: number;
  viewer: string;
  action: string;
  content_kind: string;
  body: unknown;
  annotations: number[];
}

export interface GrantPayload {
  id: number;
  ability: string;
  effect: "allow" | "deny";
  subject_kind: "agent" | "collection" | "everyone";
  subject_id: number | null;
  target_item: number | null;
  target_type: string | null;
  target_piece: string | null;
}

export interface MembershipEntry {
  membership: number;
  member: number;
  dangling: boolean;
}

export interface MembersPayload {
  id: number;
  indirect: boolean;
  members: number[];
  entries?: MembershipEntry[];
}

export interface WhoAmI {
  agent: number | null;
  admin: boolean;
}
