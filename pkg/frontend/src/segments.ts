/** Split a document body around its positioned annotations.
 *
 * The result alternates text runs with markers so a renderer can place
 * each transclusion at its recorded offset. Offsets are code points,
 * counted against the displayed version's body (never rendered markup).
 */

import type { AnnotationPayload } from "./types.js";
import { clampOffset, codePointSlice } from "./offsets.js";

export interface TextRun {
  kind: "text";
  /** code point offset of the run's start within the body */
  start: number;
  text: string;
}

export interface Marker {
  kind: "marker";
  offset: number;
  annotation: AnnotationPayload;
}

export interface SegmentedBody {
  /** annotations without a position (comments), in listing order */
  leading: AnnotationPayload[];
  /** text runs and markers in document order; text runs join back to the body */
  parts: (TextRun | Marker)[];
}

export function segmentBody(body: string, annotations: AnnotationPayload[]): SegmentedBody {
  const leading = annotations.filter((a) => a.offset === null);
  const positioned = annotations
    .filter((a) => a.offset !== null)
    .sort((a, b) => (a.offset! - b.offset!) || (a.id - b.id));

  const parts: (TextRun | Marker)[] = [];
  let cursor = 0;
  for (const annotation of positioned) {
    const offset = clampOffset(body, annotation.offset!);
    if (offset > cursor) {
      parts.push({ kind: "text", start: cursor, text: codePointSlice(body, cursor, offset) });
      cursor = offset;
    }
    parts.push({ kind: "marker", offset, annotation });
  }
  const tail = codePointSlice(body, cursor);
  if (tail || parts.length === 0) {
    parts.push({ kind: "text", start: cursor, text: tail });
  }
  return { leading, parts };
}

/** Recorded offsets of every marker for one annotation id, in document order. */
export function markerOffsets(segmented: SegmentedBody, annotationId: number): number[] {
  return segmented.parts
    .filter((p): p is Marker => p.kind === "marker" && p.annotation.id === annotationId)
    .map((p) => p.offset);
}
