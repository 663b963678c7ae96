/** Character offsets counted in Unicode code points.
 *
 * The engine validates and stores transclusion offsets as code points, so
 * every offset the UI sends or renders must be counted the same way.
 * JavaScript strings are UTF-16, which disagrees with code points exactly
 * on astral characters; these helpers do the conversion in one place.
 */

export function codePointLength(text: string): number {
  let count = 0;
  for (const _ of text) count++;
  return count;
}

/** The substring covering code points [start, end). */
export function codePointSlice(text: string, start: number, end?: number): string {
  const stop = end === undefined ? Infinity : end;
  let index = 0;
  let out = "";
  for (const ch of text) {
    if (index >= stop) break;
    if (index >= start) out += ch;
    index++;
  }
  return out;
}

/** Code points strictly before the UTF-16 index `utf16Index`.
 *
 * DOM selection offsets are UTF-16 code units; an offset landing between
 * the halves of a surrogate pair rounds down to the pair's start.
 */
export function codePointOffsetAt(text: string, utf16Index: number): number {
  let units = 0;
  let points = 0;
  for (const ch of text) {
    if (units + ch.length > utf16Index) break;
    units += ch.length;
    points++;
  }
  return points;
}

/** UTF-16 index of the code point at position `codePoints`. Inverse of codePointOffsetAt. */
export function utf16IndexAt(text: string, codePoints: number): number {
  let units = 0;
  let points = 0;
  for (const ch of text) {
    if (points >= codePoints) break;
    units += ch.length;
    points++;
  }
  return units;
}

export function clampOffset(text: string, offset: number): number {
  const max = codePointLength(text);
  return Math.max(0, Math.min(max, offset));
}

/** Full-body code point offset of a click inside one rendered text segment.
 *
 * `segmentStart` is the code point offset where the segment begins in the
 * body; `utf16Offset` is the DOM selection offset within the segment's text
 * node.
 */
export function clickOffset(segmentStart: number, nodeText: string, utf16Offset: number): number {
  return segmentStart + codePointOffsetAt(nodeText, utf16Offset);
}
