// Anchor offsets are counted in Unicode code points, while DOM selections
// report UTF-16 code units. These two helpers convert between the worlds;
// a shared multi-byte fixture on the backend side guards the boundary.

/** Code-point offset of the given UTF-16 index into text. */
export function codePointOffset(text: string, utf16Index: number): number {
  let points = 0;
  let i = 0;
  while (i < utf16Index && i < text.length) {
    const code = text.codePointAt(i)!;
    i += code > 0xffff ? 2 : 1;
    points += 1;
  }
  return points;
}

/** UTF-16 index corresponding to a code-point offset (for setting cursors). */
export function utf16Index(text: string, pointOffset: number): number {
  let i = 0;
  let points = 0;
  while (points < pointOffset && i < text.length) {
    const code = text.codePointAt(i)!;
    i += code > 0xffff ? 2 : 1;
    points += 1;
  }
  return i;
}

/** Number of code points in text (not text.length). */
export function codePointLength(text: string): number {
  let n = 0;
  for (const _ of text) n += 1;
  return n;
}

/** Slice by code-point offsets, mirroring the server's splice rule. */
export function slicePoints(text: string, start: number, end?: number): string {
  const from = utf16Index(text, start);
  const to = end === undefined ? text.length : utf16Index(text, end);
  return text.slice(from, to);
}
