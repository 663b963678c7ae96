/** Document view: the body of one version with transclusion markers at
 * their recorded offsets, and click-to-comment against that version.
 *
 * Offsets are computed from the displayed version's body text, in code
 * points, exactly as the service counts them. Clicking in the text creates
 * a comment anchored to the displayed version plus a transclusion marking
 * where it sits.
 */

import { h } from "../dom.js";
import { clickOffset, codePointLength } from "../offsets.js";
import { segmentBody } from "../segments.js";
import type { AppContext } from "../context.js";

export async function renderDocument(
  root: HTMLElement,
  ctx: AppContext,
  id: number,
  params: { version?: number },
): Promise<void> {
  const { versions, current } = await ctx.api.versions(id);
  const shown = params.version ?? current;
  const item = shown === current ? await ctx.api.getItem(id) : await ctx.api.getVersion(id, shown);

  const bodyPiece = item.pieces["body"];
  if (!bodyPiece || typeof bodyPiece.value !== "string") {
    root.append(
      h("h2", {}, `#${id} · ${item.type_name} · v${shown}`),
      h("p", { class: "hint" }, "no readable body text on this version"),
    );
    return;
  }
  const body = bodyPiece.value;

  const { annotations } = await ctx.api.annotations(id, shown);
  const segmented = segmentBody(body, annotations);

  const versionNav = h("div", { class: "controls" });
  for (const v of versions) {
    versionNav.append(
      v === shown
        ? h("strong", {}, `v${v}`)
        : h("a", { href: `#/doc/${id}?version=${v}` }, `v${v}`),
    );
  }
  versionNav.append(h("a", { href: `#/item/${id}` }, "item view"));

  const text = h("pre", { class: "doc-body" });
  let markerNumber = 0;
  for (const part of segmented.parts) {
    if (part.kind === "text") {
      const span = h("span", { "data-start": String(part.start) }, part.text);
      text.append(span);
    } else {
      markerNumber++;
      const target = part.annotation.referenced_item ?? part.annotation.id;
      text.append(
        h(
          "sup",
          { class: "marker", title: `annotation #${part.annotation.id} at offset ${part.offset}` },
          h("a", { href: `#/item/${target}` }, `[${markerNumber}]`),
        ),
      );
    }
  }

  // click in a text run -> code point offset in the body -> comment there
  text.addEventListener("click", async (event) => {
    const span = (event.target as HTMLElement).closest("span[data-start]");
    if (!(span instanceof HTMLElement)) return;
    const selection = window.getSelection();
    if (!selection || !selection.anchorNode || selection.anchorNode.parentElement !== span) return;
    const nodeText = selection.anchorNode.textContent ?? "";
    const offset = clickOffset(Number(span.dataset["start"]), nodeText, selection.anchorOffset);
    const commentText = window.prompt(`Comment at offset ${offset} of v${shown}:`);
    if (!commentText) return;
    ctx.clearError();
    try {
      const comment = await ctx.api.createComment(id, commentText, shown);
      await ctx.api.createTransclusion(id, shown, offset, comment.id);
      ctx.refresh();
    } catch (error) {
      ctx.showError(error);
    }
  });

  const comments = h("ul", {});
  for (const annotation of segmented.leading) {
    comments.append(
      h(
        "li",
        {},
        h("a", { href: `#/item/${annotation.id}` }, `#${annotation.id}`),
        ` ${annotation.kind} on v${annotation.anchored_version}`,
      ),
    );
  }

  root.append(
    h("h2", {}, `#${id} · ${item.type_name} · v${shown}`),
    versionNav,
    h(
      "p",
      { class: "hint" },
      `${codePointLength(body)} characters · click in the text to comment at that position`,
    ),
    text,
    h("h3", {}, "comments without a position"),
    segmented.leading.length ? comments : h("p", { class: "hint" }, "none"),
  );
}
