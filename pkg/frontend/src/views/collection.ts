/** Collection manager: membership edges, direct and indirect listings. */

import { h } from "../dom.js";
import type { AppContext } from "../context.js";

export async function renderCollection(
  root: HTMLElement,
  ctx: AppContext,
  id: number,
): Promise<void> {
  const direct = await ctx.api.members(id, false);
  const indirect = await ctx.api.members(id, true);

  const entries = h(
    "table",
    {},
    h("tr", {}, h("th", {}, "membership"), h("th", {}, "member"), h("th", {}, "")),
  );
  for (const entry of direct.entries ?? []) {
    entries.append(
      h(
        "tr",
        {},
        h("td", {}, h("a", { href: `#/item/${entry.membership}` }, `#${entry.membership}`)),
        h(
          "td",
          {},
          h("a", { href: `#/item/${entry.member}` }, `#${entry.member}`),
          entry.dangling ? " (destroyed)" : "",
        ),
        h(
          "td",
          {},
          h(
            "button",
            {
              onclick: async () => {
                ctx.clearError();
                try {
                  await ctx.api.removeMembership(entry.membership);
                  ctx.refresh();
                } catch (error) {
                  ctx.showError(error);
                }
              },
            },
            "remove",
          ),
        ),
      ),
    );
  }

  const memberInput = h("input", { type: "text", placeholder: "item id" }) as HTMLInputElement;
  const addButton = h(
    "button",
    {
      onclick: async () => {
        const member = Number(memberInput.value);
        if (!Number.isInteger(member)) return;
        ctx.clearError();
        try {
          await ctx.api.addMember(id, member);
          ctx.refresh();
        } catch (error) {
          ctx.showError(error);
        }
      },
    },
    "add member",
  );

  const indirectList = h(
    "p",
    {},
    ...indirect.members.flatMap((member, index) => {
      const link = h("a", { href: `#/item/${member}` }, `#${member}`);
      return index ? [", ", link] : [link];
    }),
  );

  root.append(
    h("h2", {}, `collection #${id}`),
    h("div", { class: "controls" }, h("a", { href: `#/item/${id}` }, "item view")),
    h("h3", {}, `direct members (${direct.members.length})`),
    entries,
    h("div", { class: "controls" }, memberInput, addButton),
    h("h3", {}, `indirect members (${indirect.members.length})`),
    indirect.members.length ? indirectList : h("p", { class: "hint" }, "none"),
  );
}
