/** Single-page admin console. Routes are hash-based; every view talks to
 * the JSON API through one client bound to the selected identity.
 */

import { ApiClient, ApiError } from "./api.js";
import { activeIdentity, loadConfig, saveConfig } from "./config.js";
import { clear, h } from "./dom.js";
import type { AppContext } from "./context.js";
import { renderBrowser } from "./views/browser.js";
import { renderCollection } from "./views/collection.js";
import { renderDocument } from "./views/document.js";
import { renderCreate, renderEdit } from "./views/editor.js";
import { renderGrants } from "./views/grants.js";
import { renderItem } from "./views/item.js";
import { renderSettings } from "./views/settings.js";
import { renderTypes } from "./views/types.js";

interface Route {
  path: string[];
  query: URLSearchParams;
}

function parseHash(hash: string): Route {
  const raw = hash.replace(/^#\/?/, "");
  const [pathPart, queryPart] = raw.split("?", 2);
  const path = pathPart.split("/").filter(Boolean);
  return { path, query: new URLSearchParams(queryPart ?? "") };
}

function intParam(query: URLSearchParams, name: string): number | undefined {
  const raw = query.get(name);
  if (raw === null) return undefined;
  const value = Number(raw);
  return Number.isInteger(value) ? value : undefined;
}

export function startApp(rootId = "app"): void {
  const rootNode = document.getElementById(rootId);
  if (!rootNode) throw new Error(`no #${rootId} element to mount on`);

  const config = loadConfig();
  const api = new ApiClient(config.baseUrl, activeIdentity(config).token);

  const errorBox = h("div", { class: "error-box", hidden: true });
  const content = h("main", {});

  const identitySelect = h("select", { title: "acting identity" });
  config.identities.forEach((identity, index) => {
    const option = h("option", { value: String(index) }, identity.label);
    if (index === config.active) option.setAttribute("selected", "");
    identitySelect.append(option);
  });
  identitySelect.addEventListener("change", () => {
    saveConfig({ ...config, active: Number(identitySelect.value) });
    window.location.reload();
  });

  const whoBadge = h("span", { class: "who" });

  const ctx: AppContext = {
    api,
    config,
    navigate(hash: string): void {
      if (window.location.hash === hash) {
        void render();
      } else {
        window.location.hash = hash;
      }
    },
    refresh(): void {
      void render();
    },
    showError(error: unknown): void {
      errorBox.hidden = false;
      if (error instanceof ApiError) {
        errorBox.textContent = `${error.status} ${error.code}: ${error.message}`;
      } else {
        errorBox.textContent = String(error);
      }
    },
    clearError(): void {
      errorBox.hidden = true;
      errorBox.textContent = "";
    },
  };

  async function render(): Promise<void> {
    ctx.clearError();
    clear(content);
    const { path, query } = parseHash(window.location.hash);
    try {
      const head = path[0] ?? "items";
      if (head === "items") {
        await renderBrowser(content, ctx, {
          type: query.get("type") ?? undefined,
          subtypes: query.get("subtypes") !== "0",
          inactive: query.get("inactive") === "1",
        });
      } else if (head === "item" && path[1]) {
        await renderItem(content, ctx, Number(path[1]), {
          version: intParam(query, "version"),
          action: query.get("action") ?? undefined,
        });
      } else if (head === "new" && path[1]) {
        await renderCreate(content, ctx, decodeURIComponent(path[1]));
      } else if (head === "edit" && path[1]) {
        await renderEdit(content, ctx, Number(path[1]));
      } else if (head === "doc" && path[1]) {
        await renderDocument(content, ctx, Number(path[1]), {
          version: intParam(query, "version"),
        });
      } else if (head === "collection" && path[1]) {
        await renderCollection(content, ctx, Number(path[1]));
      } else if (head === "grants" && path[1]) {
        await renderGrants(content, ctx, Number(path[1]));
      } else if (head === "types") {
        await renderTypes(content, ctx);
      } else if (head === "settings") {
        await renderSettings(content, ctx);
      } else {
        content.append(h("p", {}, `unknown route: ${head}`));
      }
    } catch (error) {
      ctx.showError(error);
    }
  }

  const nav = h(
    "nav",
    {},
    h("strong", {}, "itemgraph"),
    h("a", { href: "#/items" }, "items"),
    h("a", { href: "#/types" }, "types"),
    h("a", { href: "#/settings" }, "settings"),
    h("span", { class: "spacer" }),
    whoBadge,
    identitySelect,
  );

  rootNode.append(nav, errorBox, content);
  window.addEventListener("hashchange", () => void render());

  void api
    .whoami()
    .then((me) => {
      whoBadge.textContent =
        me.agent === null ? "anonymous" : `agent #${me.agent}${me.admin ? " (admin)" : ""}`;
    })
    .catch((error) => ctx.showError(error));
  void render();
}

startApp();
