/** Client settings kept in localStorage: where the API lives and which
 * bearer tokens the operator may act as. "View as" previews switch between
 * these identities; there is no impersonation, only the tokens you hold.
 */

export interface Identity {
  label: string;
  token: string | null;
}

export interface UiConfig {
  baseUrl: string;
  identities: Identity[];
  active: number;
}

const STORAGE_KEY = "itemgraph-admin-config";

export function defaultConfig(): UiConfig {
  return {
    baseUrl: "http://127.0.0.1:8000",
    identities: [{ label: "anonymous", token: null }],
    active: 0,
  };
}

export function loadConfig(): UiConfig {
  try {
    const raw = localStorage.getItem(STORAGE_KEY);
    if (!raw) return defaultConfig();
    const data = JSON.parse(raw);
    const identities: Identity[] = Array.isArray(data.identities)
      ? data.identities.map((entry: any) => ({
          label: String(entry.label ?? "unnamed"),
          token: entry.token === null ? null : String(entry.token),
        }))
      : defaultConfig().identities;
    const active = Number.isInteger(data.active) ? data.active : 0;
    return {
      baseUrl: String(data.baseUrl ?? defaultConfig().baseUrl),
      identities: identities.length ? identities : defaultConfig().identities,
      active: Math.min(Math.max(active, 0), identities.length - 1),
    };
  } catch {
    return defaultConfig();
  }
}

export function saveConfig(config: UiConfig): void {
  localStorage.setItem(STORAGE_KEY, JSON.stringify(config));
}

export function activeIdentity(config: UiConfig): Identity {
  return config.identities[config.active] ?? { label: "anonymous", token: null };
}
