import type { ApiClient } from "./api.js";
import type { UiConfig } from "./config.js";

/** What every view gets: a client for the active identity plus app chrome hooks. */
export interface AppContext {
  api: ApiClient;
  config: UiConfig;
  navigate(hash: string): void;
  /** re-render the current route (after a mutation) */
  refresh(): void;
  /** surface an API error banner with its machine-readable code */
  showError(error: unknown): void;
  clearError(): void;
}
