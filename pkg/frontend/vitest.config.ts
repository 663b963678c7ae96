import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the API integration suite boots a real server; give it headroom
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
