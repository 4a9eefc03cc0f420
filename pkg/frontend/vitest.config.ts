import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    // the e2e suite spawns a real debug server; give it headroom
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
