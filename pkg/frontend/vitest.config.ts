import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30000,
    hookTimeout: 60000,
    // Each test file boots its own backend process; keep them sequential
    // so a slow machine is not juggling several servers at once.
    fileParallelism: false,
  },
});
