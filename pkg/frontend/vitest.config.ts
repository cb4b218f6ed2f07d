import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The round-trip suite boots the real service, which warms its contact
    // solution before listening.
    hookTimeout: 120_000,
    testTimeout: 30_000,
  },
});
