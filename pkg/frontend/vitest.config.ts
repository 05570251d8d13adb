import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the e2e file boots the Python service; give it room
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
