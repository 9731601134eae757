import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // full-size MNIST fixtures and subprocess validation need headroom
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
