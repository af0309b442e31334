import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    environment: 'node',
    // the round-trip suite boots the real backend and waits for tick boundaries
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
