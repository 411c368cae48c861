import { defineConfig } from 'vitest/config';

export default defineConfig({
    test: {
        include: ['tests/**/*.test.ts'],
        // the service integration test spawns a real analysis server
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
});
