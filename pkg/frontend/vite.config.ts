import { defineConfig } from 'vitest/config';

// Dev server proxies API routes to the Python service; override the target
// with SPINEVIZ_API when it runs elsewhere.
const API = process.env.SPINEVIZ_API ?? 'http://127.0.0.1:8000';

export default defineConfig({
    server: {
        proxy: {
            '/datasets': API,
            '/simulate': API,
        },
    },
    test: {
        environment: 'node',
        // the end-to-end suite boots the Python service and runs five
        // simulations; give it room
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
});
