// Shared fixtures: a complete canned analyze response and a scriptable
// client stand-in for store tests.

import { AnalyzeConfig, AnalyzeResponse, PaletteClient } from '../src/api.js';

export function makeResponse(overrides: {
    configHash?: string;
    m?: number;
    alpha?: number;
    permutation?: number[];
    orderSource?: string;
    cluster?: number[] | null;
    representatives?: number[] | null;
    tsne?: [number, number][] | null;
} = {}): AnalyzeResponse {
    const configHash = overrides.configHash ?? 'hash-0';
    const permutation = overrides.permutation ?? [0, 1, 2, 3];
    return {
        config_hash: configHash,
        payload: {
            schema: 'palette-report/1',
            config: { m: overrides.m ?? 2, alpha: overrides.alpha ?? 0.5 },
            config_hash: configHash,
            ensemble: {
                hash: 'ens-0',
                n_vertices: permutation.length,
                n_partitions: 2,
                vertex_names: null,
            },
            groups: {
                labels: [
                    ['a', 0],
                    ['a', 1],
                    ['b', 0],
                    ['b', 1],
                ],
                dropped: [],
                cluster: overrides.cluster === undefined ? [0, 1, 0, 1] : overrides.cluster,
                representatives:
                    overrides.representatives === undefined ? [0, 3] : overrides.representatives,
                tsne:
                    overrides.tsne === undefined
                        ? [
                              [0, 0],
                              [4, 1],
                              [1, 3],
                              [5, 4],
                          ]
                        : overrides.tsne,
                tsne_final_kl: 0.125,
                tsne_perplexity: 1.0,
                silhouette: 0.5,
            },
            reduced: {
                labels: ['a/0', 'b/1'],
                entries: [
                    [0.8, 0.7, 0.1, 0.2],
                    [0.2, 0.3, 0.9, 0.8],
                ],
                dropped_mass: 1.5,
            },
            order: {
                permutation,
                source: overrides.orderSource ?? 'src-0',
            },
            diagnostics: {
                contiguity_breaks: [0, 0],
                notes: [],
            },
        },
        geometry: {
            bands: [],
            baseline: [0, 0, 0, 0],
            colors: ['#1f77b4', '#ff7f0e'],
            labels: ['a/0', 'b/1'],
            scale: 2,
            heatmap: [
                [0.8, 0.7, 0.1, 0.2],
                [0.2, 0.3, 0.9, 0.8],
            ],
        },
        runtime: {
            timings: { total: 0.01 },
            cache: { divergence: 'miss', tsne: 'miss' },
        },
    };
}

export interface AnalyzeCall {
    id: string;
    config: AnalyzeConfig;
}

/**
 * Scriptable PaletteClient: every analyze is recorded; responses resolve
 * immediately unless a pending gate is installed. Aborts reject the way
 * fetch would.
 */
export class FakeClient {
    readonly analyzeCalls: AnalyzeCall[] = [];
    readonly diagramCalls: string[] = [];
    respond: (config: AnalyzeConfig) => AnalyzeResponse = () => makeResponse();
    failWith: Error | null = null;
    private gates: { release: () => void }[] = [];
    holdNext = false;

    analyze(id: string, config: AnalyzeConfig, signal?: AbortSignal): Promise<AnalyzeResponse> {
        this.analyzeCalls.push({ id, config });
        return new Promise((resolve, reject) => {
            const finish = () => {
                if (this.failWith) {
                    reject(this.failWith);
                } else {
                    resolve(this.respond(config));
                }
            };
            signal?.addEventListener('abort', () => {
                const abort = new Error('The operation was aborted.');
                abort.name = 'AbortError';
                reject(abort);
            });
            if (this.holdNext) {
                this.gates.push({ release: finish });
            } else {
                finish();
            }
        });
    }

    releaseAll(): void {
        const gates = this.gates;
        this.gates = [];
        for (const gate of gates) {
            gate.release();
        }
    }

    fetchDiagram(id: string, hash: string, kind: '1d' | '2d'): Promise<string> {
        this.diagramCalls.push(`${id}:${hash}:${kind}`);
        return Promise.resolve(`<svg data-kind="${kind}"></svg>`);
    }

    asClient(): PaletteClient {
        return this as unknown as PaletteClient;
    }
}

export const settle = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));
