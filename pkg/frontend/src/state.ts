// View-state store: one entry per uploaded ensemble, a shared parameter
// debounce, and latest-wins cancellation so at most one analyze request is
// ever in flight per ensemble.

import {
    AnalyzeConfig,
    AnalyzeResponse,
    PaletteClient,
    PinnedOrder,
} from './api.js';
import { Debounced, debounce } from './debounce.js';

export interface EnsembleView {
    id: string;
    name: string;
    config: AnalyzeConfig;
    response: AnalyzeResponse | null;
    svg1d: string | null;
    svg2d: string | null;
    error: string | null;
    busy: boolean;
    /** Wall time of the last completed analyze-plus-diagrams refresh. */
    lastDurationMs: number | null;
}

export interface StoreOptions {
    /** Quiet period before a parameter change turns into a request. */
    debounceMs?: number;
}

type Listener = () => void;

function isAbort(err: unknown): boolean {
    // fetch rejects with a DOMException, which is not an Error everywhere
    return (
        typeof err === 'object' &&
        err !== null &&
        (err as { name?: unknown }).name === 'AbortError'
    );
}

export class ViewStore {
    private readonly client: PaletteClient;
    private readonly debounceMs: number;
    private readonly views = new Map<string, EnsembleView>();
    private readonly sequence: string[] = [];
    private readonly timers = new Map<string, Debounced<[]>>();
    private readonly controllers = new Map<string, AbortController>();
    private readonly generations = new Map<string, number>();
    private readonly listeners = new Set<Listener>();
    private pinned: PinnedOrder | null = null;
    private pinnedFromId: string | null = null;

    constructor(client: PaletteClient, options: StoreOptions = {}) {
        this.client = client;
        this.debounceMs = options.debounceMs ?? 300;
    }

    subscribe(listener: Listener): () => void {
        this.listeners.add(listener);
        return () => this.listeners.delete(listener);
    }

    private emit(): void {
        for (const listener of this.listeners) {
            listener();
        }
    }

    ids(): string[] {
        return [...this.sequence];
    }

    view(id: string): EnsembleView {
        const view = this.views.get(id);
        if (!view) {
            throw new Error(`unknown ensemble ${id}`);
        }
        return view;
    }

    addEnsemble(id: string, name: string, config: AnalyzeConfig): EnsembleView {
        const existing = this.views.get(id);
        if (existing) {
            return existing;
        }
        const view: EnsembleView = {
            id,
            name,
            config: { ...config },
            response: null,
            svg1d: null,
            svg2d: null,
            error: null,
            busy: false,
            lastDurationMs: null,
        };
        this.views.set(id, view);
        this.sequence.push(id);
        this.emit();
        return view;
    }

    pinnedOrder(): PinnedOrder | null {
        return this.pinned;
    }

    pinnedFrom(): string | null {
        return this.pinnedFromId;
    }

    /**
     * Freeze the vertex order of one ensemble's last report and apply it to
     * every subsequent analysis, so diagrams of different ensembles share
     * a single column permutation.
     */
    pinOrderFrom(id: string): void {
        const view = this.view(id);
        if (!view.response) {
            throw new Error('no completed analysis to pin the order from');
        }
        const order = view.response.payload.order;
        this.pinned = { permutation: [...order.permutation], source: order.source };
        this.pinnedFromId = id;
        this.scheduleAll();
        this.emit();
    }

    unpin(): void {
        if (this.pinned === null) {
            return;
        }
        this.pinned = null;
        this.pinnedFromId = null;
        // every ensemble goes back to its own learned order
        this.scheduleAll();
        this.emit();
    }

    /** Merge a parameter change and schedule a debounced re-analysis. */
    updateConfig(id: string, patch: Partial<AnalyzeConfig>): void {
        const view = this.view(id);
        view.config = { ...view.config, ...patch };
        this.schedule(id);
        this.emit();
    }

    /** Apply one parameter change to all loaded ensembles. */
    updateConfigAll(patch: Partial<AnalyzeConfig>): void {
        for (const id of this.sequence) {
            const view = this.view(id);
            view.config = { ...view.config, ...patch };
            this.schedule(id);
        }
        this.emit();
    }

    private schedule(id: string): void {
        let timer = this.timers.get(id);
        if (!timer) {
            timer = debounce(() => {
                void this.runAnalyze(id);
            }, this.debounceMs);
            this.timers.set(id, timer);
        }
        timer.call();
    }

    private scheduleAll(): void {
        for (const id of this.sequence) {
            this.schedule(id);
        }
    }

    /** Skip the debounce and run immediately (upload flow, tests). */
    analyzeNow(id: string): Promise<void> {
        this.timers.get(id)?.cancel();
        return this.runAnalyze(id);
    }

    private requestConfig(view: EnsembleView): AnalyzeConfig {
        return this.pinned
            ? { ...view.config, order_from: this.pinned }
            : { ...view.config };
    }

    private async runAnalyze(id: string): Promise<void> {
        const view = this.view(id);

        // latest wins: kill whatever this ensemble still has in flight
        this.controllers.get(id)?.abort();
        const controller = new AbortController();
        this.controllers.set(id, controller);
        const generation = (this.generations.get(id) ?? 0) + 1;
        this.generations.set(id, generation);

        view.busy = true;
        this.emit();

        const started = performance.now();
        try {
            const response = await this.client.analyze(
                id,
                this.requestConfig(view),
                controller.signal,
            );
            const [svg1d, svg2d] = await Promise.all([
                this.client.fetchDiagram(id, response.config_hash, '1d', controller.signal),
                this.client.fetchDiagram(id, response.config_hash, '2d', controller.signal),
            ]);
            if (this.generations.get(id) !== generation) {
                return;
            }
            view.response = response;
            view.svg1d = svg1d;
            view.svg2d = svg2d;
            view.error = null;
            view.lastDurationMs = performance.now() - started;
        } catch (err) {
            if (isAbort(err) || this.generations.get(id) !== generation) {
                return;
            }
            // keep the previous panels; surface the message inline
            view.error = err instanceof Error ? err.message : String(err);
        } finally {
            if (this.generations.get(id) === generation) {
                view.busy = false;
                this.emit();
            }
        }
    }
}
