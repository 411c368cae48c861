// Typed client for the /v1 analysis service. All numbers shown anywhere in
// the UI originate from these response payloads; the client never computes.

export type GroupLabel = [string, number];

export interface ReportPayload {
    schema: string;
    config: Record<string, unknown>;
    config_hash: string;
    ensemble: {
        hash: string;
        n_vertices: number;
        n_partitions: number;
        vertex_names: string[] | null;
    };
    groups: {
        labels: GroupLabel[];
        dropped: GroupLabel[];
        cluster: number[] | null;
        representatives: number[] | null;
        tsne: [number, number][] | null;
        tsne_final_kl: number | null;
        tsne_perplexity: number | null;
        silhouette: number | null;
    };
    reduced: {
        labels: string[];
        entries: number[][];
        dropped_mass: number;
    };
    order: {
        permutation: number[];
        source: string;
    };
    diagnostics: {
        contiguity_breaks: number[];
        notes: string[];
    };
}

export interface Geometry {
    bands: number[][][];
    baseline: number[];
    colors: string[];
    labels: string[];
    scale: number;
    heatmap: number[][];
}

export interface RuntimeInfo {
    timings: Record<string, number>;
    cache: Record<string, string>;
}

export interface AnalyzeResponse {
    config_hash: string;
    payload: ReportPayload;
    geometry: Geometry;
    runtime: RuntimeInfo;
}

export interface PinnedOrder {
    permutation: number[];
    source?: string;
}

/** Analysis parameters; field names mirror the service's config schema. */
export interface AnalyzeConfig {
    m: number;
    alpha?: number;
    knn_k?: number | null;
    baseline_mode?: 'zero' | 'symmetric' | 'wiggle';
    scale?: number | null;
    residual?: boolean;
    filtering?: boolean;
    sorting?: boolean;
    seed?: number;
    restarts?: number;
    tsne_perplexity?: number;
    tsne_iterations?: number;
    tsne_learning_rate?: number;
    order_from?: PinnedOrder | null;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Raised for any non-2xx service response, carrying the HTTP status. */
export class ServiceError extends Error {
    readonly status: number;

    constructor(status: number, detail: string) {
        super(detail);
        this.name = 'ServiceError';
        this.status = status;
    }
}

async function errorFrom(response: Response): Promise<ServiceError> {
    let detail = `${response.status} ${response.statusText}`;
    try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') {
            detail = body.detail;
        }
    } catch {
        // non-JSON error body, keep the status line
    }
    return new ServiceError(response.status, detail);
}

export class PaletteClient {
    readonly baseUrl: string;
    private readonly fetchImpl: FetchLike;

    /**
     * @param baseUrl service root without the /v1 suffix, the UI's single
     *                connection setting
     * @param fetchImpl injectable for tests and request instrumentation
     */
    constructor(baseUrl: string, fetchImpl?: FetchLike) {
        this.baseUrl = baseUrl.replace(/\/+$/, '');
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }

    private url(path: string): string {
        return `${this.baseUrl}/v1${path}`;
    }

    async health(): Promise<boolean> {
        try {
            const response = await this.fetchImpl(this.url('/health'));
            return response.ok;
        } catch {
            return false;
        }
    }

    /** Upload an ensemble document; returns its content-addressed id. */
    async uploadEnsemble(document: string | object): Promise<string> {
        const body = typeof document === 'string' ? document : JSON.stringify(document);
        const response = await this.fetchImpl(this.url('/ensembles'), {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body,
        });
        if (!response.ok) {
            throw await errorFrom(response);
        }
        const data = await response.json();
        return data.id as string;
    }

    async analyze(
        ensembleId: string,
        config: AnalyzeConfig,
        signal?: AbortSignal,
    ): Promise<AnalyzeResponse> {
        const response = await this.fetchImpl(
            this.url(`/ensembles/${ensembleId}/analyze`),
            {
                method: 'POST',
                headers: { 'content-type': 'application/json' },
                body: JSON.stringify(config),
                signal,
            },
        );
        if (!response.ok) {
            throw await errorFrom(response);
        }
        return (await response.json()) as AnalyzeResponse;
    }

    diagramUrl(ensembleId: string, configHash: string, kind: '1d' | '2d'): string {
        const params = new URLSearchParams({ config_hash: configHash, kind });
        return this.url(`/ensembles/${ensembleId}/diagram?${params}`);
    }

    /** Fetch a rendered SVG exactly as the service produced it. */
    async fetchDiagram(
        ensembleId: string,
        configHash: string,
        kind: '1d' | '2d',
        signal?: AbortSignal,
    ): Promise<string> {
        const response = await this.fetchImpl(this.diagramUrl(ensembleId, configHash, kind), {
            signal,
        });
        if (!response.ok) {
            throw await errorFrom(response);
        }
        return await response.text();
    }
}
