// Panel rendering. Diagram panels embed the service's SVG bytes untouched
// (no client-side re-layout), and the diagnostics panel shows response
// values verbatim: each displayed value carries the JSON path it came from
// so a test can diff the DOM against the response document.

import { AnalyzeResponse } from './api.js';

export function renderDiagram(el: HTMLElement, svgText: string, configHash: string): void {
    el.textContent = '';
    const badge = document.createElement('div');
    badge.className = 'config-hash';
    badge.dataset.configHash = configHash;
    badge.title = configHash;
    badge.textContent = configHash.slice(0, 12);
    const holder = document.createElement('div');
    holder.className = 'diagram-holder';
    holder.innerHTML = svgText;
    el.appendChild(badge);
    el.appendChild(holder);
}

/** The band a stacked group lands in: its cluster, or itself unfiltered. */
export function bandIndexForGroup(response: AnalyzeResponse, group: number): number {
    const cluster = response.payload.groups.cluster;
    return cluster === null ? group : cluster[group];
}

/**
 * Emphasize one band/row inside an embedded diagram by dimming the rest.
 * Streamgraphs draw one path per band; heatmaps batch each row in a
 * fill group. Legend shapes sit outside both selections.
 */
export function highlightBand(el: HTMLElement, band: number | null): void {
    const bands1d = el.querySelectorAll<SVGPathElement>('path');
    bands1d.forEach((path, i) => {
        path.style.opacity = band === null || i === band ? '' : '0.25';
    });
    const rows2d = el.querySelectorAll<SVGGElement>('g[fill]');
    rows2d.forEach((row, i) => {
        row.style.opacity = band === null || i === band ? '' : '0.25';
    });
}

/** Walk a dot-separated path through a JSON document. */
export function resolvePath(root: unknown, path: string): unknown {
    let node: unknown = root;
    for (const key of path.split('.')) {
        if (node === null || typeof node !== 'object') {
            return undefined;
        }
        node = (node as Record<string, unknown>)[key];
    }
    return node;
}

/** Response value as displayed text: strings as-is, everything else JSON. */
export function displayValue(value: unknown): string {
    return typeof value === 'string' ? value : JSON.stringify(value);
}

const DIAGNOSTIC_FIELDS: [string, string][] = [
    ['config hash', 'payload.config_hash'],
    ['vertices', 'payload.ensemble.n_vertices'],
    ['partitions', 'payload.ensemble.n_partitions'],
    ['silhouette', 'payload.groups.silhouette'],
    ['t-SNE KL', 'payload.groups.tsne_final_kl'],
    ['t-SNE perplexity', 'payload.groups.tsne_perplexity'],
    ['dropped mass', 'payload.reduced.dropped_mass'],
    ['contiguity breaks', 'payload.diagnostics.contiguity_breaks'],
    ['order source', 'payload.order.source'],
    ['notes', 'payload.diagnostics.notes'],
    ['divergence cache', 'runtime.cache.divergence'],
    ['t-SNE cache', 'runtime.cache.tsne'],
    ['total seconds', 'runtime.timings.total'],
];

export function renderDiagnostics(el: HTMLElement, response: AnalyzeResponse): void {
    el.textContent = '';
    const list = document.createElement('dl');
    list.className = 'diagnostics';
    for (const [label, path] of DIAGNOSTIC_FIELDS) {
        const value = resolvePath(response, path);
        if (value === undefined) {
            continue;
        }
        const dt = document.createElement('dt');
        dt.textContent = label;
        const dd = document.createElement('dd');
        dd.dataset.path = path;
        dd.textContent = displayValue(value);
        list.appendChild(dt);
        list.appendChild(dd);
    }
    el.appendChild(list);
}

export function renderError(el: HTMLElement, message: string | null): void {
    el.textContent = message ?? '';
    el.classList.toggle('visible', message !== null);
}
