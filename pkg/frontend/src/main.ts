// Page wiring: connects the controls, the store, and the panels.

import { AnalyzeConfig, PaletteClient } from './api.js';
import {
    bandIndexForGroup,
    highlightBand,
    renderDiagnostics,
    renderDiagram,
    renderError,
} from './panels.js';
import { renderScatter } from './scatter.js';
import { EnsembleView, ViewStore } from './state.js';

function byId<T extends HTMLElement>(id: string): T {
    const el = document.getElementById(id);
    if (!el) {
        throw new Error(`missing element #${id}`);
    }
    return el as T;
}

function controlConfig(): AnalyzeConfig {
    const knn = Number(byId<HTMLInputElement>('knn').value);
    return {
        m: Number(byId<HTMLInputElement>('groups').value),
        alpha: Number(byId<HTMLInputElement>('alpha').value),
        knn_k: knn === 0 ? null : knn,
        tsne_perplexity: Number(byId<HTMLInputElement>('perplexity').value),
        baseline_mode: byId<HTMLSelectElement>('baseline').value as AnalyzeConfig['baseline_mode'],
        residual: byId<HTMLInputElement>('residual').checked,
    };
}

let store: ViewStore | null = null;
let client: PaletteClient | null = null;

function connect(baseUrl: string): void {
    client = new PaletteClient(baseUrl);
    store = new ViewStore(client);
    store.subscribe(render);
    byId('ensembles').textContent = '';
    void client.health().then((ok) => {
        byId('service-status').textContent = ok ? 'connected' : 'unreachable';
    });
}

function sectionFor(view: EnsembleView): HTMLElement {
    const host = byId('ensembles');
    let section = host.querySelector<HTMLElement>(`[data-id="${view.id}"]`);
    if (section) {
        return section;
    }
    section = document.createElement('section');
    section.className = 'ensemble';
    section.dataset.id = view.id;
    section.innerHTML = `
        <h2>
            <span class="ensemble-name"></span>
            <button class="pin">pin order</button>
            <span class="busy-flag"></span>
        </h2>
        <div class="error-inline"></div>
        <div class="panels">
            <div class="panel scatter-panel"></div>
            <div class="panel diagram-1d"></div>
            <div class="panel diagram-2d hidden"></div>
            <div class="panel diagnostics-panel"></div>
        </div>
        <div class="view-toggle">
            <button data-kind="1d" class="active">streamgraph</button>
            <button data-kind="2d">heatmap</button>
        </div>`;
    host.appendChild(section);

    section.querySelector<HTMLButtonElement>('.pin')!.addEventListener('click', () => {
        if (!store) {
            return;
        }
        if (store.pinnedFrom() === view.id) {
            store.unpin();
        } else {
            store.pinOrderFrom(view.id);
        }
    });
    // switching 1D/2D is pure visibility, never a network request
    section.querySelectorAll<HTMLButtonElement>('.view-toggle button').forEach((button) => {
        button.addEventListener('click', () => {
            const kind = button.dataset.kind;
            section!.querySelector('.diagram-1d')!.classList.toggle('hidden', kind !== '1d');
            section!.querySelector('.diagram-2d')!.classList.toggle('hidden', kind !== '2d');
            section!.querySelectorAll('.view-toggle button').forEach((b) => {
                b.classList.toggle('active', b === button);
            });
        });
    });
    return section;
}

function renderSection(view: EnsembleView): void {
    const section = sectionFor(view);
    section.querySelector('.ensemble-name')!.textContent = view.name;
    section.querySelector('.busy-flag')!.textContent = view.busy ? 'analyzing' : '';
    renderError(section.querySelector<HTMLElement>('.error-inline')!, view.error);

    const pin = section.querySelector<HTMLButtonElement>('.pin')!;
    pin.textContent = store?.pinnedFrom() === view.id ? 'unpin order' : 'pin order';
    pin.disabled = view.response === null;

    if (!view.response || !view.svg1d || !view.svg2d) {
        return;
    }
    const hash = view.response.config_hash;
    const el1d = section.querySelector<HTMLElement>('.diagram-1d')!;
    const el2d = section.querySelector<HTMLElement>('.diagram-2d')!;
    renderDiagram(el1d, view.svg1d, hash);
    renderDiagram(el2d, view.svg2d, hash);
    renderDiagnostics(section.querySelector<HTMLElement>('.diagnostics-panel')!, view.response);

    const response = view.response;
    renderScatter(section.querySelector<HTMLElement>('.scatter-panel')!, response, {
        onHover: (group) => {
            const band = group === null ? null : bandIndexForGroup(response, group);
            highlightBand(el1d, band);
            highlightBand(el2d, band);
        },
    });
}

function render(): void {
    if (!store) {
        return;
    }
    for (const id of store.ids()) {
        renderSection(store.view(id));
    }
    const pinnedFrom = store.pinnedFrom();
    byId('pin-status').textContent = pinnedFrom
        ? `order pinned from ${store.view(pinnedFrom).name}`
        : 'each ensemble uses its own order';
}

function wireControls(): void {
    const sliders: [string, string, (value: number) => Partial<AnalyzeConfig>][] = [
        ['groups', 'groups-value', (v) => ({ m: v })],
        ['alpha', 'alpha-value', (v) => ({ alpha: v })],
        ['knn', 'knn-value', (v) => ({ knn_k: v === 0 ? null : v })],
        ['perplexity', 'perplexity-value', (v) => ({ tsne_perplexity: v })],
    ];
    for (const [id, valueId, patch] of sliders) {
        const input = byId<HTMLInputElement>(id);
        input.addEventListener('input', () => {
            byId(valueId).textContent = input.value;
            store?.updateConfigAll(patch(Number(input.value)));
        });
        byId(valueId).textContent = input.value;
    }
    byId<HTMLSelectElement>('baseline').addEventListener('change', () => {
        store?.updateConfigAll({
            baseline_mode: byId<HTMLSelectElement>('baseline').value as AnalyzeConfig['baseline_mode'],
        });
    });
    byId<HTMLInputElement>('residual').addEventListener('change', () => {
        store?.updateConfigAll({ residual: byId<HTMLInputElement>('residual').checked });
    });

    byId<HTMLInputElement>('ensemble-file').addEventListener('change', async (event) => {
        const input = event.target as HTMLInputElement;
        const file = input.files?.[0];
        if (!file || !client || !store) {
            return;
        }
        try {
            const id = await client.uploadEnsemble(await file.text());
            store.addEnsemble(id, file.name, controlConfig());
            await store.analyzeNow(id);
        } catch (err) {
            renderError(byId('upload-error'), err instanceof Error ? err.message : String(err));
        }
        input.value = '';
    });

    const baseUrl = byId<HTMLInputElement>('base-url');
    baseUrl.addEventListener('change', () => connect(baseUrl.value));
    connect(baseUrl.value);
}

if (typeof document !== 'undefined' && document.getElementById('base-url')) {
    wireControls();
}
