// Client-rendered t-SNE scatter of the stacked groups. This is the one
// chart the browser draws itself (it needs hover interactivity); every
// coordinate, cluster id, and color comes straight from the service
// response.

import { AnalyzeResponse } from './api.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface ScatterHooks {
    /** Called with the hovered stacked-group index, or null on leave. */
    onHover?: (group: number | null) => void;
}

export interface FittedPoint {
    x: number;
    y: number;
}

/**
 * Linear map of embedding coordinates into a width-by-height viewport with
 * padding. Pure layout; degenerate extents collapse to the center.
 */
export function fitPoints(
    points: [number, number][],
    width: number,
    height: number,
    pad: number,
): FittedPoint[] {
    if (points.length === 0) {
        return [];
    }
    const xs = points.map((p) => p[0]);
    const ys = points.map((p) => p[1]);
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const spanX = maxX - minX;
    const spanY = maxY - minY;
    const scale = Math.min(
        spanX > 0 ? (width - 2 * pad) / spanX : Infinity,
        spanY > 0 ? (height - 2 * pad) / spanY : Infinity,
    );
    const usable = Number.isFinite(scale) ? scale : 0;
    const cx = (minX + maxX) / 2;
    const cy = (minY + maxY) / 2;
    return points.map(([x, y]) => ({
        x: width / 2 + (x - cx) * usable,
        // screen y grows downward
        y: height / 2 - (y - cy) * usable,
    }));
}

export const UNCLUSTERED_COLOR = '#bbbbbb';

/** Color for one stacked group: its cluster's band color. */
export function groupColor(response: AnalyzeResponse, group: number): string {
    const cluster = response.payload.groups.cluster;
    if (cluster === null) {
        return UNCLUSTERED_COLOR;
    }
    return response.geometry.colors[cluster[group]];
}

export function renderScatter(
    container: HTMLElement,
    response: AnalyzeResponse,
    hooks: ScatterHooks = {},
): void {
    container.textContent = '';
    const points = response.payload.groups.tsne;
    if (points === null) {
        const note = document.createElement('p');
        note.className = 'scatter-empty';
        note.textContent = 'no embedding in this report';
        container.appendChild(note);
        return;
    }

    const width = 360;
    const height = 300;
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
    svg.setAttribute('class', 'tsne-scatter');

    const labels = response.payload.groups.labels;
    const representatives = new Set(response.payload.groups.representatives ?? []);
    const fitted = fitPoints(points, width, height, 16);

    fitted.forEach((pos, g) => {
        const circle = document.createElementNS(SVG_NS, 'circle');
        circle.setAttribute('cx', String(pos.x));
        circle.setAttribute('cy', String(pos.y));
        circle.setAttribute('r', representatives.has(g) ? '7' : '5');
        circle.setAttribute('fill', groupColor(response, g));
        circle.dataset.group = String(g);
        if (representatives.has(g)) {
            // representatives carry an outline so they stand out
            circle.setAttribute('stroke', '#222222');
            circle.setAttribute('stroke-width', '2');
            circle.classList.add('representative');
        }
        const [name, local] = labels[g];
        const title = document.createElementNS(SVG_NS, 'title');
        title.textContent = `${name}/${local}`;
        circle.appendChild(title);

        circle.addEventListener('mouseenter', () => {
            circle.setAttribute('r', representatives.has(g) ? '9' : '7');
            hooks.onHover?.(g);
        });
        circle.addEventListener('mouseleave', () => {
            circle.setAttribute('r', representatives.has(g) ? '7' : '5');
            hooks.onHover?.(null);
        });
        svg.appendChild(circle);
    });

    container.appendChild(svg);
}
