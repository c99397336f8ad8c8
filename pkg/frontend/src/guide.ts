// Numbered pattern thumbnails: the subject's visual answer guide.
// Static patterns show the pressed slots as filled dots among the three
// possible locations per contact line; slippage patterns show arrows whose
// repetition encodes speed (one = slow, two = middle, three = fast).

import { Catalog, SlippageEntry, StaticEntry } from './catalog.js';

const SLOT_X: Record<string, number> = { left: 0.2, center: 0.5, right: 0.8 };

function drawStatic(ctx: CanvasRenderingContext2D, w: number, h: number, entry: StaticEntry) {
  for (const [row, slot] of [
    [0.33, entry.a_slot],
    [0.66, entry.b_slot],
  ] as const) {
    for (const name of ['left', 'center', 'right']) {
      ctx.beginPath();
      ctx.arc(SLOT_X[name] * w, row * h, 4, 0, 2 * Math.PI);
      if (name === slot) {
        ctx.fillStyle = '#1f6feb';
        ctx.fill();
      } else {
        ctx.strokeStyle = '#999';
        ctx.stroke();
      }
    }
  }
}

function arrowCount(speed: number, speedSet: number[]): number {
  const sorted = [...speedSet].sort((a, b) => a - b);
  return sorted.indexOf(speed) + 1;
}

function drawArrow(
  ctx: CanvasRenderingContext2D,
  x0: number,
  x1: number,
  y: number,
) {
  const head = x1 > x0 ? -6 : 6;
  ctx.beginPath();
  ctx.moveTo(x0, y);
  ctx.lineTo(x1, y);
  ctx.moveTo(x1 + head, y - 4);
  ctx.lineTo(x1, y);
  ctx.lineTo(x1 + head, y + 4);
  ctx.stroke();
}

function drawSlippage(
  ctx: CanvasRenderingContext2D,
  w: number,
  h: number,
  entry: SlippageEntry,
  speedSet: number[],
) {
  ctx.strokeStyle = '#1f6feb';
  ctx.lineWidth = 1.5;
  for (const [rowBase, sweep] of [
    [0.3, entry.a],
    [0.65, entry.b],
  ] as const) {
    const count = arrowCount(sweep.speed, speedSet);
    for (let i = 0; i < count; i += 1) {
      const y = rowBase * h + i * 5;
      if (sweep.dir === 'ltr') {
        drawArrow(ctx, 0.2 * w, 0.8 * w, y);
      } else {
        drawArrow(ctx, 0.8 * w, 0.2 * w, y);
      }
    }
  }
}

export function renderGuide(container: HTMLElement, catalog: Catalog): void {
  container.innerHTML = '';
  const entries: Array<StaticEntry | SlippageEntry> = [
    ...catalog.static,
    ...catalog.slippage,
  ];
  entries.sort((a, b) => a.id - b.id);
  for (const entry of entries) {
    const cell = document.createElement('div');
    cell.className = 'guide-cell';
    const title = document.createElement('div');
    title.className = 'guide-number';
    title.textContent = String(entry.id);
    const canvas = document.createElement('canvas');
    canvas.width = 90;
    canvas.height = 60;
    const ctx = canvas.getContext('2d');
    if (ctx !== null) {
      if ('a_slot' in entry) {
        drawStatic(ctx, canvas.width, canvas.height, entry);
      } else {
        drawSlippage(ctx, canvas.width, canvas.height, entry, catalog.speed_set_mm_s);
      }
    }
    cell.append(title, canvas);
    container.append(cell);
  }
}
