// Pattern catalog model mirroring the service's file schema, with the
// same invariants so the designer can reject a bad draft before export.

export type SlotName = 'left' | 'center' | 'right';
export type DirName = 'ltr' | 'rtl';

export interface StaticEntry {
  id: number;
  a_slot: SlotName;
  b_slot: SlotName;
  press_mm: number;
  hold_s: number;
}

export interface SweepEntry {
  speed: number;
  dir: DirName;
}

export interface SlippageEntry {
  id: number;
  a: SweepEntry;
  b: SweepEntry;
  span_mm: number;
}

export interface Catalog {
  name: string;
  speed_set_mm_s: number[];
  static: StaticEntry[];
  slippage: SlippageEntry[];
}

export interface DraftIssue {
  invariant: string;
  message: string;
}

const SLOTS: SlotName[] = ['left', 'center', 'right'];
const DIRS: DirName[] = ['ltr', 'rtl'];

export function parseCatalog(text: string): Catalog {
  const raw = JSON.parse(text);
  if (typeof raw !== 'object' || raw === null) {
    throw new Error('catalog root must be an object');
  }
  const catalog: Catalog = {
    name: typeof raw.name === 'string' ? raw.name : 'catalog',
    speed_set_mm_s: (raw.speed_set_mm_s ?? []).map(Number),
    static: (raw.static ?? []).map((entry: Record<string, unknown>) => ({
      id: Number(entry.id),
      a_slot: entry.a_slot as SlotName,
      b_slot: entry.b_slot as SlotName,
      press_mm: Number(entry.press_mm ?? 1.0),
      hold_s: Number(entry.hold_s ?? 3.0),
    })),
    slippage: (raw.slippage ?? []).map((entry: Record<string, unknown>) => {
      const a = entry.a as Record<string, unknown>;
      const b = entry.b as Record<string, unknown>;
      return {
        id: Number(entry.id),
        a: { speed: Number(a.speed), dir: a.dir as DirName },
        b: { speed: Number(b.speed), dir: b.dir as DirName },
        span_mm: Number(entry.span_mm ?? 10.0),
      };
    }),
  };
  const issues = validateCatalog(catalog);
  if (issues.length > 0) {
    throw new Error(issues.map((issue) => issue.message).join('; '));
  }
  return catalog;
}

// Mirrors the service-side invariants: ids dense from 1 across both
// lists, slots and directions from the enums, speeds from the declared
// speed set, non-negative spans and holds.
export function validateCatalog(catalog: Catalog): DraftIssue[] {
  const issues: DraftIssue[] = [];
  const ids = [...catalog.static.map((p) => p.id), ...catalog.slippage.map((p) => p.id)].sort(
    (a, b) => a - b,
  );
  const expected = Array.from({ length: ids.length }, (_, i) => i + 1);
  if (ids.join(',') !== expected.join(',')) {
    issues.push({
      invariant: 'dense-ids',
      message: `pattern ids must be dense from 1 with no duplicates, got [${ids.join(', ')}]`,
    });
  }
  for (const entry of catalog.static) {
    if (!SLOTS.includes(entry.a_slot) || !SLOTS.includes(entry.b_slot)) {
      issues.push({
        invariant: 'slot-names',
        message: `pattern ${entry.id}: slots must be one of ${SLOTS.join('/')}`,
      });
    }
    if (!(entry.hold_s >= 0)) {
      issues.push({
        invariant: 'hold-non-negative',
        message: `pattern ${entry.id}: hold must be non-negative`,
      });
    }
  }
  for (const entry of catalog.slippage) {
    for (const [side, sweep] of [
      ['a', entry.a],
      ['b', entry.b],
    ] as const) {
      if (!catalog.speed_set_mm_s.includes(sweep.speed)) {
        issues.push({
          invariant: 'speed-set',
          message:
            `pattern ${entry.id}.${side}: speed ${sweep.speed} mm/s is not in the ` +
            `declared speed set [${catalog.speed_set_mm_s.join(', ')}]`,
        });
      }
      if (!DIRS.includes(sweep.dir)) {
        issues.push({
          invariant: 'direction-names',
          message: `pattern ${entry.id}.${side}: direction must be ltr or rtl`,
        });
      }
    }
    if (!(entry.span_mm >= 0)) {
      issues.push({
        invariant: 'span-non-negative',
        message: `pattern ${entry.id}: span must be non-negative`,
      });
    }
  }
  return issues;
}

// Emits the documented file schema (key order matches the shipped files;
// number formatting may differ from other writers, values do not).
export function serializeCatalog(catalog: Catalog): string {
  const out: Record<string, unknown> = {
    name: catalog.name,
    speed_set_mm_s: catalog.speed_set_mm_s,
  };
  if (catalog.static.length > 0) {
    out.static = catalog.static.map((p) => ({
      id: p.id,
      a_slot: p.a_slot,
      b_slot: p.b_slot,
      press_mm: p.press_mm,
      hold_s: p.hold_s,
    }));
  }
  if (catalog.slippage.length > 0) {
    out.slippage = catalog.slippage.map((p) => ({
      id: p.id,
      a: { speed: p.a.speed, dir: p.a.dir },
      b: { speed: p.b.speed, dir: p.b.dir },
      span_mm: p.span_mm,
    }));
  }
  return JSON.stringify(out, null, 2) + '\n';
}
