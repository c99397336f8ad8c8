// Pattern designer state: a mutable draft of one catalog with validation
// mirroring the service, and export blocked while any invariant fails.

import {
  Catalog,
  DraftIssue,
  SlippageEntry,
  StaticEntry,
  parseCatalog,
  serializeCatalog,
  validateCatalog,
} from './catalog.js';

export class DesignerModel {
  draft: Catalog;

  constructor(initial?: Catalog) {
    this.draft = initial ?? {
      name: 'custom',
      speed_set_mm_s: [43, 60, 86],
      static: [],
      slippage: [],
    };
  }

  static fromJson(text: string): DesignerModel {
    return new DesignerModel(parseCatalog(text));
  }

  private nextId(): number {
    return this.draft.static.length + this.draft.slippage.length + 1;
  }

  addStatic(entry: Omit<StaticEntry, 'id'>): StaticEntry {
    const created = { id: this.nextId(), ...entry };
    this.draft.static.push(created);
    return created;
  }

  addSlippage(entry: Omit<SlippageEntry, 'id'>): SlippageEntry {
    const created = { id: this.nextId(), ...entry };
    this.draft.slippage.push(created);
    return created;
  }

  removeEntry(id: number): void {
    this.draft.static = this.draft.static.filter((p) => p.id !== id);
    this.draft.slippage = this.draft.slippage.filter((p) => p.id !== id);
  }

  issues(): DraftIssue[] {
    return validateCatalog(this.draft);
  }

  get exportBlocked(): boolean {
    return this.issues().length > 0;
  }

  // Returns the catalog file contents, or throws while invariants fail.
  export(): string {
    const issues = this.issues();
    if (issues.length > 0) {
      throw new Error(`draft invalid: ${issues.map((i) => i.invariant).join(', ')}`);
    }
    return serializeCatalog(this.draft);
  }
}
