// Experimenter view: calibration, pattern playback, session control, the
// live linkage drawing, the report, and the pattern designer.

import { ApiClient, ServiceEvent, ServiceState } from './api.js';
import { parseCatalog } from './catalog.js';
import { DesignerModel } from './designer.js';
import { renderGuide } from './guide.js';
import { LinkageView } from './linkageView.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export class ExperimenterConsole {
  private api: ApiClient;
  private viewA: LinkageView | null = null;
  private viewB: LinkageView | null = null;
  private events: { close: () => void } | null = null;
  private designer = new DesignerModel();
  private contactDepth = 22;

  constructor(api: ApiClient) {
    this.api = api;
  }

  async mount(): Promise<void> {
    const state = await this.api.state();
    this.contactDepth = state.calibration.h_mm;
    const geom = {
      l1: state.geometry.l1_mm,
      l2: state.geometry.l2_mm,
      d: state.geometry.d_mm,
    };
    this.viewA = new LinkageView(el<HTMLCanvasElement>('canvas-a'), geom, 'contact point A');
    this.viewB = new LinkageView(el<HTMLCanvasElement>('canvas-b'), geom, 'contact point B');
    this.drawState(state);
    this.renderSession(state);

    el<HTMLButtonElement>('calibrate-btn').addEventListener('click', () => {
      void this.calibrate();
    });
    el<HTMLButtonElement>('play-btn').addEventListener('click', () => {
      void this.playSelected();
    });
    el<HTMLButtonElement>('start-btn').addEventListener('click', () => {
      void this.startSession();
    });
    el<HTMLButtonElement>('report-btn').addEventListener('click', () => {
      void this.showReport();
    });
    this.bindDesigner();
    await this.loadGuide('static');

    this.events = this.api.openEvents((event) => this.onEvent(event));
  }

  unmount(): void {
    this.events?.close();
    this.events = null;
  }

  private onEvent(event: ServiceEvent): void {
    if (event.type === 'state') {
      this.contactDepth = event.calibration.h_mm;
      this.drawState(event);
      this.renderSession(event);
    } else if (event.type === 'pose') {
      this.drawPoses(event.poses);
    } else if (
      event.type === 'trial_started' ||
      event.type === 'response_recorded' ||
      event.type === 'session_complete' ||
      event.type === 'playback_finished'
    ) {
      void this.refreshSession();
    }
  }

  private drawState(state: ServiceState): void {
    this.drawPoses(state.poses);
    el('status-line').textContent =
      `H = ${state.calibration.h_mm.toFixed(1)} mm, ` +
      `lateral range ±${state.calibration.lateral_range_mm.toFixed(1)} mm`;
  }

  private drawPoses(poses: ServiceState['poses']): void {
    this.viewA?.draw(poses.a.alpha_left_deg, poses.a.alpha_right_deg, this.contactDepth);
    this.viewB?.draw(poses.b.alpha_left_deg, poses.b.alpha_right_deg, this.contactDepth);
  }

  private async refreshSession(): Promise<void> {
    this.renderSession(await this.api.state());
  }

  private renderSession(state: ServiceState): void {
    const session = state.session;
    const node = el('session-line');
    if (session === null) {
      node.textContent = 'no session';
      return;
    }
    const current = session.current_trial;
    node.textContent =
      `${session.subject} on ${session.catalog}: ` +
      `${session.answered}/${session.trial_count} answered` +
      (session.complete
        ? ' (complete)'
        : current !== null
          ? `, trial ${current.trial_id} delivered`
          : '');
  }

  private async calibrate(): Promise<void> {
    const thickness = Number(el<HTMLInputElement>('thickness-input').value);
    const width = Number(el<HTMLInputElement>('width-input').value);
    try {
      const calibration = await this.api.calibrate(thickness, width);
      this.contactDepth = calibration.h_mm;
      el('error-line').textContent = '';
      this.drawState(await this.api.state());
    } catch (error) {
      el('error-line').textContent = String(error);
    }
  }

  private async playSelected(): Promise<void> {
    const catalog = el<HTMLSelectElement>('catalog-select').value as 'static' | 'slippage';
    const id = Number(el<HTMLInputElement>('pattern-input').value);
    try {
      await this.api.playPattern(id, catalog);
      el('error-line').textContent = '';
    } catch (error) {
      el('error-line').textContent = String(error);
    }
  }

  private async startSession(): Promise<void> {
    try {
      await this.api.startExperiment({
        catalog: el<HTMLSelectElement>('catalog-select').value as 'static' | 'slippage',
        repetitions: Number(el<HTMLInputElement>('reps-input').value),
        seed: Number(el<HTMLInputElement>('seed-input').value),
        subject: el<HTMLInputElement>('subject-input').value,
      });
      el('error-line').textContent = '';
      await this.refreshSession();
    } catch (error) {
      el('error-line').textContent = String(error);
    }
  }

  private async showReport(): Promise<void> {
    try {
      el('report-output').textContent = await this.api.reportText();
    } catch (error) {
      el('error-line').textContent = String(error);
    }
  }

  private async loadGuide(name: 'static' | 'slippage'): Promise<void> {
    const response = await fetch(`${this.api.baseUrl}/catalog/${name}`);
    renderGuide(el('guide'), parseCatalog(await response.text()));
  }

  private bindDesigner(): void {
    const issuesNode = el('designer-issues');
    const textarea = el<HTMLTextAreaElement>('designer-text');
    const refresh = () => {
      const issues = this.designer.issues();
      issuesNode.textContent =
        issues.length === 0
          ? 'draft valid'
          : issues.map((issue) => `${issue.invariant}: ${issue.message}`).join('\n');
      el<HTMLButtonElement>('designer-export-btn').disabled = this.designer.exportBlocked;
      el<HTMLButtonElement>('designer-upload-btn').disabled = this.designer.exportBlocked;
    };
    el<HTMLButtonElement>('designer-load-btn').addEventListener('click', () => {
      try {
        this.designer = DesignerModel.fromJson(textarea.value);
        refresh();
      } catch (error) {
        issuesNode.textContent = String(error);
      }
    });
    el<HTMLButtonElement>('designer-export-btn').addEventListener('click', () => {
      const blob = new Blob([this.designer.export()], { type: 'application/json' });
      const link = document.createElement('a');
      link.href = URL.createObjectURL(blob);
      link.download = `${this.designer.draft.name}.json`;
      link.click();
      URL.revokeObjectURL(link.href);
    });
    el<HTMLButtonElement>('designer-upload-btn').addEventListener('click', () => {
      void (async () => {
        try {
          await fetch(`${this.api.baseUrl}/catalog`, {
            method: 'POST',
            headers: { 'content-type': 'application/json' },
            body: this.designer.export(),
          });
          issuesNode.textContent = 'uploaded as the custom catalog';
        } catch (error) {
          issuesNode.textContent = String(error);
        }
      })();
    });
    refresh();
  }
}
