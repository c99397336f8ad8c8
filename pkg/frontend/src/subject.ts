// Subject view: the numbered answer guide and one answer per trial.
// Device state is deliberately hidden here (the physical setup screens
// the mechanism behind a barrier; this route mirrors that).

import { ApiClient, ServiceEvent } from './api.js';
import { parseCatalog } from './catalog.js';
import { ExperimentFlow } from './experimentFlow.js';
import { renderGuide } from './guide.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export class SubjectConsole {
  private api: ApiClient;
  private flow: ExperimentFlow;
  private events: { close: () => void } | null = null;
  private guideCatalog = 'static';

  constructor(api: ApiClient) {
    this.api = api;
    this.flow = new ExperimentFlow(api);
  }

  async mount(): Promise<void> {
    await this.flow.resume();
    const state = await this.api.state();
    if (state.session !== null) {
      this.guideCatalog = state.session.catalog.includes('slippage') ? 'slippage' : 'static';
    }
    await this.loadGuide();
    this.renderAnswers();
    this.renderStatus();
    this.events = this.api.openEvents((event) => this.onEvent(event));
  }

  unmount(): void {
    this.events?.close();
    this.events = null;
  }

  private onEvent(event: ServiceEvent): void {
    if (event.type === 'trial_started' || event.type === 'session_complete') {
      void this.flow.resume().then(() => {
        this.renderAnswers();
        this.renderStatus();
      });
    }
  }

  private async loadGuide(): Promise<void> {
    const response = await fetch(`${this.api.baseUrl}/catalog/${this.guideCatalog}`);
    const catalog = parseCatalog(await response.text());
    renderGuide(el('subject-guide'), catalog);
    const buttons = el('answer-buttons');
    buttons.innerHTML = '';
    const count = catalog.static.length + catalog.slippage.length;
    for (let id = 1; id <= count; id += 1) {
      const button = document.createElement('button');
      button.textContent = String(id);
      button.className = 'answer-btn';
      button.addEventListener('click', () => {
        void this.answer(id);
      });
      buttons.append(button);
    }
  }

  private setButtonsEnabled(enabled: boolean): void {
    for (const button of document.querySelectorAll<HTMLButtonElement>('.answer-btn')) {
      button.disabled = !enabled;
    }
  }

  private async answer(id: number): Promise<void> {
    // buttons are disabled until the server acknowledges: no optimistic UI
    this.setButtonsEnabled(false);
    const view = await this.flow.submitAnswer(id);
    this.renderStatus();
    if (view.currentTrial !== null) {
      this.setButtonsEnabled(true);
    }
  }

  private renderAnswers(): void {
    this.setButtonsEnabled(this.flow.view.currentTrial !== null);
  }

  private renderStatus(): void {
    const view = this.flow.view;
    const node = el('subject-status');
    if (view.complete) {
      node.textContent = 'session complete, thank you';
    } else if (view.currentTrial === null) {
      node.textContent = 'waiting for the experimenter to start a session';
    } else {
      node.textContent =
        `trial ${view.answered + 1} of ${view.total}: ` +
        'which numbered pattern did you feel?';
    }
    el('subject-error').textContent = view.lastError ?? '';
  }
}
