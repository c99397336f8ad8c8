// Subject-side answer flow. The console holds no experiment truth: every
// transition is confirmed by the service before the local view advances,
// and a page reload can always resume from GET /state.

import { ApiClient, ApiError, TrialRef } from './api.js';

export interface FlowView {
  currentTrial: TrialRef | null;
  answered: number;
  total: number;
  complete: boolean;
  lastError: string | null;
}

export class ExperimentFlow {
  private api: ApiClient;
  private inFlight = false;
  view: FlowView = {
    currentTrial: null,
    answered: 0,
    total: 0,
    complete: false,
    lastError: null,
  };

  constructor(api: ApiClient) {
    this.api = api;
  }

  // Rebuild the view from the authoritative state (initial load or after
  // a reload mid-session).
  async resume(): Promise<FlowView> {
    const state = await this.api.state();
    const session = state.session;
    if (session === null) {
      this.view = {
        currentTrial: null,
        answered: 0,
        total: 0,
        complete: false,
        lastError: null,
      };
    } else {
      this.view = {
        currentTrial: session.current_trial,
        answered: session.answered,
        total: session.trial_count,
        complete: session.complete,
        lastError: null,
      };
    }
    return this.view;
  }

  async start(opts: {
    catalog: 'static' | 'slippage';
    repetitions: number;
    seed: number;
    subject: string;
  }): Promise<FlowView> {
    const started = await this.api.startExperiment(opts);
    this.view = {
      currentTrial: started.current_trial,
      answered: 0,
      total: started.trial_count,
      complete: false,
      lastError: null,
    };
    return this.view;
  }

  // Submit the answer for the current trial. Double submissions are
  // guarded client-side (one in-flight request, button state) and
  // server-side (409 on an answered trial); a rejected submission never
  // advances the local view.
  async submitAnswer(answer: number): Promise<FlowView> {
    if (this.inFlight) {
      return this.view;
    }
    const trial = this.view.currentTrial;
    if (trial === null) {
      this.view.lastError = 'no trial awaiting an answer';
      return this.view;
    }
    this.inFlight = true;
    try {
      const result = await this.api.answer(trial.trial_id, answer);
      this.view = {
        currentTrial: result.next_trial,
        answered: this.view.answered + 1,
        total: this.view.total,
        complete: result.complete,
        lastError: null,
      };
    } catch (error) {
      if (error instanceof ApiError) {
        // conflict or validation: re-sync from the service, then surface it
        const message = error.message;
        await this.resume();
        this.view.lastError = message;
      } else {
        throw error;
      }
    } finally {
      this.inFlight = false;
    }
    return this.view;
  }
}
