// Typed client for the device service. The console never computes
// experiment truth locally: every number displayed comes from these
// endpoints (the linkage drawing alone recomputes FK, see kinematics.ts).

export interface PoseState {
  x_mm: number;
  y_mm: number;
  alpha_left_deg: number;
  alpha_right_deg: number;
  contact: 'hover' | 'contact' | 'pressing';
}

export interface CalibrationState {
  h_mm: number;
  lateral_range_mm: number;
  press_depth_max_mm: number;
}

export interface GeometryState {
  l1_mm: number;
  l2_mm: number;
  d_mm: number;
  spacer_mm: number;
  hover_gap_mm: number;
}

export interface TrialRef {
  trial_id: number;
  index: number;
  total?: number;
}

export interface SessionState {
  subject: string;
  catalog: string;
  trial_count: number;
  answered: number;
  complete: boolean;
  log_path: string;
  current_trial: TrialRef | null;
}

export interface PlaybackState {
  pattern_id: number;
  catalog: string;
  ticks_done: number;
  ticks_total: number;
}

export interface ServiceState {
  calibration: CalibrationState;
  geometry: GeometryState;
  poses: { a: PoseState; b: PoseState };
  playback: PlaybackState | null;
  session: SessionState | null;
}

export interface StartResponse {
  subject: string;
  catalog: string;
  trial_count: number;
  log_path: string;
  current_trial: TrialRef | null;
}

export interface AnswerResponse {
  recorded: boolean;
  complete: boolean;
  next_trial: TrialRef | null;
}

export type ServiceEvent =
  | ({ type: 'state' } & ServiceState)
  | { type: 'pose'; poses: { a: PoseState; b: PoseState }; t: number }
  | { type: 'playback_finished'; pattern_id: number }
  | { type: 'trial_started'; trial_id: number; index: number; total: number }
  | { type: 'response_recorded'; trial_id: number; complete: boolean }
  | { type: 'session_complete' };

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let name = `HTTP ${response.status}`;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body === 'object') {
      name = body.error ?? name;
      detail = body.detail ?? detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, name, detail);
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async state(): Promise<ServiceState> {
    return unwrap(await fetch(this.url('/state')));
  }

  async calibrate(thicknessMm: number, widthMm: number): Promise<CalibrationState> {
    return unwrap(
      await fetch(this.url('/calibration'), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ thickness_mm: thicknessMm, width_mm: widthMm }),
      }),
    );
  }

  async playPattern(id: number, catalog: 'static' | 'slippage'): Promise<unknown> {
    return unwrap(
      await fetch(this.url('/pattern/play'), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ id, catalog }),
      }),
    );
  }

  async startExperiment(opts: {
    catalog: 'static' | 'slippage';
    repetitions: number;
    seed: number;
    subject: string;
  }): Promise<StartResponse> {
    return unwrap(
      await fetch(this.url('/experiment/start'), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({
          catalog: opts.catalog,
          repetitions: opts.repetitions,
          seed: opts.seed,
          subject: opts.subject,
        }),
      }),
    );
  }

  async answer(trialId: number, answer: number): Promise<AnswerResponse> {
    return unwrap(
      await fetch(this.url('/experiment/answer'), {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ trial_id: trialId, answer }),
      }),
    );
  }

  async reportText(): Promise<string> {
    const response = await fetch(this.url('/experiment/report'));
    if (!response.ok) {
      await unwrap(response);
    }
    return response.text();
  }

  async reportJson(): Promise<Record<string, unknown>> {
    return unwrap(await fetch(this.url('/experiment/report?format=json')));
  }

  // Server-sent-events subscription built on fetch streaming so it works
  // in both the browser and the node test runner.
  openEvents(onEvent: (event: ServiceEvent) => void): { close: () => void } {
    const controller = new AbortController();
    const run = async () => {
      const response = await fetch(this.url('/events'), { signal: controller.signal });
      if (!response.ok || response.body === null) {
        return;
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = '';
      for (;;) {
        const { value, done } = await reader.read();
        if (done) {
          break;
        }
        buffer += decoder.decode(value, { stream: true });
        let boundary = buffer.indexOf('\n\n');
        while (boundary >= 0) {
          const chunk = buffer.slice(0, boundary);
          buffer = buffer.slice(boundary + 2);
          for (const line of chunk.split('\n')) {
            if (line.startsWith('data: ')) {
              onEvent(JSON.parse(line.slice('data: '.length)) as ServiceEvent);
            }
          }
          boundary = buffer.indexOf('\n\n');
        }
      }
    };
    run().catch(() => {
      // stream closed (abort or server shutdown)
    });
    return { close: () => controller.abort() };
  }
}
