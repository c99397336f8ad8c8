// Route mount: #/experimenter (default) and #/subject share one page and
// one service; only the view differs.

import { ApiClient } from './api.js';
import { ExperimenterConsole } from './console.js';
import { SubjectConsole } from './subject.js';

const api = new ApiClient(
  (window as { SERVICE_URL?: string }).SERVICE_URL ?? 'http://127.0.0.1:7430',
);

let active: { unmount(): void } | null = null;

function show(routeId: 'experimenter' | 'subject'): void {
  for (const id of ['experimenter', 'subject']) {
    const panel = document.getElementById(`view-${id}`);
    if (panel !== null) {
      panel.hidden = id !== routeId;
    }
  }
}

async function route(): Promise<void> {
  active?.unmount();
  if (window.location.hash === '#/subject') {
    show('subject');
    const console_ = new SubjectConsole(api);
    await console_.mount();
    active = console_;
  } else {
    show('experimenter');
    const console_ = new ExperimenterConsole(api);
    await console_.mount();
    active = console_;
  }
}

window.addEventListener('hashchange', () => {
  void route();
});
void route();
