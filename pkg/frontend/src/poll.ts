// Repeated refresh with overlap protection: a slow fetch never stacks a
// second one behind it.

export const DEFAULT_POLL_MS = 2000;

export interface Poller {
  stop(): void;
  tick(): Promise<void>;
}

export function startPolling(
  refresh: () => Promise<void>,
  intervalMs: number = DEFAULT_POLL_MS,
  schedule: (fn: () => void, ms: number) => unknown = setTimeout,
): Poller {
  let stopped = false;
  let running = false;

  const tick = async (): Promise<void> => {
    if (running) return;
    running = true;
    try {
      await refresh();
    } finally {
      running = false;
    }
  };

  const loop = (): void => {
    if (stopped) return;
    void tick().finally(() => {
      if (!stopped) schedule(loop, intervalMs);
    });
  };
  loop();

  return {
    stop: () => {
      stopped = true;
    },
    tick,
  };
}
