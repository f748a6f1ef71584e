import { describe, expect, it } from "vitest";

import { startPolling } from "./poll.js";

const flush = () => new Promise((resolve) => setImmediate(resolve));

describe("startPolling", () => {
  it("refreshes immediately and then on every scheduled tick", async () => {
    let calls = 0;
    const scheduled: Array<() => void> = [];
    const poller = startPolling(
      async () => {
        calls += 1;
      },
      2000,
      (fn) => scheduled.push(fn as () => void),
    );
    await flush();
    expect(calls).toBe(1);
    scheduled.shift()!();
    await flush();
    expect(calls).toBe(2);
    poller.stop();
    scheduled.shift()?.();
    await flush();
    expect(calls).toBe(2);
  });

  it("does not stack refreshes while one is in flight", async () => {
    let inFlight = 0;
    let peak = 0;
    let release: () => void = () => {};
    const gate = new Promise<void>((resolve) => {
      release = resolve;
    });
    const poller = startPolling(
      async () => {
        inFlight += 1;
        peak = Math.max(peak, inFlight);
        await gate;
        inFlight -= 1;
      },
      2000,
      () => undefined,
    );
    await flush();
    void poller.tick();
    void poller.tick();
    await flush();
    expect(peak).toBe(1);
    release();
    await flush();
    poller.stop();
  });
});
