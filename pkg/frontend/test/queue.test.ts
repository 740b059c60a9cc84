import { describe, expect, it } from "vitest";

import { MutationQueue } from "../src/queue.js";

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (error: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

describe("MutationQueue", () => {
  it("runs at most one task at a time, in order", async () => {
    const queue = new MutationQueue();
    const events: string[] = [];
    const first = deferred<void>();

    const a = queue.run(async () => {
      events.push("a:start");
      await first.promise;
      events.push("a:end");
    });
    const b = queue.run(async () => {
      events.push("b:start");
    });

    await Promise.resolve();
    expect(events).toEqual(["a:start"]); // b must not start while a is in flight
    expect(queue.size).toBe(2);

    first.resolve();
    await Promise.all([a, b]);
    expect(events).toEqual(["a:start", "a:end", "b:start"]);
    expect(queue.size).toBe(0);
  });

  it("a failing task rejects its caller but does not block the queue", async () => {
    const queue = new MutationQueue();
    const failing = queue.run(async () => {
      throw new Error("boom");
    });
    const after = queue.run(async () => "ok");
    await expect(failing).rejects.toThrow("boom");
    await expect(after).resolves.toBe("ok");
  });

  it("idle() waits for everything enqueued, including chained work", async () => {
    const queue = new MutationQueue();
    const done: number[] = [];
    void queue.run(async () => {
      done.push(1);
      void queue.run(async () => {
        done.push(2);
      });
    });
    await queue.idle();
    expect(done).toEqual([1, 2]);
  });
});
