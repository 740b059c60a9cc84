/** Client-side action serialization: at most one in-flight mutation.
 *
 * Every user action is funneled through `run`, which chains it behind the
 * previous one. A failed action never blocks the queue; its rejection is
 * delivered to that action's caller only.
 */
export class MutationQueue {
  private tail: Promise<void> = Promise.resolve();
  private pending = 0;

  run<T>(task: () => Promise<T>): Promise<T> {
    this.pending += 1;
    const result = this.tail.then(() => task());
    this.tail = result.then(
      () => {
        this.pending -= 1;
      },
      () => {
        this.pending -= 1;
      },
    );
    return result;
  }

  get size(): number {
    return this.pending;
  }

  /** Resolves once every action enqueued so far (and while waiting) settles. */
  async idle(): Promise<void> {
    while (this.pending > 0) {
      await this.tail;
    }
  }
}
