/**
 * Trailing-edge throttle for pose commands: emit at most one message per
 * interval, never dropping the final state (the server must converge to
 * where the controls actually are).
 */
export interface Throttled<T> {
  push(value: T): void;
  /** Cancel any pending trailing emit. */
  dispose(): void;
}

export function throttle<T>(
  emit: (value: T) => void,
  intervalMs: number,
  now: () => number = () => Date.now(),
  schedule: (fn: () => void, ms: number) => unknown = (fn, ms) => setTimeout(fn, ms),
  cancel: (handle: unknown) => void = (h) => clearTimeout(h as number),
): Throttled<T> {
  let lastSent = -Infinity;
  let pending: { value: T } | null = null;
  let timer: unknown = null;

  const flush = () => {
    timer = null;
    if (pending !== null) {
      const { value } = pending;
      pending = null;
      lastSent = now();
      emit(value);
    }
  };

  return {
    push(value: T) {
      const elapsed = now() - lastSent;
      if (elapsed >= intervalMs && timer === null) {
        lastSent = now();
        emit(value);
        return;
      }
      pending = { value };
      if (timer === null) {
        timer = schedule(flush, Math.max(intervalMs - elapsed, 0));
      }
    },
    dispose() {
      if (timer !== null) {
        cancel(timer);
        timer = null;
      }
      pending = null;
    },
  };
}

/** 40 ms floor keeps any burst of control changes at or below 30
 * messages per second, trailing emit included. */
export const POSE_THROTTLE_MS = 40;
