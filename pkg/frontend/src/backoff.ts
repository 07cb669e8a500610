// Reconnect pacing: doubles from base up to cap, reset on success.

export interface Backoff {
  next(): number;
  reset(): void;
}

export function createBackoff(base = 500, cap = 10_000): Backoff {
  let attempt = 0;
  return {
    next() {
      const delay = Math.min(cap, base * 2 ** attempt);
      attempt += 1;
      return delay;
    },
    reset() {
      attempt = 0;
    },
  };
}
