// Reconnect schedule for the stream: exponential with a ceiling.

export const BASE_DELAY_MS = 1000;
export const MAX_DELAY_MS = 30_000;

export function reconnectDelayMs(attempt: number): number {
  if (attempt <= 0) return 0;
  return Math.min(MAX_DELAY_MS, BASE_DELAY_MS * 2 ** (attempt - 1));
}
