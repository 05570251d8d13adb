/**
 * Trailing-edge debounce: the wrapped function runs once per quiet
 * period, with the arguments of the last call.  cancel() drops any
 * pending call; flush() runs it immediately.
 */
export function debounce<T extends (...args: any[]) => void>(
  fn: T,
  delayMs: number,
): T & { cancel(): void; flush(): void } {
  let timerId: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: any[] | null = null;

  const fire = () => {
    timerId = null;
    const args = lastArgs ?? [];
    lastArgs = null;
    fn(...args);
  };

  const debounced = ((...args: any[]) => {
    lastArgs = args;
    if (timerId !== null) clearTimeout(timerId);
    timerId = setTimeout(fire, delayMs);
  }) as T & { cancel(): void; flush(): void };

  debounced.cancel = () => {
    if (timerId !== null) {
      clearTimeout(timerId);
      timerId = null;
    }
    lastArgs = null;
  };

  debounced.flush = () => {
    if (timerId !== null) {
      clearTimeout(timerId);
      fire();
    }
  };

  return debounced;
}
