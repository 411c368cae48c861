export interface Debounced<A extends unknown[]> {
    call: (...args: A) => void;
    cancel: () => void;
    /** Run a pending invocation immediately instead of waiting. */
    flush: () => void;
    pending: () => boolean;
}

/**
 * Trailing-edge debounce: the wrapped function runs once, with the latest
 * arguments, after `waitMs` of quiet. Slider drags collapse to one call.
 */
export function debounce<A extends unknown[]>(
    fn: (...args: A) => void,
    waitMs: number,
): Debounced<A> {
    let timer: ReturnType<typeof setTimeout> | null = null;
    let lastArgs: A | null = null;

    const invoke = () => {
        timer = null;
        if (lastArgs !== null) {
            const args = lastArgs;
            lastArgs = null;
            fn(...args);
        }
    };

    return {
        call: (...args: A) => {
            lastArgs = args;
            if (timer !== null) {
                clearTimeout(timer);
            }
            timer = setTimeout(invoke, waitMs);
        },
        cancel: () => {
            if (timer !== null) {
                clearTimeout(timer);
                timer = null;
            }
            lastArgs = null;
        },
        flush: () => {
            if (timer !== null) {
                clearTimeout(timer);
                invoke();
            }
        },
        pending: () => timer !== null,
    };
}
