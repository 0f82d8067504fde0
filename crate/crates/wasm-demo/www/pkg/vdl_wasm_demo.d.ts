/* tslint:disable */
/* eslint-disable */

/**
 * A time series with optional summary numbers.
 */
export class Series {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Experiment-specific scalars, documented on each constructor.
     */
    readonly extra: Float64Array;
    readonly times: Float64Array;
    readonly values: Float64Array;
}

/**
 * |ρ̂(t,1)| from the Volterra equation for a Maxwellian of the given temperature.
 *
 * `extra` holds `[fitted rate, root decay rate, root frequency]`. Negative
 * `amplitude` selects an attractive interaction; the fitted rate is NaN when
 * the response does not decay.
 */
export function linear_damping(temperature: number, amplitude: number, horizon: number): Series;

/**
 * |ρ̂(t,k)| for k = 1, 2, 3 from the kinetic solver, interleaved per output time.
 *
 * `extra` holds `[relative mass drift, relative L² drift]`.
 */
export function nonlinear_run(epsilon: number, amplitude: number, horizon: number): Series;

/**
 * Mode-2 density after kicks of modes 1 at t = 0 and 3 at `tau`, on the reference interaction.
 *
 * `extra` holds `[predicted echo time, measured echo time, echo amplitude]`.
 */
export function plasma_echo(tau: number, amp1: number, amp2: number, horizon: number): Series;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_series_free: (a: number, b: number) => void;
    readonly linear_damping: (a: number, b: number, c: number) => [number, number, number];
    readonly nonlinear_run: (a: number, b: number, c: number) => [number, number, number];
    readonly plasma_echo: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly series_extra: (a: number) => [number, number];
    readonly series_times: (a: number) => [number, number];
    readonly series_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
