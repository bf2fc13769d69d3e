/* tslint:disable */
/* eslint-disable */

/**
 * `samples` points of `x0 exp(-m t)` on `[0, t_max]`, flattened as
 * `[t0, x0, t1, x1, ...]` with `t` in days.
 */
export function decayCurve(x0: number, m_per_day: number, t_max_days: number, samples: number): Float64Array;

/**
 * Forward-integrated interest after each of `steps` equal steps, in the
 * same layout as [`decay_curve`].
 */
export function eulerCurve(x0: number, m_per_day: number, t_max_days: number, steps: number): Float64Array;

export function halfLifeDays(m_per_day: number): number;

/**
 * Simulates one user, bins the events and fits the decay law. Returns JSON
 * `{bins: [[t_days, count], ...], events, fit: {...}, truth: {...}}`.
 */
export function simulateFit(x0: number, m_per_day: number, lambda0_per_day: number, days: number, bin_days: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly decayCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly eulerCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly halfLifeDays: (a: number) => [number, number, number];
    readonly simulateFit: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
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
