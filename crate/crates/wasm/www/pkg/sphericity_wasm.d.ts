/* tslint:disable */
/* eslint-disable */

/**
 * One fit of the estimator to `N((shift, 0, 0), diag(stretch², 1, 1))`.
 */
export class MsqFit {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly jackknife_ci: Float64Array;
    readonly msq: number;
    /**
     * `M̂²_k` for `k = 2..=n`.
     */
    readonly path: Float64Array;
    readonly pivotal_ci: Float64Array;
    readonly vhat: number;
}

export function fit_gaussian(n: number, shift: number, stretch: number, h: number, kappa: number, alpha: number, seed: bigint): MsqFit;

/**
 * Langevin density at angles `θ_i = iπ/(points − 1)` from the mean direction.
 */
export function langevin_profile(kappa: number, p: number, points: number): Float64Array;

/**
 * Density histogram of simulated W over `bins` equal cells of `[lo, hi]`.
 */
export function w_histogram(paths: number, steps: number, seed: bigint, bins: number, lo: number, hi: number): Float64Array;

/**
 * Quantile of W from the bundled table.
 */
export function w_quantile(level: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_msqfit_free: (a: number, b: number) => void;
    readonly fit_gaussian: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
    readonly langevin_profile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly msqfit_jackknife_ci: (a: number) => [number, number];
    readonly msqfit_msq: (a: number) => number;
    readonly msqfit_path: (a: number) => [number, number];
    readonly msqfit_pivotal_ci: (a: number) => [number, number];
    readonly msqfit_vhat: (a: number) => number;
    readonly w_histogram: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number, number];
    readonly w_quantile: (a: number) => [number, number, number];
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
