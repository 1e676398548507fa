/* tslint:disable */
/* eslint-disable */

/**
 * Fisher information summary of a bundled scheme at a spherical tensor,
 * as JSON `{mu_bar, isotropic, residual, covariance}`.
 */
export function design_fisher(scheme: string, diffusivity: number, rho: number, eta2: number): string;

/**
 * Ordered eigenvalues of `n` draws around `mean` (three numbers per draw).
 */
export function eigenvalue_samples(mu: number, lambda: number, mean: Float64Array, n: number, seed: bigint): Float64Array;

/**
 * Histogram of τ2 under a spherical mean with the χ²₅ bin probabilities,
 * as JSON `{edges, counts, expected}`.
 */
export function tau2_null_histogram(mu: number, lambda: number, n: number, bins: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly design_fisher: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly eigenvalue_samples: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly tau2_null_histogram: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
