/* tslint:disable */
/* eslint-disable */

export function autoencode(masses: string, latent: number, seed: bigint): string;

/**
 * Directed and symmetric deficiencies between two binary symmetric
 * channels under a prior on the hypotheses.
 */
export function compare_channels(flip_a: number, flip_b: number, prior_h0: number): string;

/**
 * Bayes values of both channels over the losses `[[0, c], [1 − c, 0]]`,
 * with the deficiency bound on their gap.
 */
export function value_curve(flip_a: number, flip_b: number, prior_h0: number, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly autoencode: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly compare_channels: (a: number, b: number, c: number) => [number, number, number, number];
    readonly value_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
