/* tslint:disable */
/* eslint-disable */

export function densityCurve(mu: number, a: number, b: number, points: number): Float64Array;

export function intervalCurve(a: number, b: number, alpha: number, points: number): Float64Array;

/**
 * JSON text of a [`Demo`]. Infinite endpoints are written as `null`.
 */
export function lassoDemo(n: number, p: number, k: number, strength: number, lambda: number, alpha: number, model_mode: boolean, seed: number, draw: number): string;

export function pivot(x: number, mu: number, a: number, b: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly densityCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly intervalCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly lassoDemo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly pivot: (a: number, b: number, c: number, d: number) => [number, number, number];
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
