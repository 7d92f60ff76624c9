/* tslint:disable */
/* eslint-disable */

/**
 * Hill-valley clustering of the fitter half of a uniform sample.
 */
export function cluster_population(problem: number, n: number, seed: number): string;

export function demo_problems(): string;

/**
 * Objective values on a regular grid over the problem's domain.
 */
export function landscape(problem: number, resolution: number): string;

/**
 * One full optimizer run with a reduced budget.
 */
export function optimize(problem: number, budget: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cluster_population: (a: number, b: number, c: number) => [number, number];
    readonly demo_problems: () => [number, number];
    readonly landscape: (a: number, b: number) => [number, number];
    readonly optimize: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
