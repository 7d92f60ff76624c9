/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const cluster_population: (a: number, b: number, c: number) => [number, number];
export const demo_problems: () => [number, number];
export const landscape: (a: number, b: number) => [number, number];
export const optimize: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
