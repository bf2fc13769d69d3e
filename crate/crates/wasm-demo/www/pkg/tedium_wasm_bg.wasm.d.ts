/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const decayCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const eulerCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const halfLifeDays: (a: number) => [number, number, number];
export const simulateFit: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
