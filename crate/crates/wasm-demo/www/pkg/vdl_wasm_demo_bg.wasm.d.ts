/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_series_free: (a: number, b: number) => void;
export const linear_damping: (a: number, b: number, c: number) => [number, number, number];
export const nonlinear_run: (a: number, b: number, c: number) => [number, number, number];
export const plasma_echo: (a: number, b: number, c: number, d: number) => [number, number, number];
export const series_extra: (a: number) => [number, number];
export const series_times: (a: number) => [number, number];
export const series_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
