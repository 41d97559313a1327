/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_percolationrun_free: (a: number, b: number) => void;
export const __wbg_picture_free: (a: number, b: number) => void;
export const dimensions: (a: number, b: number) => [number, number, number, number];
export const percolate: (a: bigint, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const percolationrun_picture: (a: number) => number;
export const percolationrun_summary: (a: number) => [number, number];
export const picture_height: (a: number) => number;
export const picture_rgba: (a: number) => [number, number];
export const picture_width: (a: number) => number;
export const render: (a: number, b: number, c: bigint, d: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
