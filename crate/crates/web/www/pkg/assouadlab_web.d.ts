/* tslint:disable */
/* eslint-disable */

/**
 * Summary JSON of a percolation run together with its picture.
 */
export class PercolationRun {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    picture(): Picture;
    readonly summary: string;
}

/**
 * Greyscale image handed to the page as RGBA bytes.
 */
export class Picture {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    rgba(): Uint8Array;
    readonly height: number;
    readonly width: number;
}

export function dimensions(spec: string): string;

export function percolate(n: bigint, p: string, depth: number, seed: bigint): PercolationRun;

export function render(spec: string, seed: bigint, max_side: number): Picture;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_percolationrun_free: (a: number, b: number) => void;
    readonly __wbg_picture_free: (a: number, b: number) => void;
    readonly dimensions: (a: number, b: number) => [number, number, number, number];
    readonly percolate: (a: bigint, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly percolationrun_picture: (a: number) => number;
    readonly percolationrun_summary: (a: number) => [number, number];
    readonly picture_height: (a: number) => number;
    readonly picture_rgba: (a: number) => [number, number];
    readonly picture_width: (a: number) => number;
    readonly render: (a: number, b: number, c: bigint, d: number) => [number, number, number];
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
