/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_embeddemo_free: (a: number, b: number) => void;
export const embeddemo_capacity_bytes: (a: number) => number;
export const embeddemo_changed_pixels: (a: number) => number;
export const embeddemo_crc32_hex: (a: number) => [number, number];
export const embeddemo_diff_rgba: (a: number, b: number) => [number, number];
export const embeddemo_height: (a: number) => number;
export const embeddemo_key_base64: (a: number) => [number, number];
export const embeddemo_marked_rgba: (a: number) => [number, number];
export const embeddemo_max_delta: (a: number) => number;
export const embeddemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const embeddemo_original_rgba: (a: number) => [number, number];
export const embeddemo_pixels_used: (a: number) => number;
export const embeddemo_restored_exact: (a: number) => number;
export const embeddemo_tamper: (a: number, b: number, c: number) => [number, number];
export const embeddemo_width: (a: number) => number;
export const index_report: (a: number, b: number) => [number, number];
export const sample_mpeg1_stream: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const sample_mv1: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const sextet_table: (a: number, b: number, c: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
