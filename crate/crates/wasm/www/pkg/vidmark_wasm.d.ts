/* tslint:disable */
/* eslint-disable */

/**
 * Result of embedding a watermark into one synthesized frame.
 */
export class EmbedDemo {
    free(): void;
    [Symbol.dispose](): void;
    capacity_bytes(): number;
    changed_pixels(): number;
    crc32_hex(): string;
    /**
     * Per-channel `|marked - original|` scaled by `gain` so 2-bit changes are visible.
     */
    diff_rgba(gain: number): Uint8Array;
    height(): number;
    key_base64(): string;
    marked_rgba(): Uint8Array;
    max_delta(): number;
    /**
     * Synthesizes a `width` x `height` I-frame from `seed` and embeds `text`.
     */
    constructor(width: number, height: number, seed: number, text: string);
    original_rgba(): Uint8Array;
    pixels_used(): number;
    restored_exact(): boolean;
    /**
     * Flips the low bit of one channel (0 = R, 1 = G, 2 = B) of pixel
     * `index` in a copy of the marked frame, then verifies and restores it.
     */
    tamper(index: number, channel: number): string;
    width(): number;
}

/**
 * Human-readable I-frame index of an MPEG-1 stream or MV1 file.
 */
export function index_report(bytes: Uint8Array): string;

/**
 * A headers-only MPEG-1 elementary stream: one sequence header, then
 * `gops` GOPs whose pictures follow `pattern` (letters I, P, B, D).
 */
export function sample_mpeg1_stream(width: number, height: number, gops: number, pattern: string): Uint8Array;

/**
 * A synthesized MV1 file, for feeding back into [`index_report`].
 */
export function sample_mv1(width: number, height: number, gops: number, pictures_per_gop: number, seed: number): Uint8Array;

/**
 * Base64 text of `text`, followed by one line per sextet:
 * `symbol value binary v1 v2 v3`. At most `limit` sextet lines are listed.
 */
export function sextet_table(text: string, limit: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_embeddemo_free: (a: number, b: number) => void;
    readonly embeddemo_capacity_bytes: (a: number) => number;
    readonly embeddemo_changed_pixels: (a: number) => number;
    readonly embeddemo_crc32_hex: (a: number) => [number, number];
    readonly embeddemo_diff_rgba: (a: number, b: number) => [number, number];
    readonly embeddemo_height: (a: number) => number;
    readonly embeddemo_key_base64: (a: number) => [number, number];
    readonly embeddemo_marked_rgba: (a: number) => [number, number];
    readonly embeddemo_max_delta: (a: number) => number;
    readonly embeddemo_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly embeddemo_original_rgba: (a: number) => [number, number];
    readonly embeddemo_pixels_used: (a: number) => number;
    readonly embeddemo_restored_exact: (a: number) => number;
    readonly embeddemo_tamper: (a: number, b: number, c: number) => [number, number];
    readonly embeddemo_width: (a: number) => number;
    readonly index_report: (a: number, b: number) => [number, number];
    readonly sample_mpeg1_stream: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly sample_mv1: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly sextet_table: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
