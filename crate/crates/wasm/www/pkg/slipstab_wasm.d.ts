/* tslint:disable */
/* eslint-disable */

/**
 * Effective moduli and speeds of two anisotropic solids.
 */
export function effective_media(c44: number, c45: number, c55: number, rho: number, c44_prime: number, c45_prime: number, c55_prime: number, rho_prime: number): string;

/**
 * Neutral-mode curves over a log-spaced q grid.
 */
export function neutral_curves(mu_ratio: number, speed_ratio: number, b_over_a: number, q_min: number, q_max: number, points: number): string;

/**
 * Spring-block slider trajectory in reduced units.
 */
export function spring_block(a: number, b: number, k_over_kcr: number, mass_ratio: number, slip_law: boolean, perturbation: number, duration: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly effective_media: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly neutral_curves: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly spring_block: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
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
