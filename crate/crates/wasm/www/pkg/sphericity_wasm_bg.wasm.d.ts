/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_msqfit_free: (a: number, b: number) => void;
export const fit_gaussian: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number];
export const langevin_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const msqfit_jackknife_ci: (a: number) => [number, number];
export const msqfit_msq: (a: number) => number;
export const msqfit_path: (a: number) => [number, number];
export const msqfit_pivotal_ci: (a: number) => [number, number];
export const msqfit_vhat: (a: number) => number;
export const w_histogram: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number, number];
export const w_quantile: (a: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
