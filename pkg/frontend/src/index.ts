// ---------------------------------------------------------------------------
// coreset-sc -- typed wrapper around the coreset spectral clustering core
// ---------------------------------------------------------------------------
// The core is consumed exclusively through its public surfaces: the CLI
// subcommands and their file formats (edge lists, label files, JSON
// reports). CSR input is validated here at the boundary, so invariant
// violations fail with a JavaScript error naming the offending entry before
// anything is handed to the core.
//
// Usage:
//   import { generateSbm, fitFromCsr, ari } from "coreset-sc";
//   const { graph, labels } = generateSbm(4, 100, 0.5, 0.01, 7);
//   const model = fitFromCsr(graph, { k: 4, seed: 7, backend: "fast" });
//   console.log(model.ncutFull, ari(model.labels, labels));

import {
  CsrGraph,
  CsrValidationError,
  csrToEdgeList,
  parseEdgeList,
  validateCsr,
} from "./csr.js";
import { CoreError, runCli, scratch } from "./cli.js";

export { CsrGraph, CsrValidationError, csrToEdgeList, parseEdgeList, validateCsr };
export { CoreError };

export type Backend = "dense" | "fast";

export interface FitOptions {
  k: number;
  eps?: number;
  seed?: number;
  backend?: Backend;
  coresetFrac?: number;
  sigma?: number;
}

export interface StageTimings {
  [stage: string]: number;
}

/** One pipeline run: labels plus the report the core wrote for it. */
export interface BoundModel {
  labels: number[];
  labelsCoreset: number[];
  ncutCoreset: number;
  ncutFull: number;
  coresetSize: number;
  k: number;
  seed: number;
  params: Record<string, unknown>;
  timingsMs: StageTimings;
  /** Raw report JSON, exactly as the core serialised it. */
  raw: Record<string, unknown>;
}

interface ClusterReport {
  config: Record<string, unknown>;
  runs: Array<{
    k: number;
    seed: number;
    coreset_size: number;
    ncut_coreset: number;
    ncut_full: number;
    params: Record<string, unknown>;
    timings_ms: StageTimings;
    labels_coreset: number[];
    labels: number[];
    ari?: number;
  }>;
}

/** Run coreset spectral clustering on a CSR adjacency. */
export function fitFromCsr(graph: CsrGraph, opts: FitOptions): BoundModel {
  validateCsr(graph);
  const { k, eps = 0.2, seed = 0, backend = "dense", coresetFrac, sigma } = opts;
  if (!Number.isInteger(k) || k < 2) {
    throw new CsrValidationError(`k must be an integer >= 2, got ${k}`);
  }
  const s = scratch();
  try {
    const graphPath = s.write("graph.txt", csrToEdgeList(graph));
    const args = [
      "cluster", graphPath,
      "--k", String(k),
      "--eps", String(eps),
      "--seed", String(seed),
      "--algo", backend === "fast" ? "csc-fast" : "csc",
      "--out-labels", s.path("labels.txt"),
      "--report", s.path("report.json"),
    ];
    if (coresetFrac !== undefined) args.push("--coreset-frac", String(coresetFrac));
    if (sigma !== undefined) args.push("--sigma", String(sigma));
    runCli(args);
    const report = s.readJson<ClusterReport>("report.json");
    const run = report.runs[0];
    return {
      labels: run.labels,
      labelsCoreset: run.labels_coreset,
      ncutCoreset: run.ncut_coreset,
      ncutFull: run.ncut_full,
      coresetSize: run.coreset_size,
      k: run.k,
      seed: run.seed,
      params: run.params,
      timingsMs: run.timings_ms,
      raw: report as unknown as Record<string, unknown>,
    };
  } finally {
    s.dispose();
  }
}

export interface SbmResult {
  graph: CsrGraph;
  labels: number[];
}

/** Sample a stochastic block model through the core's generator. */
export function generateSbm(
  k: number,
  clusterSize: number,
  p: number,
  q: number,
  seed = 0,
): SbmResult {
  const s = scratch();
  try {
    runCli([
      "generate", "sbm",
      "--k", String(k),
      "--size", String(clusterSize),
      "--p", String(p),
      "--q", String(q),
      "--seed", String(seed),
      "--out-graph", s.path("graph.txt"),
      "--out-labels", s.path("labels.txt"),
    ]);
    const graph = parseEdgeList(s.readLines("graph.txt").join("\n"));
    const labels = s.readLines("labels.txt").map(Number);
    return { graph, labels };
  } finally {
    s.dispose();
  }
}

/** Adjusted Rand index between two labelings (delegated to the core). */
export function ari(a: ArrayLike<number>, b: ArrayLike<number>): number {
  if (a.length !== b.length) {
    throw new CsrValidationError(
      `label lengths differ: ${a.length} vs ${b.length}`,
    );
  }
  const s = scratch();
  try {
    s.write("a.txt", joinLabels(a));
    s.write("b.txt", joinLabels(b));
    runCli([
      "eval",
      "--labels", s.path("a.txt"),
      "--truth", s.path("b.txt"),
      "--out", s.path("out.json"),
    ]);
    return s.readJson<{ ari: number }>("out.json").ari;
  } finally {
    s.dispose();
  }
}

/** Average-conductance normalised cut of a labelling (delegated to the core). */
export function ncut(graph: CsrGraph, labels: ArrayLike<number>, k?: number): number {
  validateCsr(graph);
  if (labels.length !== graph.n) {
    throw new CsrValidationError(
      `labels length ${labels.length} does not match vertex count ${graph.n}`,
    );
  }
  const s = scratch();
  try {
    s.write("graph.txt", csrToEdgeList(graph));
    s.write("labels.txt", joinLabels(labels));
    const args = [
      "eval",
      "--graph", s.path("graph.txt"),
      "--labels", s.path("labels.txt"),
      "--out", s.path("out.json"),
    ];
    if (k !== undefined) args.push("--k", String(k));
    runCli(args);
    return s.readJson<{ ncut_average: number }>("out.json").ncut_average;
  } finally {
    s.dispose();
  }
}

function joinLabels(labels: ArrayLike<number>): string {
  const parts: string[] = [];
  for (let i = 0; i < labels.length; i++) {
    const x = labels[i];
    if (!Number.isInteger(x)) {
      throw new CsrValidationError(`label at position ${i} is not an integer: ${x}`);
    }
    parts.push(String(x));
  }
  return parts.join("\n") + "\n";
}
