// ---------------------------------------------------------------------------
// CSR graphs on the JavaScript side: validation and edge-list (de)serialising
// ---------------------------------------------------------------------------
// The core consumes whitespace edge lists; this module is the boundary that
// turns raw CSR arrays into that format, refusing anything that violates the
// core's graph invariants with an error naming the offending entry.

export interface CsrGraph {
  n: number;
  rowPtr: ArrayLike<number>;
  colIdx: ArrayLike<number>;
  values: ArrayLike<number>;
}

export class CsrValidationError extends Error {}

function isInteger(x: number): boolean {
  return Number.isInteger(x);
}

/** Check every SparseGraph invariant; throws CsrValidationError otherwise. */
export function validateCsr(g: CsrGraph): void {
  const { n, rowPtr, colIdx, values } = g;
  if (!isInteger(n) || n <= 0) {
    throw new CsrValidationError(`vertex count must be a positive integer, got ${n}`);
  }
  if (rowPtr.length !== n + 1) {
    throw new CsrValidationError(
      `rowPtr must have length n+1 = ${n + 1}, got ${rowPtr.length}`,
    );
  }
  if (rowPtr[0] !== 0) {
    throw new CsrValidationError(`rowPtr[0] must be 0, got ${rowPtr[0]}`);
  }
  const nnz = colIdx.length;
  if (values.length !== nnz) {
    throw new CsrValidationError(
      `colIdx and values must have equal length (${nnz} vs ${values.length})`,
    );
  }
  for (let u = 0; u < n; u++) {
    if (!isInteger(rowPtr[u + 1]) || rowPtr[u + 1] < rowPtr[u]) {
      throw new CsrValidationError(`rowPtr must be nondecreasing at index ${u + 1}`);
    }
  }
  if (rowPtr[n] !== nnz) {
    throw new CsrValidationError(`rowPtr[n] = ${rowPtr[n]} must equal nnz = ${nnz}`);
  }

  const degrees = new Float64Array(n);
  for (let u = 0; u < n; u++) {
    for (let e = rowPtr[u]; e < rowPtr[u + 1]; e++) {
      const v = colIdx[e];
      const w = values[e];
      if (!isInteger(v) || v < 0 || v >= n) {
        throw new CsrValidationError(`column index out of range at entry ${e}: ${v}`);
      }
      if (!Number.isFinite(w) || w < 0) {
        throw new CsrValidationError(`invalid edge weight at entry ${e}: ${w}`);
      }
      if (e > rowPtr[u] && colIdx[e - 1] >= v) {
        throw new CsrValidationError(
          `row ${u}: column indices must be strictly increasing ` +
            `(entries ${colIdx[e - 1]}, ${v})`,
        );
      }
      degrees[u] += w;
    }
  }
  for (let u = 0; u < n; u++) {
    if (degrees[u] <= 0) {
      throw new CsrValidationError(`vertex ${u} has zero degree`);
    }
  }
  // symmetry: every stored (u, v, w) needs the exact mirror entry
  for (let u = 0; u < n; u++) {
    for (let e = rowPtr[u]; e < rowPtr[u + 1]; e++) {
      const v = colIdx[e];
      if (v < u) continue; // mirror already checked from the other side
      const w = values[e];
      const back = findEntry(g, v, u);
      if (back === null || back !== w) {
        throw new CsrValidationError(
          `asymmetric entry (${u}, ${v}): weight ${w} but reverse is ${back ?? 0}`,
        );
      }
    }
  }
}

function findEntry(g: CsrGraph, u: number, v: number): number | null {
  let lo = g.rowPtr[u];
  let hi = g.rowPtr[u + 1] - 1;
  while (lo <= hi) {
    const mid = (lo + hi) >> 1;
    if (g.colIdx[mid] === v) return g.values[mid];
    if (g.colIdx[mid] < v) lo = mid + 1;
    else hi = mid - 1;
  }
  return null;
}

/** Serialise to the core's edge-list format (one undirected edge per line). */
export function csrToEdgeList(g: CsrGraph): string {
  const lines: string[] = [`%n ${g.n}`];
  for (let u = 0; u < g.n; u++) {
    for (let e = g.rowPtr[u]; e < g.rowPtr[u + 1]; e++) {
      const v = colIdx(g, e);
      if (v < u) continue;
      lines.push(`${u} ${v} ${g.values[e]}`);
    }
  }
  return lines.join("\n") + "\n";
}

function colIdx(g: CsrGraph, e: number): number {
  return g.colIdx[e];
}

/** Parse the core's edge-list format into a CSR graph (symmetrised). */
export function parseEdgeList(text: string): CsrGraph {
  let n = -1;
  const edges: Array<[number, number, number]> = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) continue;
    if (line.startsWith("%n")) {
      n = Number(line.split(/\s+/)[1]);
      continue;
    }
    const parts = line.split(/\s+/);
    if (parts.length < 2 || parts.length > 3) {
      throw new CsrValidationError(`line ${i + 1}: expected 'u v [w]'`);
    }
    const u = Number(parts[0]);
    const v = Number(parts[1]);
    const w = parts.length === 3 ? Number(parts[2]) : 1.0;
    if (!isInteger(u) || !isInteger(v) || u < 0 || v < 0) {
      throw new CsrValidationError(`line ${i + 1}: bad vertex indices`);
    }
    if (!Number.isFinite(w) || w < 0) {
      throw new CsrValidationError(`line ${i + 1}: bad weight`);
    }
    edges.push([u, v, w]);
    n = Math.max(n, u + 1, v + 1);
  }
  if (n <= 0) throw new CsrValidationError("empty edge list");

  // accumulate symmetric weights, duplicates summed
  const rows: Array<Map<number, number>> = Array.from({ length: n }, () => new Map());
  for (const [u, v, w] of edges) {
    rows[u].set(v, (rows[u].get(v) ?? 0) + w);
    if (u !== v) rows[v].set(u, (rows[v].get(u) ?? 0) + w);
  }
  const rowPtr = new Array<number>(n + 1).fill(0);
  for (let u = 0; u < n; u++) rowPtr[u + 1] = rowPtr[u] + rows[u].size;
  const nnz = rowPtr[n];
  const ci = new Array<number>(nnz);
  const vals = new Array<number>(nnz);
  for (let u = 0; u < n; u++) {
    const cols = [...rows[u].keys()].sort((a, b) => a - b);
    cols.forEach((v, j) => {
      ci[rowPtr[u] + j] = v;
      vals[rowPtr[u] + j] = rows[u].get(v)!;
    });
  }
  return { n, rowPtr, colIdx: ci, values: vals };
}
