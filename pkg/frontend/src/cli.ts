// ---------------------------------------------------------------------------
// Driving the core CLI: process invocation and scratch-file management
// ---------------------------------------------------------------------------

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class CoreError extends Error {}

/**
 * Resolve the CLI command. `CORESET_SC_CLI` overrides (whitespace-separated),
 * otherwise the installed `coreset-sc` entry point is used with a
 * `python3 -m coreset_sc` fallback.
 */
function cliCommand(): string[][] {
  const env = process.env.CORESET_SC_CLI;
  if (env && env.trim() !== "") return [env.trim().split(/\s+/)];
  return [["coreset-sc"], ["python3", "-m", "coreset_sc"]];
}

export function runCli(args: string[]): void {
  const candidates = cliCommand();
  for (let i = 0; i < candidates.length; i++) {
    const [cmd, ...pre] = candidates[i];
    const proc = spawnSync(cmd, [...pre, ...args], { encoding: "utf8" });
    if (proc.error && (proc.error as NodeJS.ErrnoException).code === "ENOENT") {
      if (i + 1 < candidates.length) continue; // try the fallback spelling
      throw new CoreError(`cannot find the core CLI (${cmd})`);
    }
    if (proc.status !== 0) {
      const detail = (proc.stderr || proc.stdout || "").trim();
      throw new CoreError(
        `core exited with status ${proc.status}: ${detail.split("\n").pop()}`,
      );
    }
    return;
  }
}

export interface Scratch {
  dir: string;
  path(name: string): string;
  write(name: string, content: string): string;
  readJson<T>(name: string): T;
  readLines(name: string): string[];
  dispose(): void;
}

export function scratch(): Scratch {
  const dir = mkdtempSync(join(tmpdir(), "coreset-sc-"));
  return {
    dir,
    path: (name) => join(dir, name),
    write(name, content) {
      const p = join(dir, name);
      writeFileSync(p, content);
      return p;
    },
    readJson<T>(name: string): T {
      return JSON.parse(readFileSync(join(dir, name), "utf8")) as T;
    },
    readLines(name: string): string[] {
      return readFileSync(join(dir, name), "utf8")
        .split(/\r?\n/)
        .filter((l) => l.trim() !== "");
    },
    dispose() {
      rmSync(dir, { recursive: true, force: true });
    },
  };
}
