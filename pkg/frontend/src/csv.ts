/** Reader for the harness CSV contract.
 *
 * Files start with a `# config=<hex> seed=<int>` comment, then a fixed
 * eight-column header. Anything that deviates raises CsvError with a
 * message naming the problem.
 */
import { readFileSync } from "node:fs";

import Papa from "papaparse";

export class CsvError extends Error {}

export const REQUIRED_COLUMNS = [
  "experiment",
  "sweep_name",
  "sweep_value",
  "seed",
  "metric",
  "value",
  "trials",
  "ci",
] as const;

export interface DataRow {
  experiment: string;
  sweepName: string;
  sweepValue: number;
  metric: string;
  value: number;
}

export interface Table {
  configHash: string | null;
  seed: string | null;
  rows: DataRow[];
}

export function parseCsv(text: string, source: string): Table {
  let configHash: string | null = null;
  let seed: string | null = null;
  let body = text;
  if (text.startsWith("#")) {
    const nl = text.indexOf("\n");
    const comment = nl === -1 ? text : text.slice(0, nl);
    body = nl === -1 ? "" : text.slice(nl + 1);
    configHash = /config=([0-9a-f]+)/.exec(comment)?.[1] ?? null;
    seed = /seed=(-?\d+)/.exec(comment)?.[1] ?? null;
  }
  const parsed = Papa.parse<Record<string, string>>(body.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED_COLUMNS) {
    if (!fields.includes(col)) {
      throw new CsvError(`${source}: missing column: ${col}`);
    }
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  const rows = parsed.data.map((r, i) => {
    const sweepValue = Number(r["sweep_value"]);
    const value = Number(r["value"]);
    if (!Number.isFinite(sweepValue) || !Number.isFinite(value)) {
      throw new CsvError(`${source}: non-numeric row ${i + 1}`);
    }
    return {
      experiment: r["experiment"] ?? "",
      sweepName: r["sweep_name"] ?? "",
      sweepValue,
      metric: r["metric"] ?? "",
      value,
    };
  });
  return { configHash, seed, rows };
}

export function loadCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (e) {
    throw new CsvError(`cannot read ${path}: ${(e as Error).message}`);
  }
  return parseCsv(text, path);
}
