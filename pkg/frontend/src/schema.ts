import Papa from "papaparse";

/** Column order of the results CSV produced by the solver CLI. */
export const RESULTS_COLUMNS = [
  "experiment",
  "n",
  "p",
  "constraint",
  "iters",
  "objective",
  "forward_error",
  "feasibility_violation",
  "wall_ms",
  "seed",
] as const;

export interface ResultRow {
  experiment: string;
  n: number;
  /** Raw p label from the file ("1", "1.5", "2", "inf", ...). */
  p: string;
  constraint: string;
  iters: number;
  objective: number;
  /** Blank in the file when no ground truth exists for the run. */
  forward_error: number | null;
  feasibility_violation: number;
  wall_ms: number;
  seed: number;
}

export class SchemaError extends Error {}

function toNumber(raw: string, column: string, line: number): number {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) {
    throw new SchemaError(
      `row ${line}: column "${column}" has non-numeric value "${raw}"`
    );
  }
  return v;
}

/** Parse and validate a results CSV.  Throws SchemaError on a missing or
 *  malformed header, an empty file, or a non-numeric value in a numeric
 *  column.  The forward_error column may be blank on individual rows. */
export function parseResults(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  const missing = RESULTS_COLUMNS.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `results CSV is missing required columns: ${missing.join(", ")}`
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("results CSV has a header but no data rows");
  }
  return parsed.data.map((rec, i) => {
    const line = i + 2; // header is line 1
    const fwd = (rec.forward_error ?? "").trim();
    return {
      experiment: rec.experiment,
      n: toNumber(rec.n, "n", line),
      p: rec.p.trim(),
      constraint: rec.constraint,
      iters: toNumber(rec.iters, "iters", line),
      objective: toNumber(rec.objective, "objective", line),
      forward_error: fwd === "" ? null : toNumber(fwd, "forward_error", line),
      feasibility_violation: toNumber(
        rec.feasibility_violation,
        "feasibility_violation",
        line
      ),
      wall_ms: toNumber(rec.wall_ms, "wall_ms", line),
      seed: toNumber(rec.seed, "seed", line),
    };
  });
}

/** Stable "experiment, p" series key used by all three figures. */
export function seriesKey(row: ResultRow): string {
  return `${row.experiment} p=${row.p}`;
}

export function median(values: number[]): number {
  const v = [...values].sort((a, b) => a - b);
  const m = v.length >> 1;
  return v.length % 2 === 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}
