import { createHash } from "crypto";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli";
import { FIGURE_KINDS, renderFigure } from "../src/figures";
import { SchemaError, parseResults, median } from "../src/schema";
import {
  BENCH_CSV,
  BLANK_ERROR_CSV,
  HEADER_ONLY_CSV,
  MISSING_COLUMNS_CSV,
  NON_NUMERIC_CSV,
  TINY_ERROR_CSV,
  ZERO_VIOLATION_CSV,
} from "./fixtures";

function sha256(s: string): string {
  return createHash("sha256").update(s).digest("hex");
}

describe("parseResults", () => {
  it("reads well-formed rows with types applied", () => {
    const rows = parseResults(BENCH_CSV);
    expect(rows).toHaveLength(6);
    expect(rows[0].n).toBe(8);
    expect(rows[0].p).toBe("1");
    expect(rows[0].forward_error).toBeCloseTo(3.1e-10, 15);
    expect(rows[4].p).toBe("inf");
  });

  it("treats a blank forward_error as null", () => {
    const rows = parseResults(BLANK_ERROR_CSV);
    expect(rows[0].forward_error).toBeNull();
  });

  it("rejects a file with missing columns and names them", () => {
    expect(() => parseResults(MISSING_COLUMNS_CSV)).toThrow(SchemaError);
    expect(() => parseResults(MISSING_COLUMNS_CSV)).toThrow(
      /constraint, forward_error, feasibility_violation/
    );
  });

  it("rejects an empty file and a header-only file", () => {
    expect(() => parseResults("")).toThrow(SchemaError);
    expect(() => parseResults(HEADER_ONLY_CSV)).toThrow(/no data rows/);
  });

  it("rejects non-numeric values in numeric columns with a row number", () => {
    expect(() => parseResults(NON_NUMERIC_CSV)).toThrow(/row 2.*"n"/);
  });
});

describe("median", () => {
  it("handles odd and even lengths", () => {
    expect(median([3, 1, 2])).toBe(2);
    expect(median([4, 1, 3, 2])).toBe(2.5);
  });
});

describe("renderFigure", () => {
  it("is byte-for-byte deterministic across repeated runs", () => {
    const rows = parseResults(BENCH_CSV);
    for (const kind of FIGURE_KINDS) {
      const a = renderFigure(parseResults(BENCH_CSV), kind);
      const b = renderFigure(rows, kind);
      expect(sha256(a)).toBe(sha256(b));
    }
  });

  it("produces a standalone SVG document with a legend per series", () => {
    const svg = renderFigure(parseResults(BENCH_CSV), "speed");
    expect(svg.startsWith("<svg xmlns=")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    expect(svg).toContain("recover p=1");
    expect(svg).toContain("recover p=inf");
  });

  it("speed plots one median point per (series, n)", () => {
    const svg = renderFigure(parseResults(BENCH_CSV), "speed");
    const markers = svg.match(/<circle /g) ?? [];
    expect(markers).toHaveLength(4); // 2 series x 2 sizes, repeats collapse into medians
  });

  it("accuracy y-axis reaches down to 1e-15 data", () => {
    const svg = renderFigure(parseResults(TINY_ERROR_CSV), "accuracy");
    expect(svg).toContain(">1e-15<");
  });

  it("accuracy refuses a file where every forward_error is blank", () => {
    expect(() =>
      renderFigure(parseResults(BLANK_ERROR_CSV), "accuracy")
    ).toThrow(/forward_error/);
  });

  it("violation renders an all-zero file as zero-height bars", () => {
    const svg = renderFigure(parseResults(ZERO_VIOLATION_CSV), "violation");
    const bars = svg.match(/<rect [^>]*height="0\.00"/g) ?? [];
    expect(bars).toHaveLength(2);
  });

  it("violation bars grow with the worst violation per size", () => {
    const csv = ZERO_VIOLATION_CSV.replace(",0.0,40.0,", ",2.5e-09,40.0,");
    const svg = renderFigure(parseResults(csv), "violation");
    expect(svg).toContain("2.8e-9"); // padded axis top = 1.1 * peak
  });
});

describe("cli", () => {
  function tmpCsv(content: string): string {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "figs-"));
    const file = path.join(dir, "results.csv");
    fs.writeFileSync(file, content, "utf8");
    return file;
  }

  it("writes the figure and exits 0 on good input", () => {
    const input = tmpCsv(BENCH_CSV);
    const out = path.join(path.dirname(input), "fig.svg");
    expect(main(["--in", input, "--kind", "speed", "--out", out])).toBe(0);
    expect(fs.readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("exits 2 on an unsupported kind", () => {
    const input = tmpCsv(BENCH_CSV);
    const out = path.join(path.dirname(input), "fig.svg");
    expect(main(["--in", input, "--kind", "heatmap", "--out", out])).toBe(2);
  });

  it("exits 3 on a missing input file or invalid schema", () => {
    const out = path.join(os.tmpdir(), "unused.svg");
    expect(main(["--in", "/nonexistent.csv", "--kind", "speed", "--out", out])).toBe(3);
    const bad = tmpCsv(MISSING_COLUMNS_CSV);
    expect(main(["--in", bad, "--kind", "speed", "--out", out])).toBe(3);
    expect(main(["--in", bad, "--kind", "speed"])).toBe(3); // missing --out
  });
});
