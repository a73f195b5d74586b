#!/usr/bin/env node
import * as fs from "fs";

import { FIGURE_KINDS, FigureKind, renderFigure } from "./figures";
import { SchemaError, parseResults } from "./schema";

function usage(): string {
  return "usage: nearkit-figs --in results.csv --kind speed|accuracy|violation --out fig.svg";
}

function parseArgs(argv: string[]): { inPath: string; kind: string; outPath: string } {
  const opts: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(usage());
    }
    opts[flag.slice(2)] = value;
  }
  for (const required of ["in", "kind", "out"]) {
    if (!(required in opts)) throw new Error(usage());
  }
  return { inPath: opts["in"], kind: opts["kind"], outPath: opts["out"] };
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (e) {
    console.error((e as Error).message);
    return 3;
  }
  if (!FIGURE_KINDS.includes(args.kind as FigureKind)) {
    console.error(
      `unsupported figure kind "${args.kind}" (choose from: ${FIGURE_KINDS.join(", ")})`
    );
    return 2;
  }
  let text: string;
  try {
    text = fs.readFileSync(args.inPath, "utf8");
  } catch (e) {
    console.error(`cannot read ${args.inPath}: ${(e as Error).message}`);
    return 3;
  }
  let svg: string;
  try {
    svg = renderFigure(parseResults(text), args.kind as FigureKind);
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`invalid results CSV: ${e.message}`);
      return 3;
    }
    console.error((e as Error).message);
    return 1;
  }
  try {
    fs.writeFileSync(args.outPath, svg, "utf8");
  } catch (e) {
    console.error(`cannot write ${args.outPath}: ${(e as Error).message}`);
    return 3;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
