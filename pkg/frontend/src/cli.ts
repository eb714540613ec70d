#!/usr/bin/env node
/** plot <figure> --in <csv> --out <svg>
 *
 * Exit codes: 0 written, 1 usage error, 2 bad input data.
 */
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { CsvError, loadCsv } from "./csv.js";
import { FIGURES, FIGURE_IDS } from "./figures.js";
import { renderFigure } from "./svg.js";

interface Args {
  figure: string;
  in: string;
  out: string;
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = yargs(argv)
      .scriptName("plot")
      .command(["$0 <figure>", "plot <figure>"], "render an SVG plot from a harness CSV", (y) =>
        y
          .positional("figure", {
            type: "string",
            choices: FIGURE_IDS,
            describe: "which figure to draw",
          })
          .option("in", {
            type: "string",
            demandOption: true,
            describe: "input CSV from the simulation harness",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output SVG path",
          }),
      )
      .strict()
      .exitProcess(false)
      .fail(false)
      .parseSync() as unknown as Args;
  } catch (e) {
    console.error((e as Error).message);
    console.error(`usage: plot <${FIGURE_IDS.join("|")}> --in <csv> --out <svg>`);
    return 1;
  }
  try {
    const table = loadCsv(args.in);
    const svg = renderFigure(FIGURES[args.figure]!, table);
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (e) {
    if (e instanceof CsvError) {
      console.error(e.message);
      return 2;
    }
    throw e;
  }
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(entry).href) {
  process.exit(run(hideBin(process.argv)));
}
