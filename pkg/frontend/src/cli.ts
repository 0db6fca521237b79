/** Usage: node dist/cli.js <figure-id|all> <run-dir> <out.svg|out-dir> */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { FIGURE_IDS, FigureId, renderFigure } from "./figures.js";

function writeSvg(path: string, svg: string): void {
  mkdirSync(dirname(path), { recursive: true });
  writeFileSync(path, svg, "utf-8");
  console.log(`wrote ${path}`);
}

export function main(argv: string[]): number {
  const [id, runDir, out] = argv;
  if (!id || !runDir || !out) {
    console.error("usage: cli.js <figure-id|all> <run-dir> <out.svg|out-dir>");
    console.error(`figure ids: ${FIGURE_IDS.join(", ")}`);
    return 2;
  }
  try {
    if (id === "all") {
      for (const fid of FIGURE_IDS) {
        writeSvg(join(out, `${fid}.svg`), renderFigure({ id: fid, runDir }));
      }
    } else if ((FIGURE_IDS as readonly string[]).includes(id)) {
      writeSvg(out, renderFigure({ id: id as FigureId, runDir }));
    } else {
      console.error(`unknown figure id '${id}'; expected one of ${FIGURE_IDS.join(", ")}`);
      return 2;
    }
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
