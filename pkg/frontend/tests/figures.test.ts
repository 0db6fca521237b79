import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import { describe, expect, it } from "vitest";

import { FIGURE_IDS, MissingColumnError, renderFigure } from "../src/figures.js";
import { minMaxNormalize } from "../src/scale.js";
import { cellValue, parseCsv } from "../src/csv.js";

const runDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "rundir");

describe("figure rendering", () => {
  it("renders all six figure ids without error", () => {
    for (const id of FIGURE_IDS) {
      const svg = renderFigure({ id, runDir });
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
    }
  });

  it("is byte-stable across repeated renders", () => {
    for (const id of FIGURE_IDS) {
      expect(renderFigure({ id, runDir })).toBe(renderFigure({ id, runDir }));
    }
  });

  it("draws both method curves in fig1a", () => {
    const svg = renderFigure({ id: "fig1a", runDir });
    expect(svg).toContain("#1f77b4");
    expect(svg).toContain("#ff7f0e");
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it("marks NR medians with the hatch pattern in fig1b", () => {
    const svg = renderFigure({ id: "fig1b", runDir });
    expect(svg).toContain("url(#nr-hatch)");
  });

  it("hatches NR cells in the heat grid", () => {
    const svg = renderFigure({ id: "fig2b", runDir });
    expect(svg).toContain("url(#nr-hatch)");
  });

  it("normalizes grid extrema to 0 and 1", () => {
    const svg = renderFigure({ id: "fig2a", runDir });
    // the fixture's extreme cells must be labeled exactly 0.00 and 1.00
    expect(svg).toContain(">0.00</text>");
    expect(svg).toContain(">1.00</text>");
  });

  it("names the missing column in errors", () => {
    expect(() => renderFigure({ id: "fig2a", runDir: join(runDir, "..") }))
      .toThrowError();
    try {
      renderFigure({ id: "fig3a", runDir: join(runDir, "..", "..") });
    } catch (err) {
      expect(String(err)).toMatch(/ENOENT|missing/);
    }
  });
});

describe("normalization", () => {
  it("maps extrema to 0 and 1", () => {
    expect(minMaxNormalize([1, 3, 2])).toEqual([0, 1, 0.5]);
  });

  it("degenerate grids collapse to the 0.5 midpoint", () => {
    expect(minMaxNormalize([4, 4, 4])).toEqual([0.5, 0.5, 0.5]);
  });

  it("keeps NR entries as null", () => {
    expect(minMaxNormalize([1, null, 2])).toEqual([0, null, 1]);
  });

  it("all-NR stays all-null", () => {
    expect(minMaxNormalize([null, null])).toEqual([null, null]);
  });
});

describe("csv cells", () => {
  it("parses NR and infinities", () => {
    expect(cellValue("NR")).toBeNull();
    expect(cellValue("inf")).toBe(Infinity);
    expect(cellValue("-inf")).toBe(-Infinity);
    expect(cellValue("0.5")).toBe(0.5);
  });

  it("raises MissingColumnError with the column name", () => {
    const table = parseCsv("a,b\n1,2\n", "x.csv");
    expect(table.header).toEqual(["a", "b"]);
    const err = new MissingColumnError("s_ii", "x.csv");
    expect(err.message).toContain("s_ii");
    expect(err.message).toContain("x.csv");
  });
});
