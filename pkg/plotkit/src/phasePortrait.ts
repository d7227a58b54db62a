/**
 * Phase-portrait figure for the zero-mode mass ODE from the ode
 * subcommand's outputs: the zero-level orbit, the negative level
 * curves, the dh/dt = 0 line and the equilibrium marker at h*.
 */

import { readFile, writeFile } from "fs/promises";
import path from "path";
import { numeric, parseCsv, requireColumns } from "./csv.js";
import { PALETTE, SvgPlot } from "./svg.js";

export interface OdeSummary {
  h_star: number;
  h_stagnation: number;
  stable: boolean;
  sup_h: number;
  m1: number;
  c1: number;
}

export async function plotPhasePortrait(
  portraitCsv: string,
  summaryJson: string,
  outPath: string,
): Promise<void> {
  const table = parseCsv(await readFile(portraitCsv, "utf-8"));
  requireColumns(table, ["level", "h", "dhdt"], "ode portrait CSV");
  const summary = JSON.parse(await readFile(summaryJson, "utf-8")) as OdeSummary;

  const levels = new Map<number, { h: number[]; dhdt: number[] }>();
  const hs = numeric(table, "h");
  const ds = numeric(table, "dhdt");
  const ls = numeric(table, "level");
  for (let i = 0; i < hs.length; i++) {
    let bucket = levels.get(ls[i]);
    if (!bucket) {
      bucket = { h: [], dhdt: [] };
      levels.set(ls[i], bucket);
    }
    bucket.h.push(hs[i]);
    bucket.dhdt.push(ds[i]);
  }
  if (!levels.has(0)) {
    throw new Error("portrait CSV carries no zero-level orbit");
  }

  const allD = ds.concat([0]);
  const plot = new SvgPlot({
    width: 640,
    height: 480,
    margin: { top: 40, right: 20, bottom: 44, left: 64 },
    xMin: Math.min(...hs),
    xMax: Math.max(...hs),
    yMin: Math.min(...allD) * 1.05,
    yMax: Math.max(...allD) * 1.05 + 1e-12,
  });
  plot.axes("h", "dh/dt",
    `phase portrait (m1=${summary.m1}, h*=${summary.h_star.toPrecision(4)})`);
  plot.hline(0, "#444", "4,4"); // the dh/dt = 0 line

  const sorted = [...levels.keys()].sort((a, b) => b - a);
  sorted.forEach((lvl, i) => {
    const { h, dhdt } = levels.get(lvl)!;
    const color = lvl === 0 ? "#e6b400" : PALETTE[i % PALETTE.length];
    plot.polyline(h, dhdt, color, lvl === 0 ? 2.5 : 1.2);
    plot.text(lvl === 0 ? "level 0" : `level ${lvl.toPrecision(2)}`,
      plot.x(h[h.length - 1]) - 60, plot.y(dhdt[dhdt.length - 1]) - 4,
      color, 10);
  });

  // equilibrium: the largest positive root, marked on the zero line
  plot.marker(summary.h_star, 0, "#d62728", 7, "cross");
  plot.text("h*", plot.x(summary.h_star) + 8, plot.y(0) - 8, "#d62728");

  await writeFile(outPath, plot.render());
  console.log(`phase portrait -> ${outPath}`);
}

/** Resolve the two cmd_ode outputs from a directory or explicit paths. */
export function odeInputs(input: string): { csv: string; json: string } {
  if (input.endsWith(".csv")) {
    return {
      csv: input,
      json: path.join(path.dirname(input), "ode_summary.json"),
    };
  }
  return {
    csv: path.join(input, "ode_portrait.csv"),
    json: path.join(input, "ode_summary.json"),
  };
}
