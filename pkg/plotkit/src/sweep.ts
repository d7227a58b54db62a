/**
 * Sweep-summary figures: mass sweeps get the critical threshold line at
 * 24 pi^2 / 5; amplitude sweeps get a log-log rate plot with the fitted
 * slope annotated against the -1/3 reference.
 */

import { readFile, writeFile } from "fs/promises";
import { numeric, parseCsv, requireColumns } from "./csv.js";
import { SvgPlot } from "./svg.js";

export const MASS_THRESHOLD = (24 * Math.PI * Math.PI) / 5;

export function logLogSlope(x: number[], y: number[]): number {
  const lx = x.map(Math.log);
  const ly = y.map(Math.log);
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) ** 2;
  }
  return sxy / sxx;
}

export async function plotSweep(csvPath: string, outPath: string):
  Promise<void> {
  const table = parseCsv(await readFile(csvPath, "utf-8"));
  requireColumns(table, ["param", "value", "status"], "sweep CSV");
  const param = table.rows[0]?.param ?? "";
  const values = numeric(table, "value");

  if (param === "phys.a" && table.columns.includes("rate")) {
    const pairs = table.rows
      .map((r, i) => ({ a: values[i], rate: Number(r.rate) }))
      .filter((p) => Number.isFinite(p.rate) && p.rate > 0);
    if (pairs.length === 0) {
      throw new Error("amplitude sweep carries no positive fitted rates");
    }
    const xs = pairs.map((p) => p.a);
    const ys = pairs.map((p) => p.rate);
    const plot = new SvgPlot({
      width: 560,
      height: 440,
      margin: { top: 40, right: 24, bottom: 44, left: 70 },
      xMin: Math.min(...xs) * 0.8,
      xMax: Math.max(...xs) * 1.25,
      yMin: Math.min(...ys) * 0.8,
      yMax: Math.max(...ys) * 1.25,
      xLog: true,
      yLog: true,
    });
    plot.axes("A", "fitted rate", "decay rate vs amplitude");
    plot.polyline(xs, ys, "#1f77b4", 1.8);
    xs.forEach((x, i) => plot.marker(x, ys[i], "#1f77b4", 4, "dot"));
    const slope = pairs.length >= 2 ? logLogSlope(xs, ys) : NaN;
    // -1/3 reference through the first point
    const ref = xs.map((x) => ys[0] * (x / xs[0]) ** (-1 / 3));
    plot.polyline(xs, ref, "#888", 1.2, "6,4");
    plot.text(`slope ${slope.toFixed(3)} (ref -1/3 dashed)`,
      plot.frame.width - 240, 58, "#111", 12);
    await writeFile(outPath, plot.render());
    console.log(`rate-vs-A sweep -> ${outPath}`);
    return;
  }

  // generic value sweep; mass sweeps get the threshold marker
  const metricCol = table.columns.includes("n_linf_last")
    ? "n_linf_last" : "nneq_last";
  const metric = table.rows.map((r) => Number(r[metricCol]));
  const ok = metric.map((m) => Number.isFinite(m));
  const xs = values.filter((_, i) => ok[i]);
  const ys = metric.filter((_, i) => ok[i]);
  if (xs.length === 0) {
    throw new Error(`sweep CSV has no numeric ${metricCol} values`);
  }
  const xAll = param === "init.mass"
    ? xs.concat([MASS_THRESHOLD]) : xs;
  const plot = new SvgPlot({
    width: 560,
    height: 440,
    margin: { top: 40, right: 24, bottom: 44, left: 70 },
    xMin: Math.min(...xAll) * 0.95 - 1e-9,
    xMax: Math.max(...xAll) * 1.05 + 1e-9,
    yMin: Math.min(...ys) * 0.9 - 1e-12,
    yMax: Math.max(...ys) * 1.1 + 1e-12,
  });
  plot.axes(param, metricCol, `sweep over ${param}`);
  if (xs.length > 1) {
    plot.polyline(xs, ys, "#2ca02c", 1.5);
  }
  xs.forEach((x, i) => plot.marker(x, ys[i], "#2ca02c", 4, "dot"));
  if (param === "init.mass") {
    plot.vline(MASS_THRESHOLD, "#d62728", "5,4",
      `24 pi^2/5 = ${MASS_THRESHOLD.toFixed(2)}`);
  }
  await writeFile(outPath, plot.render());
  console.log(`sweep figure -> ${outPath}`);
}
