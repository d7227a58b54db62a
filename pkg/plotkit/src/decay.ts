/**
 * Log-linear decay figure: the nonzero-mode L2 norm of each run CSV,
 * a least-squares fitted rate per curve, and a reference slope at the
 * cube-root-of-amplitude rate scale read from the run's summary.
 */

import { readFile, writeFile } from "fs/promises";
import path from "path";
import { numeric, parseCsv, requireColumns } from "./csv.js";
import { PALETTE, SvgPlot } from "./svg.js";

interface Curve {
  label: string;
  t: number[];
  v: number[];
  rate: number | null;
  aFlow: number | null;
  aWeight: number;
}

export function fitRate(t: number[], v: number[], tMin: number):
  { rate: number; r2: number } | null {
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < t.length; i++) {
    if (t[i] >= tMin && v[i] > 0) {
      xs.push(t[i]);
      ys.push(Math.log(v[i]));
    }
  }
  if (xs.length < 10) return null;
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) ** 2;
    syy += (ys[i] - my) ** 2;
  }
  const slope = sxy / sxx;
  const r2 = syy === 0 ? 1 : (sxy * sxy) / (sxx * syy);
  return { rate: -slope, r2 };
}

async function loadCurve(csvPath: string): Promise<Curve> {
  const table = parseCsv(await readFile(csvPath, "utf-8"));
  requireColumns(table, ["t", "nneq_l2"], `run CSV ${csvPath}`);
  const t = numeric(table, "t");
  const v = numeric(table, "nneq_l2");
  const dropped = v.filter((x) => x <= 0).length;
  if (dropped > 0) {
    console.warn(`${csvPath}: excluded ${dropped} non-positive values`);
  }
  let aFlow: number | null = null;
  let aWeight = 0.1;
  let label = path.basename(path.dirname(csvPath)) || path.basename(csvPath);
  try {
    const summary = JSON.parse(await readFile(
      path.join(path.dirname(csvPath), "summary.json"), "utf-8"));
    aFlow = Number(summary.manifest?.config?.["phys.a"]) || null;
    aWeight = Number(summary.manifest?.config?.["phys.a_weight"]) || 0.1;
    if (aFlow !== null) label = `A=${aFlow}`;
  } catch {
    // no summary next to the CSV; keep the path-derived label
  }
  const keep = v.map((x, i) => [t[i], x] as const).filter(([, x]) => x > 0);
  const fit = fitRate(t, v, 1.0);
  return {
    label,
    t: keep.map(([a]) => a),
    v: keep.map(([, b]) => b),
    rate: fit ? fit.rate : null,
    aFlow,
    aWeight,
  };
}

export async function plotDecay(csvPaths: string[], outPath: string):
  Promise<void> {
  if (csvPaths.length === 0) {
    throw new Error("plot_decay needs at least one run CSV");
  }
  const curves = await Promise.all(csvPaths.map(loadCurve));
  const allT = curves.flatMap((c) => c.t);
  const allV = curves.flatMap((c) => c.v);
  if (allV.length === 0) {
    throw new Error("no positive nonzero-mode values to plot");
  }
  const plot = new SvgPlot({
    width: 640,
    height: 480,
    margin: { top: 40, right: 20, bottom: 44, left: 70 },
    xMin: Math.min(...allT),
    xMax: Math.max(...allT) + 1e-9,
    yMin: Math.min(...allV) * 0.8,
    yMax: Math.max(...allV) * 1.25,
    yLog: true,
  });
  plot.axes("t", "|n_neq|_2", "nonzero-mode decay");

  curves.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    plot.polyline(c.t, c.v, color, 1.8);
    const legend = c.rate !== null
      ? `${c.label}: rate ${c.rate.toPrecision(3)}`
      : c.label;
    plot.text(legend, plot.frame.width - 230, 58 + 16 * i, color, 11);
    // reference slope exp(-a A^(-1/3) t), anchored at the curve start
    if (c.aFlow !== null && c.t.length > 1) {
      const lam = c.aWeight * c.aFlow ** (-1 / 3);
      const t0 = c.t[0];
      const v0 = c.v[0];
      const tr = c.t;
      const vr = tr.map((tt) => v0 * Math.exp(-lam * (tt - t0)));
      plot.polyline(tr, vr, color, 1.0, "6,4");
    }
  });
  plot.text("dashed: exp(-a A^(-1/3) t) reference",
    plot.frame.width - 230, 58 + 16 * curves.length, "#555", 10);

  await writeFile(outPath, plot.render());
  console.log(`decay figure (${curves.length} curves) -> ${outPath}`);
}
