import { mkdtemp, readFile, writeFile } from "fs/promises";
import { tmpdir } from "os";
import path from "path";
import { beforeAll, describe, expect, it } from "vitest";

import { parseCsv, requireColumns } from "../src/csv.js";
import { fitRate, plotDecay } from "../src/decay.js";
import { odeInputs, plotPhasePortrait } from "../src/phasePortrait.js";
import { MASS_THRESHOLD, logLogSlope, plotSweep } from "../src/sweep.js";

let dir: string;
beforeAll(async () => {
  dir = await mkdtemp(path.join(tmpdir(), "plotkit-"));
});

function syntheticPortrait(m1: number): { csv: string; json: string } {
  const hStar = (27 * m1 ** 4) / (32 * Math.PI * Math.PI);
  const rows = ["level,h,dhdt"];
  for (const level of [0, -0.01]) {
    for (let i = 0; i <= 50; i++) {
      const h = (i / 50) * 2.5 * hStar;
      // cubic with root at hStar, scaled arbitrarily
      const dhdt = h * h * (hStar - h) + 2 * level;
      rows.push(`${level},${h},${dhdt}`);
    }
  }
  const json = JSON.stringify({
    h_star: hStar,
    h_stagnation: (2 / 3) * hStar,
    stable: true,
    sup_h: hStar,
    m1,
    c1: Math.SQRT2,
  });
  return { csv: rows.join("\n") + "\n", json };
}

function crossX(svg: string): number {
  // the equilibrium marker is the only <path d="M..."> cross
  const m = svg.match(/<path d="M([\d.]+),[\d.]+ L([\d.]+),/);
  if (!m) throw new Error("no cross marker in SVG");
  return (Number(m[1]) + Number(m[2])) / 2;
}

describe("csv reader", () => {
  it("rejects empty files", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(/row 2/);
  });

  it("reports missing columns by name", () => {
    const t = parseCsv("a,b\n1,2\n");
    expect(() => requireColumns(t, ["a", "zz"], "test")).toThrow(/zz/);
  });
});

describe("phase portrait", () => {
  it("draws zero level, negative levels and the equilibrium marker", async () => {
    const { csv, json } = syntheticPortrait(1.0);
    const csvPath = path.join(dir, "ode_portrait.csv");
    await writeFile(csvPath, csv);
    await writeFile(path.join(dir, "ode_summary.json"), json);
    const out = path.join(dir, "phase.svg");
    const inputs = odeInputs(dir);
    await plotPhasePortrait(inputs.csv, inputs.json, out);
    const svg = await readFile(out, "utf-8");
    expect(svg).toContain("level 0");
    expect(svg).toContain("level -0.01");
    expect(svg).toContain("h*");
    expect(svg).toContain("stroke-dasharray"); // the dh/dt = 0 line
  });

  it("places markers at the quartic-homogeneous ratio for two m1", async () => {
    const xs: number[] = [];
    const hStars: number[] = [];
    for (const m1 of [1.0, 1.3]) {
      const sub = await mkdtemp(path.join(tmpdir(), `portrait-${m1}-`));
      const { csv, json } = syntheticPortrait(m1);
      await writeFile(path.join(sub, "ode_portrait.csv"), csv);
      await writeFile(path.join(sub, "ode_summary.json"), json);
      const out = path.join(sub, "phase.svg");
      await plotPhasePortrait(path.join(sub, "ode_portrait.csv"),
        path.join(sub, "ode_summary.json"), out);
      const svg = await readFile(out, "utf-8");
      xs.push(crossX(svg));
      hStars.push((27 * m1 ** 4) / (32 * Math.PI * Math.PI));
    }
    // both frames span [0, 2.5 h*], so the marker lands at the same
    // fractional position; the underlying h* values are quartic in m1
    expect(hStars[1] / hStars[0]).toBeCloseTo(1.3 ** 4, 10);
    expect(Math.abs(xs[0] - xs[1])).toBeLessThan(1.0);
  });

  it("fails loudly on an empty CSV", async () => {
    const p = path.join(dir, "empty.csv");
    await writeFile(p, "");
    await writeFile(path.join(dir, "ode_summary.json"),
      syntheticPortrait(1).json);
    await expect(plotPhasePortrait(p, path.join(dir, "ode_summary.json"),
      path.join(dir, "x.svg"))).rejects.toThrow(/empty/);
  });
});

describe("decay", () => {
  function runCsv(rate: number, n = 60): string {
    const header = "t,mass,n_linf,n00_l2,n0neq_l2,dz_n0neq_l2,dzz_n0neq_l2,"
      + "nneq_l2,dxx_nneq_l2,dzz_nneq_l2,dxdz_nneq_l2,u10_h2,u20_h2,u30_h2,"
      + "w2neq_l2,lap_u2neq_l2,dxx_u2neq_l2,dxx_u3neq_l2,div_res,tail_frac,"
      + "E1,E2,E3,E4,E5,status";
    const rows = [header];
    for (let i = 0; i < n; i++) {
      const t = (i * 20) / (n - 1);
      const v = Math.exp(-rate * t);
      rows.push(`${t},1.0,0.1,0.1,0,0,0,${v},0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,running`);
    }
    return rows.join("\n") + "\n";
  }

  it("recovers the generator rate from an exact exponential", () => {
    const t = Array.from({ length: 60 }, (_, i) => (i * 20) / 59);
    const v = t.map((tt) => Math.exp(-0.04 * tt));
    const fit = fitRate(t, v, 1.0)!;
    expect(fit.rate).toBeCloseTo(0.04, 8);
    expect(fit.r2).toBeGreaterThan(0.999999);
  });

  it("plots a single decreasing curve with a rate legend", async () => {
    const p = path.join(dir, "run.csv");
    await writeFile(p, runCsv(0.02));
    const out = path.join(dir, "decay.svg");
    await plotDecay([p], out);
    const svg = await readFile(out, "utf-8");
    expect(svg).toContain("rate 0.0200");
    expect(svg).toContain("polyline");
  });

  it("is deterministic on identical inputs", async () => {
    const p = path.join(dir, "run2.csv");
    await writeFile(p, runCsv(0.05));
    const o1 = path.join(dir, "d1.svg");
    const o2 = path.join(dir, "d2.svg");
    await plotDecay([p], o1);
    await plotDecay([p], o2);
    expect(await readFile(o1, "utf-8")).toEqual(await readFile(o2, "utf-8"));
  });

  it("rejects an empty input list", async () => {
    await expect(plotDecay([], path.join(dir, "x.svg")))
      .rejects.toThrow(/at least one/);
  });
});

describe("sweep", () => {
  const header = "param,value,status,rate,r2,nneq_last,n_linf_last,"
    + "mass_drift,mass_class";

  it("marks the critical mass threshold on mass sweeps", async () => {
    const rows = [header];
    for (const m of [10, 30, 47, 60]) {
      rows.push(`init.mass,${m},finished,,,0.001,${0.01 * m},0.0,`
        + (m < MASS_THRESHOLD ? "below" : "above"));
    }
    const p = path.join(dir, "mass_sweep.csv");
    await writeFile(p, rows.join("\n") + "\n");
    const out = path.join(dir, "mass.svg");
    await plotSweep(p, out);
    const svg = await readFile(out, "utf-8");
    expect(svg).toContain("24 pi^2/5 = 47.37");
  });

  it("handles a one-row sweep as a point plot", async () => {
    const p = path.join(dir, "one.csv");
    await writeFile(p, header + "\ninit.mass,10,finished,,,0.1,0.2,0,below\n");
    const out = path.join(dir, "one.svg");
    await plotSweep(p, out);
    expect(await readFile(out, "utf-8")).toContain("circle");
  });

  it("annotates the log-log slope near -1/3 for amplitude sweeps", async () => {
    const rows = [header];
    for (const a of [125, 1000, 8000]) {
      const rate = 0.5 * a ** (-1 / 3);
      rows.push(`phys.a,${a},finished,${rate},0.99,0.001,0.01,0,below`);
    }
    const p = path.join(dir, "a_sweep.csv");
    await writeFile(p, rows.join("\n") + "\n");
    const out = path.join(dir, "rate.svg");
    await plotSweep(p, out);
    const svg = await readFile(out, "utf-8");
    expect(svg).toContain("slope -0.333");
    expect(logLogSlope([1, 10], [1, 0.1])).toBeCloseTo(-1, 12);
  });
});
