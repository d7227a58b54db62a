/**
 * Minimal hand-rolled SVG plotting: axes, polylines, markers, text.
 * Deterministic output (fixed style, no timestamps) so re-running on
 * identical inputs produces identical figures.
 */

export interface Frame {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
  xLog?: boolean;
  yLog?: boolean;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf"];

function trans(v: number, lo: number, hi: number, log: boolean | undefined,
  pLo: number, pHi: number): number {
  let f: number;
  if (log) {
    f = (Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo));
  } else {
    f = (v - lo) / (hi - lo);
  }
  return pLo + f * (pHi - pLo);
}

export class SvgPlot {
  private parts: string[] = [];
  constructor(readonly frame: Frame) {}

  x(v: number): number {
    const { margin, width, xMin, xMax, xLog } = this.frame;
    return trans(v, xMin, xMax, xLog, margin.left, width - margin.right);
  }

  y(v: number): number {
    const { margin, height, yMin, yMax, yLog } = this.frame;
    return trans(v, yMin, yMax, yLog, height - margin.bottom, margin.top);
  }

  polyline(xs: number[], ys: number[], color: string, width = 1.5,
    dash = ""): void {
    const pts = xs
      .map((xv, i) => `${this.x(xv).toFixed(2)},${this.y(ys[i]).toFixed(2)}`)
      .join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="${width}"${dashAttr} points="${pts}"/>`,
    );
  }

  marker(xv: number, yv: number, color: string, size = 6,
    shape: "cross" | "dot" = "cross"): void {
    const cx = this.x(xv);
    const cy = this.y(yv);
    if (shape === "dot") {
      this.parts.push(
        `<circle cx="${cx.toFixed(2)}" cy="${cy.toFixed(2)}" r="${size / 2}" fill="${color}"/>`,
      );
      return;
    }
    this.parts.push(
      `<path d="M${(cx - size).toFixed(2)},${(cy - size).toFixed(2)} L${(cx + size).toFixed(2)},${(cy + size).toFixed(2)} M${(cx - size).toFixed(2)},${(cy + size).toFixed(2)} L${(cx + size).toFixed(2)},${(cy - size).toFixed(2)}" stroke="${color}" stroke-width="2"/>`,
    );
  }

  vline(xv: number, color: string, dash = "5,4", label = ""): void {
    const px = this.x(xv);
    const { margin, height } = this.frame;
    this.parts.push(
      `<line x1="${px.toFixed(2)}" y1="${margin.top}" x2="${px.toFixed(2)}" y2="${height - margin.bottom}" stroke="${color}" stroke-dasharray="${dash}"/>`,
    );
    if (label) {
      this.text(label, px + 4, margin.top + 12, color);
    }
  }

  hline(yv: number, color: string, dash = "5,4"): void {
    const py = this.y(yv);
    const { margin, width } = this.frame;
    this.parts.push(
      `<line x1="${margin.left}" y1="${py.toFixed(2)}" x2="${width - margin.right}" y2="${py.toFixed(2)}" stroke="${color}" stroke-dasharray="${dash}"/>`,
    );
  }

  text(s: string, px: number, py: number, color = "#333", size = 12,
    anchor = "start"): void {
    this.parts.push(
      `<text x="${px.toFixed(2)}" y="${py.toFixed(2)}" fill="${color}" font-size="${size}" text-anchor="${anchor}" font-family="sans-serif">${escapeXml(s)}</text>`,
    );
  }

  axes(xLabel: string, yLabel: string, title = ""): void {
    const { margin, width, height } = this.frame;
    const x0 = margin.left;
    const x1 = width - margin.right;
    const y0 = height - margin.bottom;
    const y1 = margin.top;
    this.parts.push(
      `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#999"/>`,
    );
    for (const [v, px] of this.ticks("x")) {
      this.parts.push(
        `<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 4}" stroke="#666"/>`,
      );
      this.text(fmtTick(v), px, y0 + 16, "#444", 10, "middle");
    }
    for (const [v, py] of this.ticks("y")) {
      this.parts.push(
        `<line x1="${x0 - 4}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="#666"/>`,
      );
      this.text(fmtTick(v), x0 - 6, py + 3, "#444", 10, "end");
    }
    this.text(xLabel, (x0 + x1) / 2, height - 8, "#222", 12, "middle");
    this.parts.push(
      `<text x="14" y="${(y0 + y1) / 2}" fill="#222" font-size="12" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 14 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
    if (title) {
      this.text(title, (x0 + x1) / 2, y1 - 8, "#111", 14, "middle");
    }
  }

  private ticks(axis: "x" | "y"): Array<[number, number]> {
    const { xMin, xMax, yMin, yMax, xLog, yLog } = this.frame;
    const lo = axis === "x" ? xMin : yMin;
    const hi = axis === "x" ? xMax : yMax;
    const log = axis === "x" ? xLog : yLog;
    const vals: number[] = [];
    if (log) {
      const e0 = Math.ceil(Math.log10(lo));
      const e1 = Math.floor(Math.log10(hi));
      for (let e = e0; e <= e1; e++) vals.push(10 ** e);
      if (vals.length < 2) vals.push(lo, hi);
    } else {
      const span = hi - lo;
      const step = niceStep(span / 5);
      for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) {
        vals.push(v);
      }
    }
    return vals.map((v) => [v, axis === "x" ? this.x(v) : this.y(v)]);
  }

  render(): string {
    const { width, height } = this.frame;
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n<rect width="${width}" height="${height}" fill="white"/>\n${this.parts.join("\n")}\n</svg>\n`;
  }
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw));
  const r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2 * mag;
  if (r < 7.5) return 5 * mag;
  return 10 * mag;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0);
  return String(Number(v.toPrecision(4)));
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
