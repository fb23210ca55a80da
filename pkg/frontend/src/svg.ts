// Dependency-free SVG line figure. Inputs are already mapped to [0, 1]
// fractions of the plot area; everything emitted is a pure function of the
// arguments, so repeated renders are byte-identical.

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

export interface Tick {
  frac: number;
  label: string;
}

export interface Series {
  label: string;
  color: string;
  // x/y fractions in [0, 1], y measured upward from the bottom axis
  xs: number[];
  ys: number[];
}

const W = 720;
const H = 480;
const ML = 80;
const MR = 24;
const MT = 24;
const MB = 56;

function px(fx: number): string {
  return (ML + fx * (W - ML - MR)).toFixed(2);
}

function py(fy: number): string {
  return (H - MB - fy * (H - MT - MB)).toFixed(2);
}

export function renderFigure(opts: {
  xLabel: string;
  yLabel: string;
  xTicks: Tick[];
  yTicks: Tick[];
  series: Series[];
}): string {
  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`
  );
  out.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  const x0 = px(0);
  const x1 = px(1);
  const y0 = py(0);
  const y1 = py(1);
  out.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`
  );
  for (const t of opts.xTicks) {
    const x = px(t.frac);
    out.push(
      `<line x1="${x}" y1="${y0}" x2="${x}" y2="${(Number(y0) + 6).toFixed(2)}" stroke="black"/>`,
      `<text x="${x}" y="${(Number(y0) + 22).toFixed(2)}" font-size="12" text-anchor="middle">${t.label}</text>`
    );
  }
  for (const t of opts.yTicks) {
    const y = py(t.frac);
    out.push(
      `<line x1="${(Number(x0) - 6).toFixed(2)}" y1="${y}" x2="${x0}" y2="${y}" stroke="black"/>`,
      `<text x="${(Number(x0) - 10).toFixed(2)}" y="${(Number(y) + 4).toFixed(2)}" font-size="12" text-anchor="end">${t.label}</text>`
    );
  }
  out.push(
    `<text x="${px(0.5)}" y="${H - 12}" font-size="13" text-anchor="middle">${opts.xLabel}</text>`,
    `<text x="18" y="${py(0.5)}" font-size="13" text-anchor="middle" transform="rotate(-90 18 ${py(0.5)})">${opts.yLabel}</text>`
  );
  for (const s of opts.series) {
    const pts = s.xs.map((fx, i) => `${px(fx)},${py(s.ys[i])}`).join(" ");
    out.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.5"/>`
    );
    for (let i = 0; i < s.xs.length; i++) {
      out.push(
        `<circle cx="${px(s.xs[i])}" cy="${py(s.ys[i])}" r="3" fill="${s.color}"/>`
      );
    }
  }
  opts.series.forEach((s, i) => {
    const y = MT + 8 + 18 * i;
    out.push(
      `<line x1="${W - MR - 200}" y1="${y}" x2="${W - MR - 176}" y2="${y}" stroke="${s.color}" stroke-width="1.5"/>`,
      `<text x="${W - MR - 170}" y="${y + 4}" font-size="12">${s.label}</text>`
    );
  });
  out.push("</svg>");
  return out.join("\n") + "\n";
}

// Integer tick positions for a log-scale axis, thinned to at most maxTicks.
export function logTicks(
  lo: number,
  hi: number,
  base: number,
  maxTicks = 8
): Tick[] {
  const klo = Math.ceil(lo - 1e-9);
  const khi = Math.floor(hi + 1e-9);
  const step = Math.max(1, Math.ceil((khi - klo + 1) / maxTicks));
  const ticks: Tick[] = [];
  for (let k = klo; k <= khi; k += step) {
    ticks.push({ frac: (k - lo) / (hi - lo), label: `${base}^${k}` });
  }
  return ticks;
}
