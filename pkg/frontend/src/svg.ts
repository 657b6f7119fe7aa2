/**
 * Deterministic SVG scene builder: fixed canvas, fixed precision, no
 * timestamps or randomness, so identical inputs give identical bytes.
 */

export const WIDTH = 860
export const HEIGHT = 560
const MARGIN = { left: 78, right: 24, top: 42, bottom: 56 }

export interface Axis {
  min: number
  max: number
  log: boolean
}

const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e']

export function color(i: number): string {
  return PALETTE[i % PALETTE.length]
}

function fmt(v: number): string {
  if (!Number.isFinite(v)) return '0'
  return Number(v.toPrecision(6)).toString()
}

export function makeAxis(values: number[], log: boolean): Axis {
  const finite = values.filter((v) => Number.isFinite(v) && (!log || v > 0))
  let min = finite.length ? Math.min(...finite) : 0
  let max = finite.length ? Math.max(...finite) : 1
  if (min === max) {
    // flat series still renders as a visible line mid-canvas
    min = log ? min / 2 : min - 1
    max = log ? max * 2 : max + 1
  }
  return { min, max, log }
}

function project(v: number, axis: Axis, lo: number, hi: number): number {
  let t: number
  if (axis.log) {
    const v1 = Math.max(v, Number.MIN_VALUE)
    t = (Math.log10(v1) - Math.log10(axis.min)) /
      (Math.log10(axis.max) - Math.log10(axis.min))
  } else {
    t = (v - axis.min) / (axis.max - axis.min)
  }
  return lo + t * (hi - lo)
}

export function projectX(v: number, axis: Axis): number {
  return project(v, axis, MARGIN.left, WIDTH - MARGIN.right)
}

export function projectY(v: number, axis: Axis): number {
  return project(v, axis, HEIGHT - MARGIN.bottom, MARGIN.top)
}

function ticks(axis: Axis, count: number): number[] {
  const out: number[] = []
  for (let i = 0; i <= count; i++) {
    const t = i / count
    out.push(axis.log
      ? 10 ** (Math.log10(axis.min) + t * (Math.log10(axis.max) - Math.log10(axis.min)))
      : axis.min + t * (axis.max - axis.min))
  }
  return out
}

export class Scene {
  private parts: string[] = []

  constructor(title: string, private xAxis: Axis, private yAxis: Axis,
              xLabel: string, yLabel: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="monospace" font-size="15">${title}</text>`,
    )
    this.frame(xLabel, yLabel)
  }

  private frame(xLabel: string, yLabel: string): void {
    const x0 = MARGIN.left
    const x1 = WIDTH - MARGIN.right
    const y0 = HEIGHT - MARGIN.bottom
    const y1 = MARGIN.top
    this.parts.push(
      `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#444444"/>`)
    for (const tv of ticks(this.xAxis, 6)) {
      const px = fmt(projectX(tv, this.xAxis))
      this.parts.push(
        `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#444444"/>`,
        `<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-family="monospace" font-size="11">${fmt(tv)}</text>`)
    }
    for (const tv of ticks(this.yAxis, 6)) {
      const py = fmt(projectY(tv, this.yAxis))
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#444444"/>`,
        `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="monospace" font-size="11">${fmt(tv)}</text>`)
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="monospace" font-size="13">${xLabel}</text>`,
      `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" font-family="monospace" font-size="13" transform="rotate(-90 20 ${(y0 + y1) / 2})">${yLabel}</text>`)
  }

  polyline(xs: number[], ys: number[], stroke: string, dash = ''): void {
    const pts: string[] = []
    for (let i = 0; i < xs.length; i++) {
      if (this.yAxis.log && ys[i] <= 0) continue
      pts.push(`${fmt(projectX(xs[i], this.xAxis))},${fmt(projectY(ys[i], this.yAxis))}`)
    }
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : ''
    this.parts.push(
      `<polyline fill="none" stroke="${stroke}" stroke-width="1.6"${dashAttr} points="${pts.join(' ')}"/>`)
  }

  scatter(xs: number[], ys: number[], colors: string[]): void {
    for (let i = 0; i < xs.length; i++) {
      this.parts.push(
        `<circle cx="${fmt(projectX(xs[i], this.xAxis))}" cy="${fmt(projectY(ys[i], this.yAxis))}" r="1.8" fill="${colors[i]}"/>`)
    }
  }

  verticalMarker(x: number, label: string): void {
    const px = fmt(projectX(x, this.xAxis))
    this.parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" stroke="#888888" stroke-dasharray="4 3"/>`,
      `<text x="${px}" y="${MARGIN.top - 6}" text-anchor="middle" font-family="monospace" font-size="11">${label}</text>`)
  }

  legend(entries: Array<[string, string]>): void {
    let y = MARGIN.top + 16
    for (const [label, stroke] of entries) {
      const x = WIDTH - MARGIN.right - 170
      this.parts.push(
        `<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${stroke}" stroke-width="2"/>`,
        `<text x="${x + 32}" y="${y}" font-family="monospace" font-size="12">${label}</text>`)
      y += 18
    }
  }

  render(): string {
    return this.parts.join('\n') + '\n</svg>\n'
  }
}

/** Map values onto a blue->red ramp, returning one hex color per value. */
export function heatColors(values: number[]): string[] {
  const min = Math.min(...values)
  const max = Math.max(...values)
  const span = max - min || 1
  return values.map((v) => {
    const t = (v - min) / span
    const r = Math.round(40 + 200 * t)
    const b = Math.round(240 - 200 * t)
    return `#${r.toString(16).padStart(2, '0')}50${b.toString(16).padStart(2, '0')}`
  })
}
