/**
 * The four figure kinds rendered from rvmlab CSV files.
 *
 * timeseries     diag.csv      -> one SVG per tracked scalar vs t
 * field_profile  snapshot.csv  -> E_r, E_phi, B vs r with the enclosed-charge
 *                                 ceiling M/(2 pi r) when a companion diag
 *                                 file supplies the mass column
 * phase_space    markers.csv   -> (r, rdot) scatter colored by L
 * sweep_collapse sweep.csv     -> normalized focus radius/time vs epsilon
 */
import { CsvError, numeric, readCsv, requireColumns, Table } from './csv'
import { color, heatColors, makeAxis, Scene } from './svg'

export interface Figure {
  name: string
  svg: string
}

export interface RenderOptions {
  log: boolean
  /** companion diag.csv for the field-profile mass; optional */
  diagPath?: string
  warn?: (message: string) => void
}

const TRACKED = ['rho_max', 'er_max', 'r_sup', 'mass'] as const

export function timeseries(table: Table, opts: RenderOptions): Figure[] {
  if (table.rows < 2) {
    throw new CsvError('need at least 2 rows for a time series', table.rows + 1)
  }
  requireColumns(table, ['t', ...TRACKED])
  const t = numeric(table, 't')
  const figures: Figure[] = []
  for (const colName of TRACKED) {
    const y = numeric(table, colName)
    const scene = new Scene(`${colName} vs t`, makeAxis(t, false),
      makeAxis(y, opts.log), 't', colName)
    scene.polyline(t, y, color(0))
    if (colName === 'r_sup') {
      const iMin = y.indexOf(Math.min(...y))
      scene.verticalMarker(t[iMin], `t*=${t[iMin]}`)
    }
    figures.push({ name: `timeseries_${colName}.svg`, svg: scene.render() })
  }
  return figures
}

export interface FieldProfileData {
  r: number[]
  e_r: number[]
  e_phi: number[]
  b: number[]
  /** M / (2 pi r) where the companion mass is known, else null */
  bound: number[] | null
}

export function fieldProfileData(table: Table, opts: RenderOptions): FieldProfileData {
  requireColumns(table, ['r', 'e_r', 'e_phi', 'b'])
  const r = numeric(table, 'r')
  const data: FieldProfileData = {
    r,
    e_r: numeric(table, 'e_r'),
    e_phi: numeric(table, 'e_phi'),
    b: numeric(table, 'b'),
    bound: null,
  }
  if (opts.diagPath) {
    const diag = readCsv(opts.diagPath)
    const mass = numeric(diag, 'mass')[0]
    data.bound = r.map((ri) => (ri > 0 ? mass / (2 * Math.PI * ri) : Infinity))
  } else if (opts.warn) {
    opts.warn('no companion diag file: enclosed-charge ceiling omitted')
  }
  return data
}

export function fieldProfile(table: Table, opts: RenderOptions): Figure[] {
  const data = fieldProfileData(table, opts)
  const all = data.e_r.concat(data.e_phi, data.b)
  const scene = new Scene('field profiles', makeAxis(data.r, false),
    makeAxis(all, opts.log), 'r', 'field')
  scene.polyline(data.r, data.e_r, color(0))
  scene.polyline(data.r, data.e_phi, color(1))
  scene.polyline(data.r, data.b, color(2))
  const legend: Array<[string, string]> = [
    ['E_r', color(0)], ['E_phi', color(1)], ['B', color(2)],
  ]
  if (data.bound) {
    // clip the ceiling to the plotted range so the hyperbola stays visible
    const yMax = Math.max(...all) * 1.5 || 1
    const clipped = data.bound.map((v) => Math.min(v, yMax))
    scene.polyline(data.r, clipped, '#555555', '5 4')
    legend.push(['M/(2 pi r)', '#555555'])
  }
  scene.legend(legend)
  return [{ name: 'field_profile.svg', svg: scene.render() }]
}

export function phaseSpace(table: Table, opts: RenderOptions): Figure[] {
  requireColumns(table, ['r', 'rdot', 'L', 'weight'])
  const r = numeric(table, 'r')
  const rdot = numeric(table, 'rdot')
  const L = numeric(table, 'L')
  const scene = new Scene('phase space (r, rdot), colored by L',
    makeAxis(r, false), makeAxis(rdot, false), 'r', 'rdot')
  scene.scatter(r, rdot, heatColors(L))
  return [{ name: 'phase_space.svg', svg: scene.render() }]
}

export function sweepCollapse(table: Table, opts: RenderOptions): Figure[] {
  requireColumns(table, ['eps', 'status', 'r_sup_norm', 't_star_norm'])
  const status = table.columns.get('status')!
  const keep = status.map((s) => s === 'ok')
  const pick = (name: string) =>
    numeric(table, name).filter((_, i) => keep[i])
  const eps = table.columns.get('eps')!
    .map(Number).filter((_, i) => keep[i])
  if (eps.length === 0) {
    throw new CsvError('no successful sweep rows', 2)
  }
  const rNorm = pick('r_sup_norm')
  const tNorm = pick('t_star_norm')
  const scene = new Scene('scaling collapse', makeAxis(eps, true),
    makeAxis(rNorm.concat(tNorm), false), 'epsilon (log)', 'normalized')
  scene.polyline(eps, rNorm, color(0))
  scene.polyline(eps, tNorm, color(1))
  scene.legend([
    ['r_sup / eps^(l-k)', color(0)],
    ['t* / eps^(2l-k)', color(1)],
  ])
  return [{ name: 'sweep_collapse.svg', svg: scene.render() }]
}

export const KINDS = {
  timeseries,
  field_profile: fieldProfile,
  phase_space: phaseSpace,
  sweep_collapse: sweepCollapse,
} as const

export type Kind = keyof typeof KINDS

export function render(kind: Kind, table: Table, opts: RenderOptions): Figure[] {
  return KINDS[kind](table, opts)
}
