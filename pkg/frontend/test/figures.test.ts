import assert from 'node:assert/strict'
import { test } from 'node:test'
import { mkdtempSync, readdirSync, readFileSync, statSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { main } from '../src/cli'
import { numeric, parseCsv, readCsv } from '../src/csv'
import { fieldProfileData, render, timeseries } from '../src/figures'

const FIXTURES = join(__dirname, '..', '..', 'test', 'fixtures')

const diagPath = join(FIXTURES, 'diag.csv')
const snapshotT0 = join(FIXTURES, 'snapshot_t0.csv')
const snapshotFinal = join(FIXTURES, 'snapshot_final.csv')
const markersPath = join(FIXTURES, 'markers_t0.csv')
const sweepPath = join(FIXTURES, 'sweep.csv')

function renderAll(kind: string, input: string, extra: string[] = []): string {
  const out = mkdtempSync(join(tmpdir(), 'plotkit-'))
  const rc = main(['--in', input, '--out', out, '--kind', kind, ...extra])
  assert.equal(rc, 0, `render ${kind} failed`)
  return out
}

test('timeseries renders one non-empty figure per tracked scalar', () => {
  const out = renderAll('timeseries', diagPath)
  const files = readdirSync(out).sort()
  assert.deepEqual(files, ['timeseries_er_max.svg', 'timeseries_mass.svg',
    'timeseries_r_sup.svg', 'timeseries_rho_max.svg'])
  for (const f of files) {
    assert.ok(statSync(join(out, f)).size > 500, `${f} is empty`)
    assert.match(readFileSync(join(out, f), 'utf8'), /<svg /)
  }
})

test('r_sup figure marks the interior minimum at t*', () => {
  const table = readCsv(diagPath)
  const figs = timeseries(table, { log: false })
  const rsup = figs.find((f) => f.name === 'timeseries_r_sup.svg')!
  const t = numeric(table, 't')
  const y = numeric(table, 'r_sup')
  const tStar = t[y.indexOf(Math.min(...y))]
  assert.ok(tStar > 0, 'the minimum is interior')
  assert.match(rsup.svg, new RegExp(`t\\*=${tStar}`))
})

test('field profile renders with the enclosed-charge ceiling', () => {
  const out = renderAll('field_profile', snapshotT0, ['--diag', diagPath])
  const svg = readFileSync(join(out, 'field_profile.svg'), 'utf8')
  assert.match(svg, /M\/\(2 pi r\)/)
})

test('field profile warns and renders without companion mass', () => {
  const warnings: string[] = []
  const data = render('field_profile', readCsv(snapshotT0),
    { log: false, warn: (m) => warnings.push(m) })
  assert.equal(data.length, 1)
  assert.equal(warnings.length, 1)
})

test('E_r never exceeds the drawn ceiling on any snapshot', () => {
  for (const path of [snapshotT0, snapshotFinal]) {
    const data = fieldProfileData(readCsv(path), { log: false, diagPath })
    assert.ok(data.bound, 'ceiling available')
    for (let i = 0; i < data.r.length; i++) {
      if (data.r[i] <= 0) continue
      assert.ok(data.e_r[i] <= data.bound![i] * (1 + 1e-10),
        `E_r above M/(2 pi r) at r=${data.r[i]} in ${path}`)
    }
  }
})

test('initial density vanishes inside the annulus hole', () => {
  const table = readCsv(snapshotT0)
  const r = numeric(table, 'r')
  const er = numeric(table, 'e_r')
  for (let i = 0; i < r.length; i++) {
    if (r[i] < 0.5 - 0.002) {
      assert.equal(er[i], 0)
    }
  }
})

test('phase space renders the marker cloud', () => {
  const out = renderAll('phase_space', markersPath)
  const svg = readFileSync(join(out, 'phase_space.svg'), 'utf8')
  assert.ok((svg.match(/<circle /g) || []).length >= 100)
})

test('phase space markers sit inside the initial support box', () => {
  const table = readCsv(markersPath)
  const r = numeric(table, 'r')
  const rdot = numeric(table, 'rdot')
  for (let i = 0; i < r.length; i++) {
    assert.ok(r[i] >= 0.5 && r[i] <= 1.0)
    assert.ok(rdot[i] < 0)
  }
})

test('final marker radii agree with the diag support column', () => {
  // cross-file consistency: the last diag row's r_sup bounds the dump
  const markers = readCsv(join(FIXTURES, 'markers_final.csv'))
  const diag = readCsv(diagPath)
  const rSup = numeric(diag, 'r_sup')
  const last = rSup[rSup.length - 1]
  for (const ri of numeric(markers, 'r')) {
    assert.ok(ri <= last * (1 + 1e-12))
  }
})

test('sweep collapse renders both normalized series', () => {
  const out = renderAll('sweep_collapse', sweepPath)
  const svg = readFileSync(join(out, 'sweep_collapse.svg'), 'utf8')
  assert.match(svg, /r_sup \/ eps/)
  assert.match(svg, /t\* \/ eps/)
})

test('rendering is byte-stable', () => {
  for (const [kind, input] of [['timeseries', diagPath],
    ['phase_space', markersPath], ['sweep_collapse', sweepPath]] as const) {
    const a = render(kind, readCsv(input), { log: false })
    const b = render(kind, readCsv(input), { log: false })
    assert.equal(a.length, b.length)
    for (let i = 0; i < a.length; i++) {
      assert.equal(a[i].svg, b[i].svg)
    }
  }
})

test('log toggle changes the projection', () => {
  const lin = render('timeseries', readCsv(diagPath), { log: false })
  const log = render('timeseries', readCsv(diagPath), { log: true })
  assert.notEqual(lin[0].svg, log[0].svg)
})

test('malformed csv exits nonzero with a row number', () => {
  const dir = mkdtempSync(join(tmpdir(), 'plotkit-bad-'))
  const bad = join(dir, 'bad.csv')
  require('fs').writeFileSync(bad, 't,mass\n0,1\n0.1\n')
  const rc = main(['--in', bad, '--out', dir, '--kind', 'timeseries'])
  assert.equal(rc, 2)
})

test('empty csv exits nonzero', () => {
  const dir = mkdtempSync(join(tmpdir(), 'plotkit-empty-'))
  const empty = join(dir, 'empty.csv')
  require('fs').writeFileSync(empty, '')
  const rc = main(['--in', empty, '--out', dir, '--kind', 'timeseries'])
  assert.equal(rc, 2)
})

test('unknown kind exits with usage error', () => {
  const rc = main(['--in', diagPath, '--kind', 'volcano'])
  assert.equal(rc, 2)
})
