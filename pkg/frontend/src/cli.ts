#!/usr/bin/env node
/**
 * Batch figure renderer for rvmlab CSV outputs.
 *
 * Usage:
 *   plotkit --in diag.csv --out figs --kind timeseries [--log]
 *   plotkit --in snapshot_t0.csv --out figs --kind field_profile --diag diag.csv
 *   plotkit --in markers_t0.csv --out figs --kind phase_space
 *   plotkit --in sweep.csv --out figs --kind sweep_collapse
 *
 * Exit codes: 0 rendered, 2 bad usage or malformed input.
 */
import { mkdirSync, writeFileSync } from 'fs'
import { join } from 'path'
import { CsvError, readCsv } from './csv'
import { Kind, KINDS, render, RenderOptions } from './figures'

interface Args {
  input: string
  out: string
  kind: Kind
  log: boolean
  diag?: string
}

function parseArgs(argv: string[]): Args {
  let input = ''
  let out = '.'
  let kind = ''
  let log = false
  let diag: string | undefined
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case '--in': input = argv[++i] ?? ''; break
      case '--out': out = argv[++i] ?? '.'; break
      case '--kind': kind = argv[++i] ?? ''; break
      case '--log': log = true; break
      case '--diag': diag = argv[++i]; break
      default:
        throw new Error(`unknown flag ${argv[i]}`)
    }
  }
  if (!input) throw new Error('--in is required')
  if (!(kind in KINDS)) {
    throw new Error(`--kind must be one of ${Object.keys(KINDS).join(', ')}`)
  }
  return { input, out, kind: kind as Kind, log, diag }
}

export function main(argv: string[]): number {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`)
    return 2
  }
  try {
    const table = readCsv(args.input)
    const opts: RenderOptions = {
      log: args.log,
      diagPath: args.diag,
      warn: (msg) => console.warn(`warning: ${msg}`),
    }
    mkdirSync(args.out, { recursive: true })
    for (const fig of render(args.kind, table, opts)) {
      const path = join(args.out, fig.name)
      writeFileSync(path, fig.svg)
      console.log(path)
    }
    return 0
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`input error (${args.input}): ${err.message}`)
    } else {
      console.error(`error: ${(err as Error).message}`)
    }
    return 2
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)))
}
