/**
 * Minimal CSV reader for the rvmlab output schemas.
 *
 * All files carry a single header row; cells are either finite decimal
 * numbers or plain strings (the sweep status column).  Malformed input
 * fails with the 1-based row number so batch jobs can point at the line.
 */
import { readFileSync } from 'fs'

export interface Table {
  header: string[]
  /** column name -> raw string cells, row-major order preserved */
  columns: Map<string, string[]>
  rows: number
}

export class CsvError extends Error {
  constructor(message: string, public readonly row: number) {
    super(`row ${row}: ${message}`)
  }
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0)
  if (lines.length === 0) {
    throw new CsvError('empty file', 0)
  }
  const header = lines[0].split(',').map((h) => h.trim())
  if (header.some((h) => h.length === 0)) {
    throw new CsvError('blank column name in header', 1)
  }
  const columns = new Map<string, string[]>(header.map((h) => [h, []]))
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',')
    if (cells.length !== header.length) {
      throw new CsvError(
        `expected ${header.length} fields, found ${cells.length}`, i + 1)
    }
    for (let j = 0; j < header.length; j++) {
      columns.get(header[j])!.push(cells[j])
    }
  }
  return { header, columns, rows: lines.length - 1 }
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, 'utf8'))
}

/** Numeric column; every cell must parse to a finite float. */
export function numeric(table: Table, name: string): number[] {
  const raw = table.columns.get(name)
  if (raw === undefined) {
    throw new CsvError(`missing column '${name}'`, 1)
  }
  return raw.map((cell, i) => {
    const v = Number(cell)
    if (!Number.isFinite(v)) {
      throw new CsvError(`column '${name}': bad number '${cell}'`, i + 2)
    }
    return v
  })
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.has(name)) {
      throw new CsvError(`missing column '${name}'`, 1)
    }
  }
}
