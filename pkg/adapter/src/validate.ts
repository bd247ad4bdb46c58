import fs from 'node:fs'
import { readManifest } from './manifest.js'
import { readTaxonomy } from './taxonomy.js'

const SUM_TOLERANCE = 1e-6

export interface ValidationReport {
  rows: number
  problems: string[]
}

/**
 * Re-check an exported distributions file without the fusion toolkit:
 * schema, per-row normalization, vector width against the taxonomy, id
 * uniqueness, and (when a manifest is given) exact id coverage.
 */
export function validateDistributions(
  filePath: string,
  taxonomyPath: string,
  manifestPath?: string,
): ValidationReport {
  const taxonomy = readTaxonomy(taxonomyPath)
  const k = taxonomy.classes.length
  const problems: string[] = []
  const seen = new Set<string>()
  let rows = 0

  const lines = fs.readFileSync(filePath, 'utf-8').split('\n')
  lines.forEach((line, index) => {
    const lineno = index + 1
    const trimmed = line.trim()
    if (trimmed === '' || trimmed.startsWith('#')) return
    rows += 1
    let row: { image_id?: unknown; p?: unknown }
    try {
      row = JSON.parse(trimmed)
    } catch {
      problems.push(`${lineno}: not valid JSON`)
      return
    }
    if (typeof row.image_id !== 'string' || !Array.isArray(row.p)) {
      problems.push(`${lineno}: expected {"image_id": string, "p": [..]}`)
      return
    }
    if (seen.has(row.image_id)) {
      problems.push(`${lineno}: duplicate image_id "${row.image_id}"`)
    }
    seen.add(row.image_id)
    const p = row.p as unknown[]
    if (p.length !== k) {
      problems.push(`${lineno}: vector length ${p.length}, taxonomy K=${k}`)
      return
    }
    if (p.some(v => typeof v !== 'number' || !Number.isFinite(v) || (v as number) < 0)) {
      problems.push(`${lineno}: entries must be finite non-negative numbers`)
      return
    }
    const total = (p as number[]).reduce((a, b) => a + b, 0)
    if (Math.abs(total - 1) > SUM_TOLERANCE) {
      problems.push(`${lineno}: entries sum to ${total}, expected 1 within ${SUM_TOLERANCE}`)
    }
  })

  if (manifestPath !== undefined) {
    const ids = new Set(readManifest(manifestPath).map(r => r.imageId))
    for (const id of seen) {
      if (!ids.has(id)) problems.push(`row id "${id}" not in manifest`)
    }
    for (const id of ids) {
      if (!seen.has(id)) problems.push(`manifest id "${id}" missing from export`)
    }
  }
  return { rows, problems }
}
