import fs from 'node:fs'
import path from 'node:path'
import { readManifest } from './manifest.js'
import { loadModel, outputWidth, predict } from './model.js'
import { readTaxonomy } from './taxonomy.js'
import { ExportJob, ImageMissing, SchemaError, WidthMismatch } from './types.js'

const DEFAULT_BATCH = 64

function loadFeatures(imagesDir: string, imageId: string): number[] {
  const file = path.join(imagesDir, `${imageId}.json`)
  if (!fs.existsSync(file)) {
    throw new ImageMissing(`no feature file for image "${imageId}" (${file})`)
  }
  const data = JSON.parse(fs.readFileSync(file, 'utf-8'))
  if (!Array.isArray(data) || data.some(v => typeof v !== 'number')) {
    throw new SchemaError(`${file}: expected a JSON array of numbers`)
  }
  return data as number[]
}

export interface ExportResult {
  rows: number
  outPath: string
}

/**
 * One JSONL row per manifest image, in manifest order regardless of
 * batching. The first line is a metadata comment naming the source; the
 * fusion toolkit skips comment lines, so files from this adapter and from
 * the synthetic simulator are otherwise indistinguishable.
 */
export function runExport(job: ExportJob): ExportResult {
  const taxonomy = readTaxonomy(job.taxonomyPath)
  const model = loadModel(job.modelPath)
  if (outputWidth(model) !== taxonomy.classes.length) {
    throw new WidthMismatch(
      `model outputs ${outputWidth(model)} classes, taxonomy has ${taxonomy.classes.length}`,
    )
  }
  const rows = readManifest(job.manifestPath)
  const batchSize = job.batchSize && job.batchSize > 0 ? job.batchSize : DEFAULT_BATCH

  const lines: string[] = [
    `# source=classifier-adapter model=${path.basename(job.modelPath)} taxonomy=${taxonomy.version}`,
  ]
  for (let start = 0; start < rows.length; start += batchSize) {
    const batch = rows.slice(start, start + batchSize)
    const vectors = batch.map(row => predict(model, loadFeatures(job.imagesDir, row.imageId)))
    batch.forEach((row, i) => {
      lines.push(JSON.stringify({ image_id: row.imageId, p: vectors[i] }))
    })
  }
  fs.writeFileSync(job.outPath, lines.join('\n') + '\n', 'utf-8')
  return { rows: rows.length, outPath: job.outPath }
}
