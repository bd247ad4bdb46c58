import { parseArgs } from 'node:util'
import { runExport } from './export.js'
import { AdapterError } from './types.js'
import { validateDistributions } from './validate.js'

const USAGE = `usage:
  cli.js export --manifest m.csv --taxonomy t.json --model model.json --images dir --out d.jsonl [--batch-size N]
  cli.js validate --file d.jsonl --taxonomy t.json [--manifest m.csv]`

function main(argv: string[]): number {
  const command = argv[0]
  const rest = argv.slice(1)
  try {
    if (command === 'export') {
      const { values } = parseArgs({
        args: rest,
        options: {
          manifest: { type: 'string' },
          taxonomy: { type: 'string' },
          model: { type: 'string' },
          images: { type: 'string' },
          out: { type: 'string' },
          'batch-size': { type: 'string' },
        },
      })
      if (!values.manifest || !values.taxonomy || !values.model || !values.images || !values.out) {
        console.error(USAGE)
        return 2
      }
      const result = runExport({
        manifestPath: values.manifest,
        taxonomyPath: values.taxonomy,
        modelPath: values.model,
        imagesDir: values.images,
        outPath: values.out,
        batchSize: values['batch-size'] ? Number(values['batch-size']) : undefined,
      })
      console.log(`wrote ${result.outPath} (${result.rows} rows)`)
      return 0
    }
    if (command === 'validate') {
      const { values } = parseArgs({
        args: rest,
        options: {
          file: { type: 'string' },
          taxonomy: { type: 'string' },
          manifest: { type: 'string' },
        },
      })
      if (!values.file || !values.taxonomy) {
        console.error(USAGE)
        return 2
      }
      const report = validateDistributions(values.file, values.taxonomy, values.manifest)
      if (report.problems.length > 0) {
        for (const problem of report.problems) console.error(`problem: ${problem}`)
        return 2
      }
      console.log(`ok (${report.rows} rows)`)
      return 0
    }
    console.error(USAGE)
    return 2
  } catch (e) {
    if (e instanceof AdapterError) {
      console.error(`error: ${e.message}`)
      return 3
    }
    throw e
  }
}

process.exitCode = main(process.argv.slice(2))
