import fs from 'node:fs'
import { ManifestRow, SchemaError } from './types.js'

const HEADER = 'image_id,object_name,grasp_label,split'

/** Read the toolkit's manifest CSV: ids stay in file order. */
export function readManifest(path: string): ManifestRow[] {
  const text = fs.readFileSync(path, 'utf-8')
  const lines = text.split('\n').filter(line => line.trim() !== '')
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty manifest`)
  }
  if (lines[0].trim() !== HEADER) {
    throw new SchemaError(`${path}:1: header must be "${HEADER}"`)
  }
  const seen = new Set<string>()
  const rows: ManifestRow[] = []
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(',').map(f => f.trim())
    if (fields.length !== 4) {
      throw new SchemaError(`${path}:${i + 1}: expected 4 fields, got ${fields.length}`)
    }
    const [imageId, objectName, graspLabel, split] = fields
    if (imageId === '') {
      throw new SchemaError(`${path}:${i + 1}: empty image_id`)
    }
    if (seen.has(imageId)) {
      throw new SchemaError(`${path}:${i + 1}: duplicate image_id "${imageId}"`)
    }
    seen.add(imageId)
    rows.push({ imageId, objectName, graspLabel, split })
  }
  return rows
}
