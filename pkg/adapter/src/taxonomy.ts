import fs from 'node:fs'
import { SchemaError, Taxonomy } from './types.js'

export function readTaxonomy(path: string): Taxonomy {
  let data: unknown
  try {
    data = JSON.parse(fs.readFileSync(path, 'utf-8'))
  } catch (e) {
    throw new SchemaError(`${path}: not valid JSON: ${e}`)
  }
  const obj = data as { version?: unknown; classes?: unknown }
  if (!obj || !Array.isArray(obj.classes) || obj.classes.some(c => typeof c !== 'string')) {
    throw new SchemaError(`${path}: taxonomy "classes" must be a string array`)
  }
  if (obj.classes.length < 2) {
    throw new SchemaError(`${path}: taxonomy needs at least 2 classes`)
  }
  return {
    version: typeof obj.version === 'string' ? obj.version : 'unversioned',
    classes: obj.classes as string[],
  }
}
