export interface ExportJob {
  manifestPath: string
  /** opaque to the fusion toolkit; here a linear-softmax model JSON */
  modelPath: string
  taxonomyPath: string
  /** directory of per-image feature files (<image_id>.json) */
  imagesDir: string
  outPath: string
  batchSize?: number
}

export interface ManifestRow {
  imageId: string
  objectName: string
  graspLabel: string
  split: string
}

export interface Taxonomy {
  version: string
  classes: string[]
}

export class AdapterError extends Error {}

export class ImageMissing extends AdapterError {}

export class WidthMismatch extends AdapterError {}

export class SchemaError extends AdapterError {}
