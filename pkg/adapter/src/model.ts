import fs from 'node:fs'
import { SchemaError } from './types.js'

/**
 * Toy linear-softmax classifier over precomputed image features.
 *
 * Real deployments would swap this for a tf.js / onnxruntime backbone; the
 * export pipeline only needs `outputWidth` and `predict` returning softmax
 * probabilities in taxonomy class order.
 */
export interface LinearSoftmaxModel {
  kind: 'linear-softmax'
  featureSize: number
  /** K x F weight matrix */
  weights: number[][]
  /** K biases */
  bias: number[]
}

export function loadModel(path: string): LinearSoftmaxModel {
  let data: unknown
  try {
    data = JSON.parse(fs.readFileSync(path, 'utf-8'))
  } catch (e) {
    throw new SchemaError(`${path}: not valid JSON: ${e}`)
  }
  const obj = data as Partial<LinearSoftmaxModel> & { feature_size?: number }
  const featureSize = obj.featureSize ?? obj.feature_size
  if (obj.kind !== 'linear-softmax' || typeof featureSize !== 'number') {
    throw new SchemaError(`${path}: expected {"kind": "linear-softmax", "feature_size": F, ...}`)
  }
  if (!Array.isArray(obj.weights) || !Array.isArray(obj.bias)) {
    throw new SchemaError(`${path}: model needs "weights" (K x F) and "bias" (K)`)
  }
  if (obj.weights.length !== obj.bias.length || obj.weights.length < 2) {
    throw new SchemaError(`${path}: weights rows (${obj.weights.length}) must match bias length`)
  }
  for (const row of obj.weights) {
    if (!Array.isArray(row) || row.length !== featureSize) {
      throw new SchemaError(`${path}: every weight row must have feature_size=${featureSize} entries`)
    }
  }
  return {
    kind: 'linear-softmax',
    featureSize,
    weights: obj.weights as number[][],
    bias: obj.bias as number[],
  }
}

export function outputWidth(model: LinearSoftmaxModel): number {
  return model.bias.length
}

export function softmax(logits: number[]): number[] {
  const top = Math.max(...logits)
  const exps = logits.map(v => Math.exp(v - top))
  const total = exps.reduce((a, b) => a + b, 0)
  return exps.map(v => v / total)
}

export function predict(model: LinearSoftmaxModel, features: number[]): number[] {
  if (features.length !== model.featureSize) {
    throw new SchemaError(
      `feature vector has ${features.length} entries, model expects ${model.featureSize}`,
    )
  }
  const logits = model.weights.map((row, k) => {
    let acc = model.bias[k]
    for (let j = 0; j < row.length; j++) acc += row[j] * features[j]
    return acc
  })
  return softmax(logits)
}
