/**
 * Autoregressive n-gram model loaded from a hinfill-lm-v1 checkpoint.
 *
 * Mirrors the training-side semantics exactly: BOS-padded fixed-order
 * contexts, add-k smoothing over the checkpoint vocabulary, out-of-vocabulary
 * tokens scored with a zero count numerator, mean-pooled token embeddings
 * with a dedicated UNK row.
 */

import { readFileSync } from 'fs';

export const BOS_ID = -1;
export const UNK_ID = -2;

export interface MaskJson {
  kind: 'edge' | 'node';
  index: number;
  position: number;
}

export interface TemplateJson {
  tokens: string[];
  masks: MaskJson[];
  target: string[] | null;
}

export interface Fill {
  tokens: string[];
  log_score: number;
}

interface CheckpointJson {
  format: string;
  order: number;
  smoothing: number;
  dim: number;
  tokens: string[];
  counts: Array<[number[], Array<[number, number]>]>;
  embeddings: number[][];
  unk_vector: number[];
  name_index: string[][];
}

/** Python-tuple-style lexicographic comparison of token arrays. */
export function compareTokens(a: string[], b: string[]): number {
  const n = Math.min(a.length, b.length);
  for (let i = 0; i < n; i++) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return a.length - b.length;
}

export class NgramModel {
  readonly order: number;
  readonly smoothing: number;
  readonly dim: number;
  readonly tokens: string[];
  readonly nameIndex: string[][];
  private readonly tokenIds = new Map<string, number>();
  private readonly counts = new Map<string, Map<number, number>>();
  private readonly totals = new Map<string, number>();
  private readonly embeddings: number[][];
  private readonly unkVector: number[];

  constructor(checkpoint: CheckpointJson) {
    if (checkpoint.format !== 'hinfill-lm-v1') {
      throw new Error(`unsupported model format ${JSON.stringify(checkpoint.format)}`);
    }
    this.order = checkpoint.order;
    this.smoothing = checkpoint.smoothing;
    this.dim = checkpoint.dim;
    this.tokens = checkpoint.tokens;
    this.embeddings = checkpoint.embeddings;
    this.unkVector = checkpoint.unk_vector;
    this.nameIndex = checkpoint.name_index;
    this.tokens.forEach((t, i) => this.tokenIds.set(t, i));
    for (const [ctx, items] of checkpoint.counts) {
      const key = ctx.join(',');
      const byToken = new Map<number, number>();
      let total = 0;
      for (const [tok, c] of items) {
        byToken.set(tok, c);
        total += c;
      }
      this.counts.set(key, byToken);
      this.totals.set(key, total);
    }
  }

  static load(path: string): NgramModel {
    return new NgramModel(JSON.parse(readFileSync(path, 'utf-8')) as CheckpointJson);
  }

  get vocabSize(): number {
    return this.tokens.length;
  }

  tokenId(token: string): number {
    return this.tokenIds.get(token) ?? UNK_ID;
  }

  ids(tokens: string[]): number[] {
    return tokens.map((t) => this.tokenId(t));
  }

  conditionalProb(context: number[], tokenId: number): number {
    const key = context.join(',');
    const c = this.counts.get(key)?.get(tokenId) ?? 0;
    const total = this.totals.get(key) ?? 0;
    return (c + this.smoothing) / (total + this.smoothing * this.vocabSize);
  }

  conditionalLogProb(context: number[], tokenId: number): number {
    return Math.log(this.conditionalProb(context, tokenId));
  }

  score(tokens: string[]): number {
    if (tokens.length === 0) {
      throw new Error('cannot score an empty sequence');
    }
    const ids = this.ids(tokens);
    const padded = new Array<number>(this.order - 1).fill(BOS_ID).concat(ids);
    let total = 0;
    for (let i = 0; i < ids.length; i++) {
      total += this.conditionalLogProb(padded.slice(i, i + this.order - 1), ids[i]);
    }
    return total;
  }

  embed(tokens: string[]): number[] {
    if (tokens.length === 0) {
      throw new Error('cannot embed an empty sequence');
    }
    const out = new Array<number>(this.dim).fill(0);
    for (const id of this.ids(tokens)) {
      const row = id >= 0 ? this.embeddings[id] : this.unkVector;
      for (let k = 0; k < this.dim; k++) out[k] += row[k];
    }
    for (let k = 0; k < this.dim; k++) out[k] /= tokens.length;
    return out;
  }

  /** Tokens strictly left of the requested mask. */
  prefixBefore(template: TemplateJson, maskPosition: number): string[] {
    const mask = template.masks[maskPosition];
    if (!mask) {
      throw new Error(`mask position ${maskPosition} out of range`);
    }
    return template.tokens.slice(0, mask.position);
  }

  /** Rank explicit candidates by greedy left-context substitute-and-score. */
  fillCandidates(template: TemplateJson, maskPosition: number,
                 candidates: string[][], k: number): Fill[] {
    if (candidates.length === 0) {
      throw new Error('candidate set must be non-empty');
    }
    const prefix = this.prefixBefore(template, maskPosition);
    const scored: Fill[] = candidates.map((cand) => ({
      tokens: cand,
      log_score: this.score(prefix.concat(cand)),
    }));
    scored.sort((a, b) =>
      a.log_score !== b.log_score ? b.log_score - a.log_score : compareTokens(a.tokens, b.tokens));
    return scored.slice(0, Math.min(k, scored.length));
  }

  /**
   * Greedy free-text generation at the mask: repeatedly emit the most
   * probable next token (ties to the lowest token id) until a period or the
   * step limit. The generated name is not guaranteed to exist in the graph.
   */
  greedyFill(template: TemplateJson, maskPosition: number, maxTokens = 8): Fill {
    const prefix = this.ids(this.prefixBefore(template, maskPosition));
    const padded = new Array<number>(this.order - 1).fill(BOS_ID).concat(prefix);
    const generated: string[] = [];
    let logScore = 0;
    for (let step = 0; step < maxTokens; step++) {
      const context = padded.slice(padded.length - (this.order - 1));
      let bestId = 0;
      let bestProb = -1;
      for (let t = 0; t < this.vocabSize; t++) {
        const p = this.conditionalProb(context, t);
        if (p > bestProb) {
          bestProb = p;
          bestId = t;
        }
      }
      const token = this.tokens[bestId];
      if (token === '.' && generated.length > 0) break;
      generated.push(token);
      logScore += Math.log(bestProb);
      padded.push(bestId);
      if (token === '.') break;
    }
    return { tokens: generated, log_score: logScore };
  }
}
