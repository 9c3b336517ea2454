/** Express app implementing the scorer wire protocol. */

import express, { Express, NextFunction, Request, Response } from 'express';

import { Fill, NgramModel, TemplateJson } from './model';

export interface ModelHolder {
  model: NgramModel | null;
}

export interface ServerOptions {
  maxSeqLen?: number;
}

export const MIN_MAX_SEQ_LEN = 16;
const DEFAULT_MAX_SEQ_LEN = 512;

function badRequest(res: Response, message: string): void {
  res.status(400).json({ error: message });
}

function tokensOf(body: unknown): string[] | null {
  if (typeof body !== 'object' || body === null) return null;
  const tokens = (body as Record<string, unknown>).tokens;
  if (!Array.isArray(tokens) || tokens.length === 0) return null;
  if (!tokens.every((t) => typeof t === 'string')) return null;
  return tokens as string[];
}

function templateOf(value: unknown): TemplateJson | null {
  if (typeof value !== 'object' || value === null) return null;
  const t = value as Record<string, unknown>;
  if (!Array.isArray(t.tokens) || !t.tokens.every((x) => typeof x === 'string')) return null;
  if (!Array.isArray(t.masks)) return null;
  for (const m of t.masks) {
    if (typeof m !== 'object' || m === null) return null;
    const mask = m as Record<string, unknown>;
    if (mask.kind !== 'edge' && mask.kind !== 'node') return null;
    if (typeof mask.index !== 'number' || typeof mask.position !== 'number') return null;
  }
  return value as TemplateJson;
}

export function createApp(holder: ModelHolder, options: ServerOptions = {}): Express {
  const maxSeqLen = options.maxSeqLen ?? DEFAULT_MAX_SEQ_LEN;
  if (maxSeqLen < MIN_MAX_SEQ_LEN) {
    throw new Error(`max sequence length must be >= ${MIN_MAX_SEQ_LEN}, got ${maxSeqLen}`);
  }
  const app = express();
  app.use(express.json({ limit: '16mb' }));

  // malformed JSON from the body parser surfaces as a 400, not a 500
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (err instanceof SyntaxError) {
      badRequest(res, 'malformed JSON body');
      return;
    }
    next(err);
  });

  const requireModel = (res: Response): NgramModel | null => {
    if (!holder.model) {
      res.status(503).json({ error: 'model not ready' });
      return null;
    }
    return holder.model;
  };

  app.get('/v1/info', (_req, res) => {
    const model = requireModel(res);
    if (!model) return;
    res.json({ embedding_dim: model.dim, capabilities: ['score', 'fill', 'embed'] });
  });

  const checkLength = (res: Response, n: number): boolean => {
    if (n > maxSeqLen) {
      badRequest(res, `sequence length ${n} exceeds the limit of ${maxSeqLen}`);
      return false;
    }
    return true;
  };

  app.post('/v1/score', (req, res) => {
    const model = requireModel(res);
    if (!model) return;
    const tokens = tokensOf(req.body);
    if (!tokens) {
      badRequest(res, 'body must be {"tokens": [non-empty list of strings]}');
      return;
    }
    if (!checkLength(res, tokens.length)) return;
    res.json({ log_prob: model.score(tokens) });
  });

  app.post('/v1/embed', (req, res) => {
    const model = requireModel(res);
    if (!model) return;
    const tokens = tokensOf(req.body);
    if (!tokens) {
      badRequest(res, 'body must be {"tokens": [non-empty list of strings]}');
      return;
    }
    if (!checkLength(res, tokens.length)) return;
    res.json({ vector: model.embed(tokens) });
  });

  app.post('/v1/fill', (req, res) => {
    const model = requireModel(res);
    if (!model) return;
    const body = req.body as Record<string, unknown>;
    const template = templateOf(body?.template);
    if (!template) {
      badRequest(res, 'missing or malformed "template"');
      return;
    }
    if (!checkLength(res, template.tokens.length)) return;
    const maskPosition = body.mask_position;
    if (typeof maskPosition !== 'number' || !Number.isInteger(maskPosition)
        || maskPosition < 0 || maskPosition >= template.masks.length) {
      badRequest(res, '"mask_position" must index the template mask list');
      return;
    }
    const k = body.k;
    if (typeof k !== 'number' || !Number.isInteger(k) || k < 1) {
      badRequest(res, '"k" must be a positive integer');
      return;
    }
    const rawCandidates = body.candidates ?? null;
    let fills: Fill[];
    if (rawCandidates === null) {
      fills = [model.greedyFill(template, maskPosition)].slice(0, k);
    } else {
      if (!Array.isArray(rawCandidates) || rawCandidates.length === 0
          || !rawCandidates.every((c) => Array.isArray(c) && c.length > 0
                                         && c.every((t) => typeof t === 'string'))) {
        badRequest(res, '"candidates" must be null or a non-empty list of token lists');
        return;
      }
      fills = model.fillCandidates(template, maskPosition, rawCandidates as string[][], k);
    }
    res.json({ fills });
  });

  app.use((req, res) => {
    badRequest(res, `unknown endpoint ${req.method} ${req.path}`);
  });

  return app;
}
