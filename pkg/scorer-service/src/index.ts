/** CLI entry point: serve a checkpoint over the scorer wire protocol. */

import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { NgramModel } from './model';
import { createApp, MIN_MAX_SEQ_LEN, ModelHolder } from './server';

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .option('model', {
      type: 'string',
      describe: 'path to a hinfill-lm-v1 checkpoint (train-lm artifact)',
      default: process.env.MODEL_PATH,
    })
    .option('port', {
      type: 'number',
      default: process.env.PORT ? Number(process.env.PORT) : 8900,
    })
    .option('host', { type: 'string', default: process.env.HOST ?? '127.0.0.1' })
    .option('device', {
      type: 'string',
      default: process.env.DEVICE ?? 'cpu',
      describe: 'compute device; this model family runs on cpu only',
    })
    .option('max-seq-len', {
      type: 'number',
      default: process.env.MAX_SEQ_LEN ? Number(process.env.MAX_SEQ_LEN) : 512,
      describe: `longest accepted token sequence (>= ${MIN_MAX_SEQ_LEN})`,
    })
    .strict()
    .parse();

  if (!argv.model) {
    console.error('a checkpoint is required: --model <path> or MODEL_PATH');
    process.exitCode = 1;
    return;
  }
  if (argv.device !== 'cpu') {
    console.error(`unsupported device ${argv.device}; n-gram checkpoints run on cpu`);
    process.exitCode = 1;
    return;
  }
  if (argv.maxSeqLen < MIN_MAX_SEQ_LEN) {
    console.error(`--max-seq-len must be >= ${MIN_MAX_SEQ_LEN}`);
    process.exitCode = 1;
    return;
  }

  const holder: ModelHolder = { model: null };
  const app = createApp(holder, { maxSeqLen: argv.maxSeqLen });
  const server = app.listen(argv.port, argv.host, () => {
    console.log(`scorer service listening on http://${argv.host}:${argv.port} (loading model...)`);
  });

  try {
    holder.model = NgramModel.load(argv.model);
    console.log(
      `model ready: ${holder.model.vocabSize} tokens, order ${holder.model.order}, ` +
      `dim ${holder.model.dim}`,
    );
  } catch (err) {
    console.error(`failed to load model from ${argv.model}: ${err}`);
    server.close();
    process.exitCode = 1;
  }
}

main().catch((err) => {
  console.error(err);
  process.exitCode = 1;
});
