/**
 * Standalone command mirroring the main toolkit's `run` flags:
 *
 *   node dist/cli.js run --protocol within --data set.miec --out runs/eegnet \
 *        [--config cfg.json] [--seed N]
 *
 * Writes report.json (shared schema) and report.txt into --out.
 * MIBCI_SEED overrides the configured seed, as in the main CLI.
 */

import * as fs from 'fs';
import * as path from 'path';

import { renderTable } from './report';
import { RunConfig, trainEval } from './train';

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    if (argv[i].startsWith('--')) {
      args.set(argv[i].slice(2), argv[i + 1] ?? '');
      i++;
    } else {
      args.set(`_${i}`, argv[i]);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  const command = argv[0];
  if (command !== 'run') {
    process.stderr.write('usage: cli.js run --protocol within|loso --data <miec> --out <dir>\n');
    return 2;
  }
  const args = parseArgs(argv.slice(1));
  const protocol = args.get('protocol');
  const data = args.get('data');
  const out = args.get('out');
  if ((protocol !== 'within' && protocol !== 'loso') || !data || !out) {
    process.stderr.write('usage: cli.js run --protocol within|loso --data <miec> --out <dir>\n');
    return 2;
  }
  let config: Partial<RunConfig> = {};
  const configPath = args.get('config');
  if (configPath) {
    config = JSON.parse(fs.readFileSync(configPath, 'utf8'));
  }
  if (args.has('seed')) config.seed = Number(args.get('seed'));
  if (process.env.MIBCI_SEED) config.seed = Number(process.env.MIBCI_SEED);

  try {
    const report = trainEval(data, protocol, config);
    fs.mkdirSync(out, { recursive: true });
    fs.writeFileSync(path.join(out, 'report.json'), JSON.stringify(report, null, 2) + '\n');
    fs.writeFileSync(path.join(out, 'report.txt'), renderTable(report));
    process.stdout.write(renderTable(report));
    process.stdout.write(`report written to ${path.join(out, 'report.json')}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
