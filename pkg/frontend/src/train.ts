/**
 * Protocol runner: within-subject and leave-one-subject-out studies on
 * an MIEC container, with split index sets identical to the main
 * harness for the same seed.
 */

import { augmentTraining } from './augment';
import { Eegnet, EegnetConfig } from './eegnet';
import { Trial, TrialSet, readContainer, subjectsOf } from './miec';
import { asPercentages, confusion, metrics } from './metrics';
import { preprocess } from './preprocess';
import { EvalReport, MetricRow, buildReport } from './report';
import { TAG_LOSO_FOLD, TAG_WITHIN_FOLD, deriveSeed } from './rng';
import { innerSplit, losoFolds, withinSubjectSplit } from './splits';

export interface RunConfig {
  seed: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  trainFraction: number;
  sessionStandardize: boolean;
  augment: { enabled: boolean; segments: number; multiplier: number };
  earlyStop: { enabled: boolean; valFraction: number; patience: number };
  model: Partial<EegnetConfig>;
}

export const DEFAULT_RUN_CONFIG: RunConfig = {
  seed: 42,
  epochs: 300,
  batchSize: 64,
  learningRate: 1e-3,
  trainFraction: 0.8,
  sessionStandardize: true,
  augment: { enabled: true, segments: 4, multiplier: 1.0 },
  earlyStop: { enabled: true, valFraction: 0.25, patience: 20 },
  model: {},
};

export function mergeConfig(partial: Partial<RunConfig> | undefined): RunConfig {
  const base = JSON.parse(JSON.stringify(DEFAULT_RUN_CONFIG)) as RunConfig;
  if (!partial) return base;
  return {
    ...base,
    ...partial,
    augment: { ...base.augment, ...(partial.augment ?? {}) },
    earlyStop: { ...base.earlyStop, ...(partial.earlyStop ?? {}) },
    model: { ...base.model, ...(partial.model ?? {}) },
  };
}

interface FoldSpec {
  subject: number;
  train: number[];
  test: number[];
  foldSeed: bigint;
}

function foldsFor(set: TrialSet, protocol: 'within' | 'loso', cfg: RunConfig): FoldSpec[] {
  if (protocol === 'within') {
    return subjectsOf(set).map((subject) => {
      const split = withinSubjectSplit(set, subject, cfg.trainFraction, cfg.seed);
      return {
        subject,
        train: split.train,
        test: split.test,
        foldSeed: deriveSeed(cfg.seed, TAG_WITHIN_FOLD, subject),
      };
    });
  }
  return losoFolds(set).map((fold) => ({
    subject: fold.heldOut,
    train: fold.train,
    test: fold.test,
    foldSeed: deriveSeed(cfg.seed, TAG_LOSO_FOLD, fold.heldOut),
  }));
}

function runFold(set: TrialSet, fold: FoldSpec, cfg: RunConfig): MetricRow {
  const { channels, samples } = set;
  const trainTrials: Trial[] = fold.train.map((i) => set.trials[i]);
  const synthetic = cfg.augment.enabled && cfg.augment.multiplier > 0
    ? augmentTraining(trainTrials, channels, samples,
                      cfg.augment.segments, cfg.augment.multiplier, fold.foldSeed)
    : [];
  const all = trainTrials.concat(synthetic);
  const allX = all.map((t) => t.data);
  const allY = all.map((t) => t.label);

  let trainRowIdx = allX.map((_, i) => i);
  let valX: Float64Array[] | undefined;
  let valY: number[] | undefined;
  if (cfg.earlyStop.enabled) {
    // validation drawn from real rows only; synthetic rows always train
    const realLabels = trainTrials.map((t) => t.label);
    const inner = innerSplit(realLabels, cfg.earlyStop.valFraction, fold.foldSeed);
    const synthRows = allX.map((_, i) => i).slice(trainTrials.length);
    trainRowIdx = inner.train.concat(synthRows);
    valX = inner.test.map((i) => allX[i]);
    valY = inner.test.map((i) => allY[i]);
  }

  const started = Date.now();
  const net = new Eegnet({ channels, samples, ...cfg.model }, fold.foldSeed);
  net.train(
    trainRowIdx.map((i) => allX[i]),
    trainRowIdx.map((i) => allY[i]),
    {
      epochs: cfg.epochs,
      batchSize: cfg.batchSize,
      learningRate: cfg.learningRate,
      seed: deriveSeed(fold.foldSeed, 1),
      valX,
      valY,
      patience: cfg.earlyStop.enabled ? cfg.earlyStop.patience : undefined,
    },
  );
  const trainDuration = (Date.now() - started) / 1000;

  const yTrue: number[] = [];
  const yPred: number[] = [];
  const t0 = Date.now();
  for (const i of fold.test) {
    const trial = set.trials[i];
    yTrue.push(trial.label);
    yPred.push(net.predict([trial.data])[0]);
  }
  const latency = (Date.now() - t0) / 1000 / Math.max(1, fold.test.length);

  const scores = asPercentages(metrics(confusion(yTrue, yPred)));
  return {
    subject: fold.subject,
    ...scores,
    train_duration_s: trainDuration,
    mean_predict_latency_s: latency,
  };
}

export function trainEval(
  containerPath: string,
  protocol: 'within' | 'loso',
  partialConfig?: Partial<RunConfig>,
): EvalReport {
  const cfg = mergeConfig(partialConfig);
  const raw = readContainer(containerPath);
  const set = preprocess(raw, cfg.sessionStandardize);
  const rows = foldsFor(set, protocol, cfg).map((fold) => runFold(set, fold, cfg));
  return buildReport(protocol, rows, cfg.seed, {
    epochs: cfg.epochs,
    batch_size: cfg.batchSize,
    learning_rate: cfg.learningRate,
    train_fraction: cfg.trainFraction,
    session_standardize: cfg.sessionStandardize,
    augment: cfg.augment,
    early_stop: cfg.earlyStop,
    model: cfg.model,
  });
}
