import * as fs from 'fs';
import * as path from 'path';

import { describe, expect, it } from 'vitest';

import { readContainer } from '../src/miec';
import { innerSplit, losoFolds, withinSubjectSplit } from '../src/splits';

const FIXTURES = path.resolve(__dirname, '../../fixtures');

interface Golden {
  container: string;
  seed: number;
  train_fraction: number;
  within: Record<string, { train: number[]; test: number[] }>;
  loso: Array<{ held_out: number; train: number[]; test: number[] }>;
}

const golden: Golden = JSON.parse(
  fs.readFileSync(path.join(FIXTURES, 'splits_golden.json'), 'utf8'),
);
const set = readContainer(path.join(FIXTURES, golden.container));

describe('split-index parity with the Python harness', () => {
  it('reproduces every within-subject split bit for bit', () => {
    for (const [subject, expected] of Object.entries(golden.within)) {
      const split = withinSubjectSplit(
        set, Number(subject), golden.train_fraction, golden.seed,
      );
      expect(split.train, `subject ${subject} train`).toEqual(expected.train);
      expect(split.test, `subject ${subject} test`).toEqual(expected.test);
    }
  });

  it('reproduces the leave-one-subject-out folds', () => {
    const folds = losoFolds(set);
    expect(folds.length).toBe(golden.loso.length);
    folds.forEach((fold, i) => {
      expect(fold.heldOut).toBe(golden.loso[i].held_out);
      expect(fold.train).toEqual(golden.loso[i].train);
      expect(fold.test).toEqual(golden.loso[i].test);
    });
  });

  it('keeps train and test disjoint and stratified', () => {
    const split = withinSubjectSplit(set, 3, 0.8, 7);
    const train = new Set(split.train);
    for (const i of split.test) expect(train.has(i)).toBe(false);
    const counts = new Map<number, number>();
    for (const i of split.train) {
      const label = set.trials[i].label;
      counts.set(label, (counts.get(label) ?? 0) + 1);
    }
    // 4 trials per class, floor(0.8 * 4) = 3 per class in train
    expect([...counts.values()]).toEqual([3, 3, 3, 3]);
  });

  it('inner split is stratified and deterministic', () => {
    const labels = [1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4];
    const a = innerSplit(labels, 0.25, 99n);
    const b = innerSplit(labels, 0.25, 99n);
    expect(a).toEqual(b);
    expect(a.train.length).toBe(12);
    expect(a.test.length).toBe(4);
  });
});
