/**
 * Train/test index sets, bit-identical to the main harness for the same
 * seed (shuffle algorithm and seed derivation in docs/FORMATS.md).
 */

import { TrialSet, subjectsOf } from './miec';
import { PURPOSE_OUTER_SPLIT, SplitMix64, deriveSeed } from './rng';

export interface Split {
  train: number[];
  test: number[];
}

export function withinSubjectSplit(
  set: TrialSet,
  subject: number,
  trainFraction: number,
  seed: number,
  sessions?: number[],
): Split {
  const keep = sessions ? new Set(sessions) : null;
  const byClass = new Map<number, number[]>();
  set.trials.forEach((t, i) => {
    if (t.subject !== subject) return;
    if (keep && !keep.has(t.session)) return;
    const arr = byClass.get(t.label) ?? [];
    arr.push(i);
    byClass.set(t.label, arr);
  });
  if (byClass.size === 0) throw new Error(`subject ${subject} has no trials`);

  const train: number[] = [];
  const test: number[] = [];
  for (const label of [...byClass.keys()].sort((a, b) => a - b)) {
    const indices = byClass.get(label)!;
    if (indices.length < 2) {
      throw new Error(
        `subject ${subject} class ${label} has ${indices.length} trial(s); need at least 2`,
      );
    }
    const rng = new SplitMix64(deriveSeed(seed, PURPOSE_OUTER_SPLIT, subject, label));
    rng.shuffle(indices);
    const nTrain = Math.floor(trainFraction * indices.length);
    train.push(...indices.slice(0, nTrain));
    test.push(...indices.slice(nTrain));
  }
  train.sort((a, b) => a - b);
  test.sort((a, b) => a - b);
  return { train, test };
}

export interface LosoFold {
  heldOut: number;
  train: number[];
  test: number[];
}

export function losoFolds(set: TrialSet): LosoFold[] {
  const subjects = subjectsOf(set);
  if (subjects.length < 2) {
    throw new Error(`leave-one-subject-out needs >= 2 subjects, got ${subjects.length}`);
  }
  return subjects.map((heldOut) => {
    const train: number[] = [];
    const test: number[] = [];
    set.trials.forEach((t, i) => {
      (t.subject === heldOut ? test : train).push(i);
    });
    return { heldOut, train, test };
  });
}

/** Stratified inner split of training rows (early-stopping validation). */
export function innerSplit(
  labels: number[],
  valFraction: number,
  seed: bigint | number,
): Split {
  const byClass = new Map<number, number[]>();
  labels.forEach((label, i) => {
    const arr = byClass.get(label) ?? [];
    arr.push(i);
    byClass.set(label, arr);
  });
  const train: number[] = [];
  const val: number[] = [];
  for (const label of [...byClass.keys()].sort((a, b) => a - b)) {
    const rows = byClass.get(label)!;
    const rng = new SplitMix64(deriveSeed(seed, 3, label));
    rng.shuffle(rows);
    const nTrain = Math.floor((1 - valFraction) * rows.length);
    train.push(...rows.slice(0, nTrain));
    val.push(...rows.slice(nTrain));
  }
  train.sort((a, b) => a - b);
  val.sort((a, b) => a - b);
  return { train, test: val };
}
