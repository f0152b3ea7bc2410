/**
 * Segmentation-and-recombination augmentation, class-preserving, with
 * the same donor stream as the main toolkit (docs/FORMATS.md).
 */

import { Trial } from './miec';
import { PURPOSE_AUGMENT, SplitMix64, deriveSeed } from './rng';

export function segmentBounds(samples: number, k: number): Array<[number, number]> {
  if (k < 1 || k > samples) throw new Error(`need 1 <= k <= samples, got k=${k}`);
  const base = Math.floor(samples / k);
  const rem = samples % k;
  const bounds: Array<[number, number]> = [];
  let start = 0;
  for (let i = 0; i < k; i++) {
    const end = start + base + (i < rem ? 1 : 0);
    bounds.push([start, end]);
    start = end;
  }
  return bounds;
}

export function srAugmentClass(
  classTrials: Trial[],
  channels: number,
  samples: number,
  segments: number,
  multiplier: number,
  seed: bigint | number,
): Trial[] {
  if (classTrials.length === 0) throw new Error('cannot augment an empty class');
  const label = classTrials[0].label;
  const m = classTrials.length;
  const nSynth = Math.floor(multiplier * m);
  const bounds = segmentBounds(samples, segments);
  const rng = new SplitMix64(deriveSeed(seed, PURPOSE_AUGMENT, label));

  const out: Trial[] = [];
  for (let i = 0; i < nSynth; i++) {
    const data = new Float64Array(channels * samples);
    for (const [s, e] of bounds) {
      const donor = classTrials[rng.randBelow(m)];
      for (let c = 0; c < channels; c++) {
        for (let t = s; t < e; t++) data[c * samples + t] = donor.data[c * samples + t];
      }
    }
    out.push({ data, label, subject: classTrials[0].subject, session: classTrials[0].session });
  }
  return out;
}

export function augmentTraining(
  trainTrials: Trial[],
  channels: number,
  samples: number,
  segments: number,
  multiplier: number,
  seed: bigint | number,
): Trial[] {
  const byClass = new Map<number, Trial[]>();
  for (const t of trainTrials) {
    const arr = byClass.get(t.label) ?? [];
    arr.push(t);
    byClass.set(t.label, arr);
  }
  const synthetic: Trial[] = [];
  for (const label of [...byClass.keys()].sort((a, b) => a - b)) {
    synthetic.push(
      ...srAugmentClass(byClass.get(label)!, channels, samples, segments, multiplier, seed),
    );
  }
  return synthetic;
}
