/**
 * Label-free trial normalization matching the main toolkit's defaults:
 * per-session channel standardization followed by per-trial z-scoring.
 */

import { Trial, TrialSet } from './miec';

export function sessionStandardize(set: TrialSet): TrialSet {
  const groups = new Map<string, number[]>();
  set.trials.forEach((t, i) => {
    const key = `${t.subject}:${t.session}`;
    const arr = groups.get(key) ?? [];
    arr.push(i);
    groups.set(key, arr);
  });

  const out: Trial[] = set.trials.map((t) => ({ ...t, data: new Float64Array(t.data) }));
  const { channels, samples } = set;
  for (const indices of groups.values()) {
    for (let c = 0; c < channels; c++) {
      let sum = 0;
      let sumSq = 0;
      const n = indices.length * samples;
      for (const i of indices) {
        const d = set.trials[i].data;
        for (let s = 0; s < samples; s++) {
          const v = d[c * samples + s];
          sum += v;
          sumSq += v * v;
        }
      }
      const mean = sum / n;
      const std = Math.sqrt(Math.max(sumSq / n - mean * mean, 0));
      if (std === 0) throw new Error(`zero-variance channel ${c} in a session block`);
      for (const i of indices) {
        const d = out[i].data;
        for (let s = 0; s < samples; s++) {
          d[c * samples + s] = (d[c * samples + s] - mean) / std;
        }
      }
    }
  }
  return { ...set, trials: out };
}

export function zscoreTrial(trial: Trial, channels: number, samples: number): Trial {
  const data = new Float64Array(trial.data.length);
  for (let c = 0; c < channels; c++) {
    let sum = 0;
    let sumSq = 0;
    for (let s = 0; s < samples; s++) {
      const v = trial.data[c * samples + s];
      sum += v;
      sumSq += v * v;
    }
    const mean = sum / samples;
    const std = Math.sqrt(Math.max(sumSq / samples - mean * mean, 0));
    if (std === 0) throw new Error(`zero-variance channel ${c} cannot be z-scored`);
    for (let s = 0; s < samples; s++) {
      data[c * samples + s] = (trial.data[c * samples + s] - mean) / std;
    }
  }
  return { ...trial, data };
}

export function preprocess(set: TrialSet, standardizeSessions = true): TrialSet {
  const staged = standardizeSessions ? sessionStandardize(set) : set;
  return {
    ...staged,
    trials: staged.trials.map((t) => zscoreTrial(t, set.channels, set.samples)),
  };
}
