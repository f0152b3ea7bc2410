/**
 * Multiclass agreement metrics; same formulas and conventions as the
 * main toolkit (fractions internally, percentages in report rows).
 */

export function confusion(yTrue: number[], yPred: number[], nClasses = 4): number[][] {
  if (yTrue.length !== yPred.length) {
    throw new Error(`length mismatch: ${yTrue.length} true vs ${yPred.length} predicted`);
  }
  const cm = Array.from({ length: nClasses }, () => new Array<number>(nClasses).fill(0));
  for (let i = 0; i < yTrue.length; i++) {
    const t = yTrue[i];
    const p = yPred[i];
    if (t < 1 || t > nClasses || p < 1 || p > nClasses) {
      throw new Error(`labels must lie in [1, ${nClasses}]`);
    }
    cm[t - 1][p - 1] += 1;
  }
  return cm;
}

export interface MetricValues {
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  kappa: number;
}

export function metrics(cm: number[][]): MetricValues {
  const n = cm.length;
  let total = 0;
  let diag = 0;
  const row = new Array<number>(n).fill(0);
  const col = new Array<number>(n).fill(0);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      total += cm[i][j];
      row[i] += cm[i][j];
      col[j] += cm[i][j];
    }
    diag += cm[i][i];
  }
  if (total <= 0) throw new Error('empty confusion matrix');

  const accuracy = diag / total;
  let precision = 0;
  let recall = 0;
  let f1 = 0;
  for (let c = 0; c < n; c++) {
    const p = col[c] > 0 ? cm[c][c] / col[c] : 0;
    const r = row[c] > 0 ? cm[c][c] / row[c] : 0;
    precision += p;
    recall += r;
    f1 += p + r > 0 ? (2 * p * r) / (p + r) : 0;
  }
  precision /= n;
  recall /= n;
  f1 /= n;

  let pe = 0;
  for (let c = 0; c < n; c++) pe += row[c] * col[c];
  pe /= total * total;
  if (pe >= 1) throw new Error('kappa is undefined: expected agreement is 1');
  const kappa = (accuracy - pe) / (1 - pe);
  return { accuracy, precision, recall, f1, kappa };
}

export function asPercentages(m: MetricValues): MetricValues {
  return {
    accuracy: m.accuracy * 100,
    precision: m.precision * 100,
    recall: m.recall * 100,
    f1: m.f1 * 100,
    kappa: m.kappa * 100,
  };
}
