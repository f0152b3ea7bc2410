/**
 * Evaluation report in the shared `mibci-evalreport/1` schema, so the
 * main toolkit's `compare` command consumes these files directly.
 */

export interface MetricRow {
  subject: number;
  accuracy: number;
  precision: number;
  recall: number;
  f1: number;
  kappa: number;
  train_duration_s: number;
  mean_predict_latency_s: number;
}

export interface EvalReport {
  schema: 'mibci-evalreport/1';
  protocol: 'within' | 'loso';
  model: string;
  seed: number;
  config: Record<string, unknown>;
  rows: MetricRow[];
  mean: Record<string, number>;
  std: Record<string, number>;
}

const METRIC_FIELDS = ['accuracy', 'precision', 'recall', 'f1', 'kappa'] as const;

export function summarize(rows: MetricRow[], stdMode: 'population' | 'sample' = 'population') {
  const mean: Record<string, number> = {};
  const std: Record<string, number> = {};
  for (const field of METRIC_FIELDS) {
    const values = rows.map((r) => r[field]);
    const m = values.reduce((a, b) => a + b, 0) / values.length;
    const denom = stdMode === 'population' ? values.length : Math.max(values.length - 1, 1);
    const v = values.reduce((a, b) => a + (b - m) ** 2, 0) / denom;
    mean[field] = m;
    std[field] = Math.sqrt(v);
  }
  return { mean, std };
}

export function buildReport(
  protocol: 'within' | 'loso',
  rows: MetricRow[],
  seed: number,
  config: Record<string, unknown>,
  stdMode: 'population' | 'sample' = 'population',
): EvalReport {
  const { mean, std } = summarize(rows, stdMode);
  return {
    schema: 'mibci-evalreport/1',
    protocol,
    model: 'eegnet',
    seed,
    config,
    rows,
    mean,
    std,
  };
}

export function renderTable(report: EvalReport): string {
  const header =
    'Subj.    Acc.   Prec.    Rec.      F1   Kappa   Train s    Pred s';
  const lines = [`[${report.model} | ${report.protocol}]`, header, '-'.repeat(header.length)];
  const fmt = (v: number, w: number, d = 2) => v.toFixed(d).padStart(w);
  for (const r of report.rows) {
    lines.push(
      `S${String(r.subject).padEnd(5)}${fmt(r.accuracy, 8)}${fmt(r.precision, 8)}` +
        `${fmt(r.recall, 8)}${fmt(r.f1, 8)}${fmt(r.kappa, 8)}` +
        `${fmt(r.train_duration_s, 10, 3)}${fmt(r.mean_predict_latency_s, 10, 3)}`,
    );
  }
  lines.push('-'.repeat(header.length));
  lines.push(
    'Mean  ' + METRIC_FIELDS.map((f) => fmt(report.mean[f], 8)).join(''),
  );
  lines.push(
    'Std   ' + METRIC_FIELDS.map((f) => fmt(report.std[f], 8)).join(''),
  );
  return lines.join('\n') + '\n';
}
