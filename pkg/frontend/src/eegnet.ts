/**
 * Compact convolutional network for single-trial EEG classification:
 * temporal convolution, depthwise spatial convolution, separable
 * temporal convolution, average pooling, dropout, dense softmax head.
 *
 * Implemented directly on typed arrays with hand-written backprop and
 * Adam, because no trainable tensor backend is available in this
 * environment (the JS tfjs backend is far too slow for conv nets and
 * the wasm backend has no conv gradient kernels).  Gradients are
 * verified against central finite differences in the test suite.
 * Everything is deterministic for a fixed seed.
 */

import { SplitMix64 } from './rng';

export interface EegnetConfig {
  channels: number;        // electrodes (22 for the standard montage)
  samples: number;         // time points per trial (1000 at 250 Hz / 4 s)
  classes: number;         // output units (4)
  f1: number;              // temporal filters (8)
  depthMultiplier: number; // spatial filters per temporal filter (2)
  temporalKernel: number;  // length of the temporal kernel (64)
  separableKernel: number; // length of the separable temporal kernel (16)
  pool1: number;           // first average-pool width (8)
  pool2: number;           // second average-pool width (8)
  dropout: number;         // dropout probability (0.5)
  batchNorm: boolean;      // feature-map normalization after each conv block
  maxNormDepthwise: number | null; // L2 clip per spatial filter (1.0)
  maxNormDense: number | null;     // L2 clip per output unit (0.25)
}

export const DEFAULT_CONFIG: EegnetConfig = {
  channels: 22,
  samples: 1000,
  classes: 4,
  f1: 8,
  depthMultiplier: 2,
  temporalKernel: 64,
  separableKernel: 16,
  pool1: 8,
  pool2: 8,
  dropout: 0.5,
  batchNorm: true,
  maxNormDepthwise: 1.0,
  maxNormDense: 0.25,
};

class Param {
  value: Float64Array;
  grad: Float64Array;
  m: Float64Array;
  v: Float64Array;

  constructor(size: number) {
    this.value = new Float64Array(size);
    this.grad = new Float64Array(size);
    this.m = new Float64Array(size);
    this.v = new Float64Array(size);
  }
}

class BatchNorm {
  gamma: Param;
  beta: Param;
  runMean: Float64Array;
  runVar: Float64Array;
  // per-batch caches
  mean: Float64Array;
  variance: Float64Array;
  xhat: Float64Array | null = null;
  readonly eps = 1e-5;
  readonly momentum = 0.9;

  constructor(public maps: number) {
    this.gamma = new Param(maps);
    this.gamma.value.fill(1);
    this.beta = new Param(maps);
    this.runMean = new Float64Array(maps);
    this.runVar = new Float64Array(maps);
    this.runVar.fill(1);
    this.mean = new Float64Array(maps);
    this.variance = new Float64Array(maps);
  }

  /** x laid out as (batch, maps, inner); normalized in place per map. */
  forward(x: Float64Array, batch: number, inner: number, train: boolean): Float64Array {
    const out = new Float64Array(x.length);
    const xhat = train ? new Float64Array(x.length) : null;
    const count = batch * inner;
    for (let g = 0; g < this.maps; g++) {
      let mean: number;
      let variance: number;
      if (train) {
        let sum = 0;
        for (let b = 0; b < batch; b++) {
          const base = (b * this.maps + g) * inner;
          for (let i = 0; i < inner; i++) sum += x[base + i];
        }
        mean = sum / count;
        let sq = 0;
        for (let b = 0; b < batch; b++) {
          const base = (b * this.maps + g) * inner;
          for (let i = 0; i < inner; i++) {
            const d = x[base + i] - mean;
            sq += d * d;
          }
        }
        variance = sq / count;
        this.mean[g] = mean;
        this.variance[g] = variance;
        this.runMean[g] = this.momentum * this.runMean[g] + (1 - this.momentum) * mean;
        this.runVar[g] = this.momentum * this.runVar[g] + (1 - this.momentum) * variance;
      } else {
        mean = this.runMean[g];
        variance = this.runVar[g];
      }
      const inv = 1 / Math.sqrt(variance + this.eps);
      const gamma = this.gamma.value[g];
      const beta = this.beta.value[g];
      for (let b = 0; b < batch; b++) {
        const base = (b * this.maps + g) * inner;
        for (let i = 0; i < inner; i++) {
          const h = (x[base + i] - mean) * inv;
          if (xhat) xhat[base + i] = h;
          out[base + i] = gamma * h + beta;
        }
      }
    }
    this.xhat = xhat;
    return out;
  }

  backward(dy: Float64Array, batch: number, inner: number): Float64Array {
    const xhat = this.xhat!;
    const dx = new Float64Array(dy.length);
    const count = batch * inner;
    for (let g = 0; g < this.maps; g++) {
      let dGamma = 0;
      let dBeta = 0;
      for (let b = 0; b < batch; b++) {
        const base = (b * this.maps + g) * inner;
        for (let i = 0; i < inner; i++) {
          dGamma += dy[base + i] * xhat[base + i];
          dBeta += dy[base + i];
        }
      }
      this.gamma.grad[g] += dGamma;
      this.beta.grad[g] += dBeta;
      const inv = this.gamma.value[g] / Math.sqrt(this.variance[g] + this.eps);
      const mDy = dBeta / count;
      const mDyXhat = dGamma / count;
      for (let b = 0; b < batch; b++) {
        const base = (b * this.maps + g) * inner;
        for (let i = 0; i < inner; i++) {
          dx[base + i] = inv * (dy[base + i] - mDy - xhat[base + i] * mDyXhat);
        }
      }
    }
    return dx;
  }
}

interface ForwardCache {
  batch: number;
  train: boolean;
  x: Float64Array;
  a1: Float64Array;       // post conv1 (B, F1, C, T), post-BN when enabled
  a2elu: Float64Array;    // post depthwise + BN + ELU (B, F2, T)
  p1: Float64Array;       // post pool1 (+ dropout) (B, F2, T1)
  mask1: Float64Array | null;
  z: Float64Array;        // separable depthwise output (B, F2, T1)
  a3elu: Float64Array;    // post pointwise + BN + ELU (B, F2, T1)
  p2: Float64Array;       // post pool2 (+ dropout) (B, F2, T2)
  mask2: Float64Array | null;
  probs: Float64Array;    // softmax rows (B, N)
}

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number | bigint;
  valX?: Float64Array[];
  valY?: number[];
  patience?: number;      // early stop on validation loss, when val set given
  stopAtTrainAccuracy?: number;
}

export interface EpochStats {
  epoch: number;
  loss: number;
  trainAccuracy: number;
  valLoss?: number;
}

export class Eegnet {
  readonly cfg: EegnetConfig;
  readonly f2: number;
  readonly t1: number;
  readonly t2: number;
  readonly flat: number;

  w1: Param;   // (f1, temporalKernel)
  bn1: BatchNorm;
  w2: Param;   // (f1, depthMultiplier, channels)
  bn2: BatchNorm;
  w3d: Param;  // (f2, separableKernel)
  w3p: Param;  // (f2 out, f2 in)
  bn3: BatchNorm;
  w4: Param;   // (classes, flat)
  b4: Param;   // (classes)

  private adamStep = 0;
  private dropRng: SplitMix64;

  constructor(cfg: Partial<EegnetConfig> = {}, seed: number | bigint = 0) {
    this.cfg = { ...DEFAULT_CONFIG, ...cfg };
    const c = this.cfg;
    this.f2 = c.f1 * c.depthMultiplier;
    this.t1 = Math.floor(c.samples / c.pool1);
    this.t2 = Math.floor(this.t1 / c.pool2);
    this.flat = this.f2 * this.t2;
    if (this.t2 < 1) throw new Error('input too short for the pooling cascade');

    this.w1 = new Param(c.f1 * c.temporalKernel);
    this.bn1 = new BatchNorm(c.f1);
    this.w2 = new Param(c.f1 * c.depthMultiplier * c.channels);
    this.bn2 = new BatchNorm(this.f2);
    this.w3d = new Param(this.f2 * c.separableKernel);
    this.w3p = new Param(this.f2 * this.f2);
    this.bn3 = new BatchNorm(this.f2);
    this.w4 = new Param(c.classes * this.flat);
    this.b4 = new Param(c.classes);

    const rng = new SplitMix64(seed);
    this.dropRng = new SplitMix64(rng.nextU64());
    const glorot = (arr: Float64Array, fanIn: number, fanOut: number) => {
      const limit = Math.sqrt(6 / (fanIn + fanOut));
      for (let i = 0; i < arr.length; i++) arr[i] = (2 * rng.nextFloat() - 1) * limit;
    };
    glorot(this.w1.value, c.temporalKernel, c.temporalKernel * c.f1);
    glorot(this.w2.value, c.channels, c.channels * c.depthMultiplier);
    glorot(this.w3d.value, c.separableKernel, c.separableKernel);
    glorot(this.w3p.value, this.f2, this.f2);
    glorot(this.w4.value, this.flat, c.classes);
  }

  params(): Param[] {
    const base = [this.w1, this.w2, this.w3d, this.w3p, this.w4, this.b4];
    if (this.cfg.batchNorm) {
      base.push(this.bn1.gamma, this.bn1.beta, this.bn2.gamma, this.bn2.beta,
                this.bn3.gamma, this.bn3.beta);
    }
    return base;
  }

  /** Trainable parameter count; closed form asserted in the tests. */
  countParams(): number {
    return this.params().reduce((acc, p) => acc + p.value.length, 0);
  }

  // --- forward -------------------------------------------------------------

  forward(batchX: Float64Array[], train: boolean): ForwardCache {
    const c = this.cfg;
    const B = batchX.length;
    const { f2, t1, t2, flat } = this;
    const T = c.samples;
    const C = c.channels;
    const K1 = c.temporalKernel;
    const half1 = K1 >> 1;

    const x = new Float64Array(B * C * T);
    batchX.forEach((trial, b) => x.set(trial, b * C * T));

    // temporal convolution, same padding over time
    let a1: Float64Array = new Float64Array(B * c.f1 * C * T);
    for (let b = 0; b < B; b++) {
      for (let f = 0; f < c.f1; f++) {
        const wOff = f * K1;
        for (let ch = 0; ch < C; ch++) {
          const xOff = (b * C + ch) * T;
          const yOff = ((b * c.f1 + f) * C + ch) * T;
          for (let t = 0; t < T; t++) {
            const base = t - half1;
            const lo = base < 0 ? -base : 0;
            const hi = base + K1 > T ? T - base : K1;
            let acc = 0;
            for (let k = lo; k < hi; k++) acc += this.w1.value[wOff + k] * x[xOff + base + k];
            a1[yOff + t] = acc;
          }
        }
      }
    }
    if (c.batchNorm) a1 = this.bn1.forward(a1, B, C * T, train);

    // depthwise spatial convolution across all electrodes
    let a2: Float64Array = new Float64Array(B * f2 * T);
    for (let b = 0; b < B; b++) {
      for (let f = 0; f < c.f1; f++) {
        for (let d = 0; d < c.depthMultiplier; d++) {
          const g = f * c.depthMultiplier + d;
          const w2Off = (f * c.depthMultiplier + d) * C;
          const yOff = (b * f2 + g) * T;
          for (let ch = 0; ch < C; ch++) {
            const w = this.w2.value[w2Off + ch];
            const aOff = ((b * c.f1 + f) * C + ch) * T;
            for (let t = 0; t < T; t++) a2[yOff + t] += w * a1[aOff + t];
          }
        }
      }
    }
    if (c.batchNorm) a2 = this.bn2.forward(a2, B, T, train);
    const a2elu = elu(a2);
    const p1raw = avgPool(a2elu, B * f2, T, c.pool1, t1);
    const mask1 = train && c.dropout > 0 ? this.dropoutMask(p1raw.length) : null;
    const p1 = mask1 ? hadamard(p1raw, mask1) : p1raw;

    // separable convolution: depthwise over time, then pointwise mixing
    const K2 = c.separableKernel;
    const half2 = K2 >> 1;
    const z = new Float64Array(B * f2 * t1);
    for (let b = 0; b < B; b++) {
      for (let g = 0; g < f2; g++) {
        const wOff = g * K2;
        const off = (b * f2 + g) * t1;
        for (let t = 0; t < t1; t++) {
          const base = t - half2;
          const lo = base < 0 ? -base : 0;
          const hi = base + K2 > t1 ? t1 - base : K2;
          let acc = 0;
          for (let k = lo; k < hi; k++) acc += this.w3d.value[wOff + k] * p1[off + base + k];
          z[off + t] = acc;
        }
      }
    }
    let a3: Float64Array = new Float64Array(B * f2 * t1);
    for (let b = 0; b < B; b++) {
      for (let o = 0; o < f2; o++) {
        const yOff = (b * f2 + o) * t1;
        for (let g = 0; g < f2; g++) {
          const w = this.w3p.value[o * f2 + g];
          const zOff = (b * f2 + g) * t1;
          for (let t = 0; t < t1; t++) a3[yOff + t] += w * z[zOff + t];
        }
      }
    }
    if (c.batchNorm) a3 = this.bn3.forward(a3, B, t1, train);
    const a3elu = elu(a3);
    const p2raw = avgPool(a3elu, B * f2, t1, c.pool2, t2);
    const mask2 = train && c.dropout > 0 ? this.dropoutMask(p2raw.length) : null;
    const p2 = mask2 ? hadamard(p2raw, mask2) : p2raw;

    // dense head with softmax
    const probs = new Float64Array(B * c.classes);
    for (let b = 0; b < B; b++) {
      const logits = new Float64Array(c.classes);
      for (let n = 0; n < c.classes; n++) {
        let acc = this.b4.value[n];
        const wOff = n * flat;
        const pOff = b * flat;
        for (let j = 0; j < flat; j++) acc += this.w4.value[wOff + j] * p2[pOff + j];
        logits[n] = acc;
      }
      softmaxInto(logits, probs, b * c.classes);
    }

    return { batch: B, train, x, a1, a2elu, p1, mask1, z, a3elu, p2, mask2, probs };
  }

  predictProba(batchX: Float64Array[]): Float64Array {
    return this.forward(batchX, false).probs;
  }

  predict(batchX: Float64Array[]): number[] {
    const probs = this.predictProba(batchX);
    const N = this.cfg.classes;
    const out: number[] = [];
    for (let b = 0; b < batchX.length; b++) {
      let best = 0;
      for (let n = 1; n < N; n++) {
        if (probs[b * N + n] > probs[b * N + best]) best = n;
      }
      out.push(best + 1);
    }
    return out;
  }

  // --- backward ------------------------------------------------------------

  /** Accumulates parameter gradients; returns the mean cross-entropy. */
  backward(cache: ForwardCache, labels: number[]): number {
    const c = this.cfg;
    const B = cache.batch;
    const { f2, t1, t2, flat } = this;
    const T = c.samples;
    const C = c.channels;
    const N = c.classes;

    let loss = 0;
    const dLogits = new Float64Array(B * N);
    for (let b = 0; b < B; b++) {
      const target = labels[b] - 1;
      loss -= Math.log(Math.max(cache.probs[b * N + target], 1e-300));
      for (let n = 0; n < N; n++) {
        dLogits[b * N + n] = (cache.probs[b * N + n] - (n === target ? 1 : 0)) / B;
      }
    }
    loss /= B;

    // dense head
    const dP2 = new Float64Array(B * flat);
    for (let b = 0; b < B; b++) {
      for (let n = 0; n < N; n++) {
        const g = dLogits[b * N + n];
        this.b4.grad[n] += g;
        const wOff = n * flat;
        const pOff = b * flat;
        for (let j = 0; j < flat; j++) {
          this.w4.grad[wOff + j] += g * cache.p2[pOff + j];
          dP2[pOff + j] += g * this.w4.value[wOff + j];
        }
      }
    }

    let dA3elu = avgPoolBackward(
      cache.mask2 ? hadamard(dP2, cache.mask2) : dP2, B * f2, t1, c.pool2, t2,
    );
    dA3elu = eluBackward(dA3elu, cache.a3elu);
    const dA3 = c.batchNorm ? this.bn3.backward(dA3elu, B, t1) : dA3elu;

    // pointwise, then separable depthwise
    const dZ = new Float64Array(B * f2 * t1);
    for (let b = 0; b < B; b++) {
      for (let o = 0; o < f2; o++) {
        const dOff = (b * f2 + o) * t1;
        for (let g = 0; g < f2; g++) {
          const zOff = (b * f2 + g) * t1;
          const wIdx = o * f2 + g;
          let acc = 0;
          const w = this.w3p.value[wIdx];
          for (let t = 0; t < t1; t++) {
            acc += dA3[dOff + t] * cache.z[zOff + t];
            dZ[zOff + t] += dA3[dOff + t] * w;
          }
          this.w3p.grad[wIdx] += acc;
        }
      }
    }
    const K2 = c.separableKernel;
    const half2 = K2 >> 1;
    const dP1 = new Float64Array(B * f2 * t1);
    for (let b = 0; b < B; b++) {
      for (let g = 0; g < f2; g++) {
        const wOff = g * K2;
        const off = (b * f2 + g) * t1;
        for (let t = 0; t < t1; t++) {
          const base = t - half2;
          const lo = base < 0 ? -base : 0;
          const hi = base + K2 > t1 ? t1 - base : K2;
          const d = dZ[off + t];
          for (let k = lo; k < hi; k++) {
            this.w3d.grad[wOff + k] += d * cache.p1[off + base + k];
            dP1[off + base + k] += d * this.w3d.value[wOff + k];
          }
        }
      }
    }

    let dA2elu = avgPoolBackward(
      cache.mask1 ? hadamard(dP1, cache.mask1) : dP1, B * f2, T, c.pool1, t1,
    );
    dA2elu = eluBackward(dA2elu, cache.a2elu);
    const dA2 = c.batchNorm ? this.bn2.backward(dA2elu, B, T) : dA2elu;

    // depthwise spatial conv
    const dA1 = new Float64Array(B * c.f1 * C * T);
    for (let b = 0; b < B; b++) {
      for (let f = 0; f < c.f1; f++) {
        for (let d = 0; d < c.depthMultiplier; d++) {
          const g = f * c.depthMultiplier + d;
          const w2Off = (f * c.depthMultiplier + d) * C;
          const dOff = (b * f2 + g) * T;
          for (let ch = 0; ch < C; ch++) {
            const aOff = ((b * c.f1 + f) * C + ch) * T;
            const w = this.w2.value[w2Off + ch];
            let acc = 0;
            for (let t = 0; t < T; t++) {
              acc += dA2[dOff + t] * cache.a1[aOff + t];
              dA1[aOff + t] += dA2[dOff + t] * w;
            }
            this.w2.grad[w2Off + ch] += acc;
          }
        }
      }
    }
    const dA1pre = c.batchNorm ? this.bn1.backward(dA1, B, C * T) : dA1;

    // temporal conv weight gradients (no input gradient needed)
    const K1 = c.temporalKernel;
    const half1 = K1 >> 1;
    for (let b = 0; b < B; b++) {
      for (let f = 0; f < c.f1; f++) {
        const wOff = f * K1;
        for (let ch = 0; ch < C; ch++) {
          const xOff = (b * C + ch) * T;
          const dOff = ((b * c.f1 + f) * C + ch) * T;
          for (let t = 0; t < T; t++) {
            const base = t - half1;
            const lo = base < 0 ? -base : 0;
            const hi = base + K1 > T ? T - base : K1;
            const d = dA1pre[dOff + t];
            if (d === 0) continue;
            for (let k = lo; k < hi; k++) {
              this.w1.grad[wOff + k] += d * cache.x[xOff + base + k];
            }
          }
        }
      }
    }
    return loss;
  }

  // --- optimization ----------------------------------------------------------

  zeroGrads(): void {
    for (const p of this.params()) p.grad.fill(0);
  }

  adamUpdate(lr: number): void {
    this.adamStep += 1;
    const b1 = 0.9;
    const b2 = 0.999;
    const eps = 1e-8;
    const c1 = 1 - Math.pow(b1, this.adamStep);
    const c2 = 1 - Math.pow(b2, this.adamStep);
    for (const p of this.params()) {
      for (let i = 0; i < p.value.length; i++) {
        const g = p.grad[i];
        p.m[i] = b1 * p.m[i] + (1 - b1) * g;
        p.v[i] = b2 * p.v[i] + (1 - b2) * g * g;
        p.value[i] -= (lr * (p.m[i] / c1)) / (Math.sqrt(p.v[i] / c2) + eps);
      }
    }
    this.applyMaxNorms();
  }

  private applyMaxNorms(): void {
    const c = this.cfg;
    if (c.maxNormDepthwise !== null) {
      const C = c.channels;
      for (let fd = 0; fd < c.f1 * c.depthMultiplier; fd++) {
        let sq = 0;
        for (let ch = 0; ch < C; ch++) sq += this.w2.value[fd * C + ch] ** 2;
        const norm = Math.sqrt(sq);
        if (norm > c.maxNormDepthwise) {
          const scale = c.maxNormDepthwise / norm;
          for (let ch = 0; ch < C; ch++) this.w2.value[fd * C + ch] *= scale;
        }
      }
    }
    if (c.maxNormDense !== null) {
      for (let n = 0; n < c.classes; n++) {
        let sq = 0;
        for (let j = 0; j < this.flat; j++) sq += this.w4.value[n * this.flat + j] ** 2;
        const norm = Math.sqrt(sq);
        if (norm > c.maxNormDense) {
          const scale = c.maxNormDense / norm;
          for (let j = 0; j < this.flat; j++) this.w4.value[n * this.flat + j] *= scale;
        }
      }
    }
  }

  private dropoutMask(size: number): Float64Array {
    const p = this.cfg.dropout;
    const keepInv = 1 / (1 - p);
    const mask = new Float64Array(size);
    for (let i = 0; i < size; i++) mask[i] = this.dropRng.nextFloat() >= p ? keepInv : 0;
    return mask;
  }

  meanLoss(batchX: Float64Array[], labels: number[]): number {
    const probs = this.predictProba(batchX);
    const N = this.cfg.classes;
    let loss = 0;
    for (let b = 0; b < batchX.length; b++) {
      loss -= Math.log(Math.max(probs[b * N + labels[b] - 1], 1e-300));
    }
    return loss / batchX.length;
  }

  accuracy(batchX: Float64Array[], labels: number[]): number {
    const pred = this.predict(batchX);
    let hits = 0;
    for (let i = 0; i < labels.length; i++) if (pred[i] === labels[i]) hits += 1;
    return hits / labels.length;
  }

  /** Minibatch training with seeded shuffles and optional early stopping. */
  train(trainX: Float64Array[], trainY: number[], opts: TrainOptions): EpochStats[] {
    const order = trainX.map((_, i) => i);
    const shuffleRng = new SplitMix64(opts.seed);
    const history: EpochStats[] = [];
    let bestValLoss = Infinity;
    let sinceBest = 0;

    for (let epoch = 1; epoch <= opts.epochs; epoch++) {
      shuffleRng.shuffle(order);
      let epochLoss = 0;
      let batches = 0;
      for (let start = 0; start < order.length; start += opts.batchSize) {
        const idx = order.slice(start, start + opts.batchSize);
        const bx = idx.map((i) => trainX[i]);
        const by = idx.map((i) => trainY[i]);
        this.zeroGrads();
        const cache = this.forward(bx, true);
        epochLoss += this.backward(cache, by);
        batches += 1;
        this.adamUpdate(opts.learningRate);
      }
      const stats: EpochStats = {
        epoch,
        loss: epochLoss / batches,
        trainAccuracy: this.accuracy(trainX, trainY),
      };
      if (opts.valX && opts.valX.length > 0) {
        stats.valLoss = this.meanLoss(opts.valX, opts.valY!);
        if (stats.valLoss < bestValLoss - 1e-6) {
          bestValLoss = stats.valLoss;
          sinceBest = 0;
        } else {
          sinceBest += 1;
        }
      }
      history.push(stats);
      if (opts.stopAtTrainAccuracy !== undefined &&
          stats.trainAccuracy >= opts.stopAtTrainAccuracy) break;
      if (opts.patience !== undefined && sinceBest >= opts.patience) break;
    }
    return history;
  }
}

// --- small pure helpers -------------------------------------------------------

function elu(x: Float64Array): Float64Array {
  const out = new Float64Array(x.length);
  for (let i = 0; i < x.length; i++) out[i] = x[i] > 0 ? x[i] : Math.exp(x[i]) - 1;
  return out;
}

function eluBackward(dy: Float64Array, y: Float64Array): Float64Array {
  const dx = new Float64Array(dy.length);
  for (let i = 0; i < dy.length; i++) dx[i] = dy[i] * (y[i] > 0 ? 1 : y[i] + 1);
  return dx;
}

function avgPool(x: Float64Array, rows: number, width: number, pool: number,
                 outWidth: number): Float64Array {
  const out = new Float64Array(rows * outWidth);
  for (let r = 0; r < rows; r++) {
    for (let t = 0; t < outWidth; t++) {
      let acc = 0;
      const base = r * width + t * pool;
      for (let k = 0; k < pool; k++) acc += x[base + k];
      out[r * outWidth + t] = acc / pool;
    }
  }
  return out;
}

function avgPoolBackward(dy: Float64Array, rows: number, width: number, pool: number,
                         outWidth: number): Float64Array {
  const dx = new Float64Array(rows * width);
  for (let r = 0; r < rows; r++) {
    for (let t = 0; t < outWidth; t++) {
      const d = dy[r * outWidth + t] / pool;
      const base = r * width + t * pool;
      for (let k = 0; k < pool; k++) dx[base + k] = d;
    }
  }
  return dx;
}

function hadamard(a: Float64Array, b: Float64Array): Float64Array {
  const out = new Float64Array(a.length);
  for (let i = 0; i < a.length; i++) out[i] = a[i] * b[i];
  return out;
}

function softmaxInto(logits: Float64Array, target: Float64Array, offset: number): void {
  let max = -Infinity;
  for (const v of logits) if (v > max) max = v;
  let sum = 0;
  for (let i = 0; i < logits.length; i++) {
    const e = Math.exp(logits[i] - max);
    target[offset + i] = e;
    sum += e;
  }
  for (let i = 0; i < logits.length; i++) target[offset + i] /= sum;
}

/** Closed-form trainable parameter count for a config (tests pin this). */
export function analyticParamCount(cfg: EegnetConfig): number {
  const f2 = cfg.f1 * cfg.depthMultiplier;
  const t2 = Math.floor(Math.floor(cfg.samples / cfg.pool1) / cfg.pool2);
  const flat = f2 * t2;
  let count =
    cfg.f1 * cfg.temporalKernel +          // temporal conv
    cfg.f1 * cfg.depthMultiplier * cfg.channels + // depthwise spatial conv
    f2 * cfg.separableKernel +             // separable: depthwise stage
    f2 * f2 +                              // separable: pointwise stage
    cfg.classes * flat + cfg.classes;      // dense head
  if (cfg.batchNorm) count += 2 * cfg.f1 + 2 * f2 + 2 * f2;
  return count;
}
