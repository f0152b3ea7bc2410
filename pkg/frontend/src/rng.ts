/**
 * SplitMix64 stream, bit-identical to the Python toolkit (docs/FORMATS.md).
 * Everything that must reproduce the main harness's index sets (splits,
 * augmentation donors) runs on this generator.
 */

const MASK = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;

export function mix64(z: bigint): bigint {
  z &= MASK;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
  return z ^ (z >> 31n);
}

export function deriveSeed(base: bigint | number, ...parts: Array<bigint | number>): bigint {
  let h = BigInt(base) & MASK;
  for (const p of parts) {
    h = mix64(((h ^ mix64(BigInt(p))) + GAMMA) & MASK);
  }
  return h;
}

/** Stream purpose tags shared with the Python side. */
export const PURPOSE_OUTER_SPLIT = 2;
export const PURPOSE_INNER_SPLIT = 3;
export const PURPOSE_AUGMENT = 4;
export const TAG_WITHIN_FOLD = 11;
export const TAG_LOSO_FOLD = 12;

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint | number) {
    this.state = BigInt(seed) & MASK;
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK;
    return mix64(this.state);
  }

  /** Uniform integer in [0, n); 64-bit modulo, bias documented as accepted. */
  randBelow(n: number): number {
    if (n <= 0) throw new Error(`randBelow requires n >= 1, got ${n}`);
    return Number(this.nextU64() % BigInt(n));
  }

  /** Uniform float in [0, 1) with 53 random bits. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  /** In-place Fisher-Yates shuffle, high index first. */
  shuffle<T>(items: T[]): void {
    for (let i = items.length - 1; i > 0; i--) {
      const j = this.randBelow(i + 1);
      const tmp = items[i];
      items[i] = items[j];
      items[j] = tmp;
    }
  }
}
