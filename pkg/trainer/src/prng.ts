/** Mulberry32 stream: small, fast, and deterministic across platforms.
 * One instance drives both weight init and batch sampling for a run. */
export class Rng {
  private s: number;

  constructor(seed: number) {
    this.s = seed | 0;
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.s = (this.s + 0x6d2b79f5) | 0;
    let t = Math.imul(this.s ^ (this.s >>> 15), 1 | this.s);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  /** Uniform integer in [0, bound). */
  int(bound: number): number {
    if (bound < 1) {
      throw new RangeError(`int() bound must be >= 1, got ${bound}`);
    }
    return Math.floor(this.next() * bound);
  }

  /** Gaussian sample by Box-Muller; u1 is shifted into (0, 1] so log stays finite. */
  gauss(mean = 0, std = 1): number {
    const u1 = 1 - this.next();
    const u2 = this.next();
    return mean + std * Math.sqrt(-2 * Math.log(u1)) * Math.cos(2 * Math.PI * u2);
  }
}
