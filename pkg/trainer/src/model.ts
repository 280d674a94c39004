/**
 * A small decoder-only transformer with hand-written forward and backward
 * passes over flat Float64Arrays. No autograd graph: every activation the
 * backward pass needs is cached in buffers sized once, in the constructor,
 * for the maximum context length.
 *
 * Layout conventions: weight matrices are row-major [out][in]; per-sequence
 * activations are time-major [t][dim]. Buffers are reused across calls, so a
 * backward pass is only valid right after its own forward pass.
 */
import { Rng } from "./prng";

export interface ModelConfig {
  vocabSize: number;
  layers: number;
  heads: number;
  embed: number;
  context: number;
}

export interface Tensor {
  name: string;
  rows: number;
  cols: number;
  w: Float64Array;
  g: Float64Array;
}

const INIT_STD = 0.08;
const NORM_EPS = 1e-5;

function makeTensor(name: string, rows: number, cols: number, rng: Rng): Tensor {
  const w = new Float64Array(rows * cols);
  for (let i = 0; i < w.length; i++) w[i] = rng.gauss(0, INIT_STD);
  return { name, rows, cols, w, g: new Float64Array(rows * cols) };
}

/** y[yo..yo+rows) = W @ x[xo..xo+cols) */
function matvec(t: Tensor, x: Float64Array, xo: number, y: Float64Array, yo: number): void {
  const { rows, cols, w } = t;
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    const base = r * cols;
    for (let c = 0; c < cols; c++) acc += w[base + c] * x[xo + c];
    y[yo + r] = acc;
  }
}

/** Backward of matvec: t.g += dy ⊗ x and dx[dxo..+cols) += W^T @ dy. */
function matvecGrad(
  t: Tensor,
  x: Float64Array,
  xo: number,
  dy: Float64Array,
  dyo: number,
  dx: Float64Array,
  dxo: number,
): void {
  const { rows, cols, w, g } = t;
  for (let r = 0; r < rows; r++) {
    const d = dy[dyo + r];
    if (d === 0) continue;
    const base = r * cols;
    for (let c = 0; c < cols; c++) {
      g[base + c] += d * x[xo + c];
      dx[dxo + c] += w[base + c] * d;
    }
  }
}

/** y = x / rms(x); returns the cached inverse rms for the backward pass. */
function rmsnorm(x: Float64Array, xo: number, y: Float64Array, yo: number, n: number): number {
  let ms = 0;
  for (let i = 0; i < n; i++) ms += x[xo + i] * x[xo + i];
  const inv = 1 / Math.sqrt(ms / n + NORM_EPS);
  for (let i = 0; i < n; i++) y[yo + i] = x[xo + i] * inv;
  return inv;
}

/** dx += d(rmsnorm)/dx applied to dy, given the forward's inverse rms. */
function rmsnormGrad(
  x: Float64Array,
  xo: number,
  dy: Float64Array,
  dyo: number,
  dx: Float64Array,
  dxo: number,
  n: number,
  inv: number,
): void {
  let dot = 0;
  for (let i = 0; i < n; i++) dot += dy[dyo + i] * x[xo + i];
  const k = (inv * inv * inv * dot) / n;
  for (let i = 0; i < n; i++) dx[dxo + i] += inv * dy[dyo + i] - k * x[xo + i];
}

interface LayerWeights {
  wq: Tensor;
  wk: Tensor;
  wv: Tensor;
  wo: Tensor;
  fc1: Tensor;
  fc2: Tensor;
}

interface LayerCache {
  xin: Float64Array; // block input, T*E
  an: Float64Array; // normed attention input
  aInv: Float64Array; // inverse rms per position
  q: Float64Array;
  k: Float64Array;
  v: Float64Array;
  attw: Float64Array; // attention weights, H*T*T
  ao: Float64Array; // concatenated head outputs
  xmid: Float64Array; // after the attention residual
  bn: Float64Array; // normed mlp input
  bInv: Float64Array;
  h1: Float64Array; // post-relu hidden, T*4E
}

export class Gpt {
  readonly cfg: ModelConfig;
  readonly tensors: Tensor[];

  private wte: Tensor;
  private wpe: Tensor;
  private lmHead: Tensor;
  private layers: LayerWeights[];

  private emb: Float64Array; // token+position embedding before the norm
  private embInv: Float64Array;
  private caches: LayerCache[];
  private xf: Float64Array; // final hidden states, input to lmHead

  // backward scratch
  private dx: Float64Array;
  private dan: Float64Array;
  private dq: Float64Array;
  private dk: Float64Array;
  private dv: Float64Array;
  private dao: Float64Array;
  private dh1: Float64Array;
  private dbn: Float64Array;
  private row: Float64Array; // one logits/dlogits row, V wide
  private da: Float64Array; // attention score scratch, T wide

  constructor(cfg: ModelConfig, rng: Rng) {
    if (cfg.embed % cfg.heads !== 0) {
      throw new RangeError(`embed ${cfg.embed} must be divisible by heads ${cfg.heads}`);
    }
    this.cfg = cfg;
    const { vocabSize: V, embed: E, context: T, layers: L, heads: H } = cfg;

    this.wte = makeTensor("wte", V, E, rng);
    this.wpe = makeTensor("wpe", T, E, rng);
    this.layers = [];
    for (let l = 0; l < L; l++) {
      this.layers.push({
        wq: makeTensor(`layer${l}.wq`, E, E, rng),
        wk: makeTensor(`layer${l}.wk`, E, E, rng),
        wv: makeTensor(`layer${l}.wv`, E, E, rng),
        wo: makeTensor(`layer${l}.wo`, E, E, rng),
        fc1: makeTensor(`layer${l}.fc1`, 4 * E, E, rng),
        fc2: makeTensor(`layer${l}.fc2`, E, 4 * E, rng),
      });
    }
    this.lmHead = makeTensor("lm_head", V, E, rng);
    this.tensors = [this.wte, this.wpe];
    for (const lw of this.layers) {
      this.tensors.push(lw.wq, lw.wk, lw.wv, lw.wo, lw.fc1, lw.fc2);
    }
    this.tensors.push(this.lmHead);

    this.emb = new Float64Array(T * E);
    this.embInv = new Float64Array(T);
    this.caches = [];
    for (let l = 0; l < L; l++) {
      this.caches.push({
        xin: new Float64Array(T * E),
        an: new Float64Array(T * E),
        aInv: new Float64Array(T),
        q: new Float64Array(T * E),
        k: new Float64Array(T * E),
        v: new Float64Array(T * E),
        attw: new Float64Array(H * T * T),
        ao: new Float64Array(T * E),
        xmid: new Float64Array(T * E),
        bn: new Float64Array(T * E),
        bInv: new Float64Array(T),
        h1: new Float64Array(T * 4 * E),
      });
    }
    this.xf = new Float64Array(T * E);

    this.dx = new Float64Array(T * E);
    this.dan = new Float64Array(T * E);
    this.dq = new Float64Array(T * E);
    this.dk = new Float64Array(T * E);
    this.dv = new Float64Array(T * E);
    this.dao = new Float64Array(T * E);
    this.dh1 = new Float64Array(T * 4 * E);
    this.dbn = new Float64Array(T * E);
    this.row = new Float64Array(V);
    this.da = new Float64Array(T);
  }

  zeroGrad(): void {
    for (const t of this.tensors) t.g.fill(0);
  }

  /** Run the trunk over ids[off .. off+n); fills all caches and this.xf. */
  private forward(ids: Int32Array, off: number, n: number): void {
    const { embed: E, heads: H, context: T } = this.cfg;
    const D = E / H;
    const invSqrtD = 1 / Math.sqrt(D);

    for (let t = 0; t < n; t++) {
      const te = ids[off + t] * E;
      const pe = t * E;
      for (let i = 0; i < E; i++) this.emb[pe + i] = this.wte.w[te + i] + this.wpe.w[pe + i];
      this.embInv[t] = rmsnorm(this.emb, pe, this.caches[0]?.xin ?? this.xf, pe, E);
    }
    if (this.layers.length === 0) {
      return; // xf was filled above; degenerate but keeps the loop below simple
    }

    for (let l = 0; l < this.layers.length; l++) {
      const lw = this.layers[l];
      const c = this.caches[l];
      const xout = l + 1 < this.layers.length ? this.caches[l + 1].xin : this.xf;

      for (let t = 0; t < n; t++) {
        const o = t * E;
        c.aInv[t] = rmsnorm(c.xin, o, c.an, o, E);
        matvec(lw.wq, c.an, o, c.q, o);
        matvec(lw.wk, c.an, o, c.k, o);
        matvec(lw.wv, c.an, o, c.v, o);
      }

      for (let h = 0; h < H; h++) {
        const hb = h * D;
        for (let t = 0; t < n; t++) {
          // causal scores for positions 0..t
          let maxs = -Infinity;
          for (let u = 0; u <= t; u++) {
            let s = 0;
            for (let j = 0; j < D; j++) s += c.q[t * E + hb + j] * c.k[u * E + hb + j];
            s *= invSqrtD;
            this.da[u] = s;
            if (s > maxs) maxs = s;
          }
          let total = 0;
          const wbase = (h * T + t) * T;
          for (let u = 0; u <= t; u++) {
            const e = Math.exp(this.da[u] - maxs);
            c.attw[wbase + u] = e;
            total += e;
          }
          for (let u = 0; u <= t; u++) c.attw[wbase + u] /= total;
          for (let j = 0; j < D; j++) {
            let acc = 0;
            for (let u = 0; u <= t; u++) acc += c.attw[wbase + u] * c.v[u * E + hb + j];
            c.ao[t * E + hb + j] = acc;
          }
        }
      }

      for (let t = 0; t < n; t++) {
        const o = t * E;
        matvec(lw.wo, c.ao, o, this.dan, o); // dan doubles as a forward scratch row set
        for (let i = 0; i < E; i++) c.xmid[o + i] = c.xin[o + i] + this.dan[o + i];
        c.bInv[t] = rmsnorm(c.xmid, o, c.bn, o, E);
        matvec(lw.fc1, c.bn, o, c.h1, t * 4 * E);
        const hb = t * 4 * E;
        for (let i = 0; i < 4 * E; i++) {
          if (c.h1[hb + i] < 0) c.h1[hb + i] = 0;
        }
        matvec(lw.fc2, c.h1, hb, xout, o);
        for (let i = 0; i < E; i++) xout[o + i] += c.xmid[o + i];
      }
    }
  }

  /**
   * Forward, cross-entropy loss, and full backward over one window.
   *
   * Position t predicts ids[off+t+1], so the window spans n+1 stream tokens.
   * Gradients are accumulated scaled by `scale` (1 / total predictions when
   * averaging over a batch). Returns the summed negative log likelihood.
   */
  lossAndGrad(ids: Int32Array, off: number, n: number, scale: number): number {
    this.checkWindow(ids, off, n);
    this.forward(ids, off, n);
    const { embed: E, heads: H, context: T, vocabSize: V } = this.cfg;
    const D = E / H;
    const invSqrtD = 1 / Math.sqrt(D);

    // fused lm_head forward/backward, one position at a time
    this.dx.fill(0);
    let nll = 0;
    for (let t = 0; t < n; t++) {
      const o = t * E;
      const target = ids[off + t + 1];
      matvec(this.lmHead, this.xf, o, this.row, 0);
      let maxs = -Infinity;
      for (let i = 0; i < V; i++) if (this.row[i] > maxs) maxs = this.row[i];
      let total = 0;
      for (let i = 0; i < V; i++) total += Math.exp(this.row[i] - maxs);
      const lse = maxs + Math.log(total);
      nll += lse - this.row[target];
      for (let i = 0; i < V; i++) {
        this.row[i] = Math.exp(this.row[i] - lse) * scale;
      }
      this.row[target] -= scale;
      matvecGrad(this.lmHead, this.xf, o, this.row, 0, this.dx, o);
    }

    for (let l = this.layers.length - 1; l >= 0; l--) {
      const lw = this.layers[l];
      const c = this.caches[l];

      // mlp block: xout = xmid + fc2(relu(fc1(rmsnorm(xmid))))
      this.dh1.fill(0);
      this.dbn.fill(0);
      for (let t = 0; t < n; t++) {
        const hb = t * 4 * E;
        matvecGrad(lw.fc2, c.h1, hb, this.dx, t * E, this.dh1, hb);
        for (let i = 0; i < 4 * E; i++) {
          if (c.h1[hb + i] === 0) this.dh1[hb + i] = 0;
        }
        matvecGrad(lw.fc1, c.bn, t * E, this.dh1, hb, this.dbn, t * E);
        rmsnormGrad(c.xmid, t * E, this.dbn, t * E, this.dx, t * E, E, c.bInv[t]);
      }

      // attention block: xmid = xin + wo(heads(rmsnorm(xin)))
      this.dao.fill(0);
      for (let t = 0; t < n; t++) {
        matvecGrad(lw.wo, c.ao, t * E, this.dx, t * E, this.dao, t * E);
      }
      this.dq.fill(0);
      this.dk.fill(0);
      this.dv.fill(0);
      for (let h = 0; h < H; h++) {
        const hb = h * D;
        for (let t = 0; t < n; t++) {
          const wbase = (h * T + t) * T;
          let dsum = 0;
          for (let u = 0; u <= t; u++) {
            let d = 0;
            for (let j = 0; j < D; j++) {
              this.dv[u * E + hb + j] += c.attw[wbase + u] * this.dao[t * E + hb + j];
              d += this.dao[t * E + hb + j] * c.v[u * E + hb + j];
            }
            this.da[u] = d;
            dsum += c.attw[wbase + u] * d;
          }
          for (let u = 0; u <= t; u++) {
            const ds = c.attw[wbase + u] * (this.da[u] - dsum) * invSqrtD;
            for (let j = 0; j < D; j++) {
              this.dq[t * E + hb + j] += ds * c.k[u * E + hb + j];
              this.dk[u * E + hb + j] += ds * c.q[t * E + hb + j];
            }
          }
        }
      }
      this.dan.fill(0);
      for (let t = 0; t < n; t++) {
        const o = t * E;
        matvecGrad(lw.wq, c.an, o, this.dq, o, this.dan, o);
        matvecGrad(lw.wk, c.an, o, this.dk, o, this.dan, o);
        matvecGrad(lw.wv, c.an, o, this.dv, o, this.dan, o);
        rmsnormGrad(c.xin, o, this.dan, o, this.dx, o, E, c.aInv[t]);
      }
    }

    // embedding norm, then token/position tables
    this.dan.fill(0);
    for (let t = 0; t < n; t++) {
      const o = t * E;
      rmsnormGrad(this.emb, o, this.dx, o, this.dan, o, E, this.embInv[t]);
      const te = ids[off + t] * E;
      for (let i = 0; i < E; i++) {
        this.wte.g[te + i] += this.dan[o + i];
        this.wpe.g[o + i] += this.dan[o + i];
      }
    }
    return nll;
  }

  /** Forward-only summed negative log likelihood over one window. */
  evalNll(ids: Int32Array, off: number, n: number): number {
    this.checkWindow(ids, off, n);
    this.forward(ids, off, n);
    const { embed: E, vocabSize: V } = this.cfg;
    let nll = 0;
    for (let t = 0; t < n; t++) {
      matvec(this.lmHead, this.xf, t * E, this.row, 0);
      let maxs = -Infinity;
      for (let i = 0; i < V; i++) if (this.row[i] > maxs) maxs = this.row[i];
      let total = 0;
      for (let i = 0; i < V; i++) total += Math.exp(this.row[i] - maxs);
      nll += maxs + Math.log(total) - this.row[ids[off + t + 1]];
    }
    return nll;
  }

  private checkWindow(ids: Int32Array, off: number, n: number): void {
    if (n < 1 || n > this.cfg.context) {
      throw new RangeError(`window length ${n} outside [1, ${this.cfg.context}]`);
    }
    if (off < 0 || off + n + 1 > ids.length) {
      throw new RangeError(`window [${off}, ${off + n}] overruns stream of ${ids.length}`);
    }
  }
}

/** Adam with decoupled weight decay; gradients are cleared after each step. */
export class AdamW {
  private readonly tensors: Tensor[];
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private t = 0;

  constructor(
    tensors: Tensor[],
    private beta1 = 0.9,
    private beta2 = 0.95,
    private eps = 1e-8,
  ) {
    this.tensors = tensors;
    this.m = tensors.map((t) => new Float64Array(t.w.length));
    this.v = tensors.map((t) => new Float64Array(t.w.length));
  }

  step(lr: number, weightDecay: number): void {
    this.t += 1;
    const bc1 = 1 - this.beta1 ** this.t;
    const bc2 = 1 - this.beta2 ** this.t;
    for (let k = 0; k < this.tensors.length; k++) {
      const { w, g } = this.tensors[k];
      const m = this.m[k];
      const v = this.v[k];
      for (let i = 0; i < w.length; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        const update = m[i] / bc1 / (Math.sqrt(v[i] / bc2) + this.eps);
        w[i] -= lr * (update + weightDecay * w[i]);
        g[i] = 0;
      }
    }
  }
}
