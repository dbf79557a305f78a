//! Fully-connected action-value network implemented from first
//! principles: forward pass, backpropagation, Adam update. Parameters
//! live in one flat `f64` vector (per layer: row-major weights, then
//! biases) so value-function transfer is plain vector arithmetic.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Layer widths, input first, one output per discrete action last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture(pub Vec<usize>);

impl Architecture {
    pub fn param_count(&self) -> usize {
        self.0
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    pub fn input_len(&self) -> usize {
        *self.0.first().expect("at least two layers")
    }

    pub fn output_len(&self) -> usize {
        *self.0.last().expect("at least two layers")
    }
}

/// He-normal weight initialization with zero biases, deterministic given
/// the RNG state.
pub fn init_params(arch: &Architecture, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut params = Vec::with_capacity(arch.param_count());
    for w in arch.0.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let std = (2.0 / fan_in as f64).sqrt();
        let normal = Normal::new(0.0, std).expect("std is positive");
        for _ in 0..fan_in * fan_out {
            params.push(normal.sample(rng));
        }
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    params
}

/// Dot product with four independent accumulator lanes: a fixed
/// summation order the optimizer can vectorize without reassociating.
#[inline]
fn dot(w: &[f64], x: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), x.len());
    let mut acc = [0.0f64; 4];
    let (wc, wr) = w.as_chunks::<4>();
    let (xc, xr) = x.as_chunks::<4>();
    for (a, b) in wc.iter().zip(xc) {
        acc[0] += a[0] * b[0];
        acc[1] += a[1] * b[1];
        acc[2] += a[2] * b[2];
        acc[3] += a[3] * b[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in wr.iter().zip(xr) {
        s += a * b;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    let n = x.len().min(y.len());
    let (xc, xr) = x[..n].as_chunks::<4>();
    let (yc, yr) = y[..n].as_chunks_mut::<4>();
    for (b, a) in yc.iter_mut().zip(xc) {
        b[0] += alpha * a[0];
        b[1] += alpha * a[1];
        b[2] += alpha * a[2];
        b[3] += alpha * a[3];
    }
    for (b, a) in yr.iter_mut().zip(xr) {
        *b += alpha * a;
    }
}

/// Reusable per-layer activation and gradient buffers.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    /// Pre-activations per non-input layer.
    pre: Vec<Vec<f64>>,
    /// Activations per layer (index 0 is the input copy).
    act: Vec<Vec<f64>>,
    /// Backpropagated deltas per non-input layer.
    delta: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn for_arch(arch: &Architecture) -> Self {
        Self {
            pre: arch.0[1..].iter().map(|&n| vec![0.0; n]).collect(),
            act: arch.0.iter().map(|&n| vec![0.0; n]).collect(),
            delta: arch.0[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// The network: an architecture plus its flat parameter vector. Hidden
/// layers use the rectifier; the output layer is linear.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub arch: Architecture,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn new(arch: Architecture, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), arch.param_count(), "parameter vector size");
        Self { arch, params }
    }

    /// Offset of layer `l`'s weights and biases in the flat vector.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for w in self.arch.0.windows(2).take(l) {
            off += (w[0] + 1) * w[1];
        }
        let weights = off;
        let biases = off + self.arch.0[l] * self.arch.0[l + 1];
        (weights, biases)
    }

    /// Forward pass; returns the output slice held in `ws`.
    pub fn forward<'w>(&self, input: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        self.forward_params(&self.params, input, ws)
    }

    fn forward_params<'w>(
        &self,
        params: &[f64],
        input: &[f64],
        ws: &'w mut Workspace,
    ) -> &'w [f64] {
        let layers = &self.arch.0;
        ws.act[0].copy_from_slice(input);
        for l in 0..layers.len() - 1 {
            let (w_off, b_off) = self.layer_offsets(l);
            let (n_in, n_out) = (layers[l], layers[l + 1]);
            let last = l == layers.len() - 2;
            for j in 0..n_out {
                let row = &params[w_off + j * n_in..w_off + (j + 1) * n_in];
                let z = dot(row, &ws.act[l]) + params[b_off + j];
                ws.pre[l][j] = z;
                ws.act[l + 1][j] = if last { z } else { z.max(0.0) };
            }
        }
        &ws.act[layers.len() - 1]
    }

    /// Greedy action: index of the maximal output, first on ties.
    pub fn argmax(&self, input: &[f64], ws: &mut Workspace) -> usize {
        let out = self.forward(input, ws);
        let mut best = 0;
        for (i, &v) in out.iter().enumerate().skip(1) {
            if v > out[best] {
                best = i;
            }
        }
        best
    }

    /// Accumulates the gradient of the mean squared temporal-difference
    /// error over a batch: for each sample only the taken action's output
    /// contributes `(q[a] - target)^2`. Returns the batch loss.
    pub fn batch_gradient(
        &self,
        batch: &[(&[f64], usize, f64)],
        grad: &mut [f64],
        ws: &mut Workspace,
    ) -> f64 {
        assert_eq!(grad.len(), self.params.len());
        grad.fill(0.0);
        let layers = &self.arch.0;
        let depth = layers.len() - 1;
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;

        for &(input, action, target) in batch {
            self.forward_params(&self.params, input, ws);
            let q = ws.act[depth][action];
            let err = q - target;
            loss += err * err * scale;

            ws.delta[depth - 1].fill(0.0);
            ws.delta[depth - 1][action] = 2.0 * err * scale;
            for l in (0..depth).rev() {
                let (w_off, b_off) = self.layer_offsets(l);
                let (n_in, n_out) = (layers[l], layers[l + 1]);
                // Parameter gradients for this layer.
                for j in 0..n_out {
                    let d = ws.delta[l][j];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut grad[w_off + j * n_in..w_off + (j + 1) * n_in];
                    axpy(d, &ws.act[l], row);
                    grad[b_off + j] += d;
                }
                if l == 0 {
                    break;
                }
                // Delta for the layer below, gated by its rectifier.
                let (lower, upper) = ws.delta.split_at_mut(l);
                let dl = &mut lower[l - 1];
                dl.fill(0.0);
                for j in 0..n_out {
                    let d = upper[0][j];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &self.params[w_off + j * n_in..w_off + (j + 1) * n_in];
                    axpy(d, row, dl);
                }
                for (dj, &z) in dl.iter_mut().zip(&ws.pre[l - 1]) {
                    if z <= 0.0 {
                        *dj = 0.0;
                    }
                }
            }
        }
        loss
    }
}

/// Adam with the usual bias correction; a zero learning rate leaves the
/// parameters bit-identical.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, param_count: usize) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        if self.lr == 0.0 {
            return;
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Central-difference gradient of the batch loss, for checking the
/// analytic gradient. Test and self-test use only.
pub fn numeric_gradient(net: &Mlp, batch: &[(&[f64], usize, f64)], h: f64) -> Vec<f64> {
    let mut ws = Workspace::for_arch(&net.arch);
    let loss_at = |params: &[f64], ws: &mut Workspace| -> f64 {
        let probe = Mlp::new(net.arch.clone(), params.to_vec());
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for &(input, action, target) in batch {
            let out = probe.forward(input, ws);
            let err = out[action] - target;
            loss += err * err * scale;
        }
        loss
    };
    let mut grad = vec![0.0; net.params.len()];
    let mut probe = net.params.clone();
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = loss_at(&probe, &mut ws);
        probe[i] = orig - h;
        let down = loss_at(&probe, &mut ws);
        probe[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    grad
}

/// Worst relative disagreement between analytic and numeric gradients.
pub fn gradient_check(arch: &[usize], seed: u64, batch_size: usize) -> f64 {
    use crate::seed::rng_for;
    let arch = Architecture(arch.to_vec());
    let mut rng = rng_for(seed, "gradient-check");
    let params = init_params(&arch, &mut rng);
    let net = Mlp::new(arch.clone(), params);

    let inputs: Vec<Vec<f64>> = (0..batch_size)
        .map(|_| (0..arch.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let batch: Vec<(&[f64], usize, f64)> = inputs
        .iter()
        .map(|x| {
            (
                x.as_slice(),
                rng.random_range(0..arch.output_len()),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();

    let mut ws = Workspace::for_arch(&net.arch);
    let mut analytic = vec![0.0; net.params.len()];
    net.batch_gradient(&batch, &mut analytic, &mut ws);
    let numeric = numeric_gradient(&net, &batch, 1e-6);

    analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}
