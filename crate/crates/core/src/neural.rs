//! Self-contained differentiable substrate: fixed-topology MLPs with
//! explicit forward/backward (including input gradients), Adam, and a
//! diagonal Gaussian head with reparameterized sampling.
//!
//! Parameters live in one flat `Vec<f64>` (per layer: weight matrix
//! row-major, then bias); gradients use the same layout. All math is f64.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::math;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => math::tanh(x),
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// A multilayer perceptron with linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

/// Activations recorded by a forward pass, enough for backward.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    n: usize,
    /// layers[0] is the input batch; layers[l] the post-activation batch
    /// of layer l; the last entry is the (linear) output batch.
    layers: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn batch_len(&self) -> usize {
        self.n
    }
}

fn param_len(layer_sizes: &[usize]) -> usize {
    layer_sizes
        .windows(2)
        .map(|w| w[1] * w[0] + w[1])
        .sum()
}

impl Mlp {
    pub fn zeros(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.iter().any(|&s| s == 0) {
            return Err(CoreError::InvalidInput("MLP needs >= 2 nonzero layer sizes"));
        }
        let len = param_len(&layer_sizes);
        Ok(Mlp {
            layer_sizes,
            activation,
            params: vec![0.0; len],
        })
    }

    /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for both weights
    /// and biases (the standard linear-layer default; non-zero biases also
    /// avoid starting with exactly-dead rectifier layers).
    pub fn init<R: Rng + ?Sized>(
        layer_sizes: Vec<usize>,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, activation)?;
        for l in 0..net.num_layers() {
            let (fan_out, fan_in) = net.layer_shape(l);
            let bound = 1.0 / math::sqrt(fan_in as f64);
            let off = net.weight_offset(l);
            for w in &mut net.params[off..off + fan_out * (fan_in + 1)] {
                *w = (rng.gen::<f64>() * 2.0 - 1.0) * bound;
            }
        }
        Ok(net)
    }

    /// Like [`init`](Self::init) but with all biases zero. Suited to value
    /// networks whose output should start uniformly near zero: with
    /// rectifier hidden layers the initial function passes through zero at
    /// the origin and stays small, which keeps early bootstrapped targets
    /// stable. (Empirically, drawing the value network's biases at random
    /// destabilizes the actor-critic midpoint training loop.)
    pub fn init_zero_bias<R: Rng + ?Sized>(
        layer_sizes: Vec<usize>,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, activation)?;
        for l in 0..net.num_layers() {
            let (fan_out, fan_in) = net.layer_shape(l);
            let bound = 1.0 / math::sqrt(fan_in as f64);
            let off = net.weight_offset(l);
            for w in &mut net.params[off..off + fan_out * fan_in] {
                *w = (rng.gen::<f64>() * 2.0 - 1.0) * bound;
            }
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weight layers.
    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn layer_shape(&self, l: usize) -> (usize, usize) {
        (self.layer_sizes[l + 1], self.layer_sizes[l])
    }

    fn weight_offset(&self, l: usize) -> usize {
        param_len(&self.layer_sizes[..l + 1])
    }

    fn bias_offset(&self, l: usize) -> usize {
        let (out, inp) = self.layer_shape(l);
        self.weight_offset(l) + out * inp
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(CoreError::ShapeMismatch {
                expected: self.params.len(),
                got: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Zeroed gradient buffer matching `params`.
    pub fn zero_grads(&self) -> Vec<f64> {
        vec![0.0; self.params.len()]
    }

    /// Forward pass on a row-major batch of `n` inputs.
    pub fn forward_batch(&self, input: &[f64], n: usize) -> Result<(Vec<f64>, ForwardCache)> {
        let in_dim = self.input_dim();
        if input.len() != n * in_dim {
            return Err(CoreError::ShapeMismatch {
                expected: n * in_dim,
                got: input.len(),
            });
        }
        let mut layers = Vec::with_capacity(self.num_layers() + 1);
        layers.push(input.to_vec());
        for l in 0..self.num_layers() {
            let (out, inp) = self.layer_shape(l);
            let w = &self.params[self.weight_offset(l)..];
            let b = &self.params[self.bias_offset(l)..self.bias_offset(l) + out];
            let x = layers.last().unwrap();
            let mut y = vec![0.0; n * out];
            for i in 0..n {
                let xi = &x[i * inp..(i + 1) * inp];
                let yi = &mut y[i * out..(i + 1) * out];
                for (j, yj) in yi.iter_mut().enumerate() {
                    *yj = b[j] + math::dot(&w[j * inp..(j + 1) * inp], xi);
                }
            }
            if l + 1 < self.num_layers() {
                for v in &mut y {
                    *v = self.activation.apply(*v);
                }
            }
            layers.push(y);
        }
        let output = layers.last().unwrap().clone();
        Ok((output, ForwardCache { n, layers }))
    }

    /// Single-input convenience wrapper.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.forward_batch(input, 1)
    }

    /// Reverse pass: accumulates parameter gradients of
    /// `sum_i output_i . out_grad_i` into `grads` (same layout as
    /// `params`) and returns the input gradients, row-major `n x in_dim`.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        out_grad: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        let n = cache.n;
        if out_grad.len() != n * self.output_dim() {
            return Err(CoreError::ShapeMismatch {
                expected: n * self.output_dim(),
                got: out_grad.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(CoreError::ShapeMismatch {
                expected: self.params.len(),
                got: grads.len(),
            });
        }
        if cache.layers.len() != self.num_layers() + 1
            || cache.layers[0].len() != n * self.input_dim()
        {
            return Err(CoreError::InvalidInput("stale or mismatched forward cache"));
        }
        let mut delta = out_grad.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (out, inp) = self.layer_shape(l);
            let x = &cache.layers[l];
            let w_off = self.weight_offset(l);
            let b_off = self.bias_offset(l);
            // Parameter gradients.
            for i in 0..n {
                let di = &delta[i * out..(i + 1) * out];
                let xi = &x[i * inp..(i + 1) * inp];
                for (j, &dj) in di.iter().enumerate() {
                    if dj != 0.0 {
                        let row = &mut grads[w_off + j * inp..w_off + (j + 1) * inp];
                        for (g, &xv) in row.iter_mut().zip(xi) {
                            *g += dj * xv;
                        }
                    }
                    grads[b_off + j] += dj;
                }
            }
            // Input gradients of this layer.
            let w = &self.params[w_off..w_off + out * inp];
            let mut ginput = vec![0.0; n * inp];
            for i in 0..n {
                let di = &delta[i * out..(i + 1) * out];
                let gi = &mut ginput[i * inp..(i + 1) * inp];
                for (j, &dj) in di.iter().enumerate() {
                    if dj != 0.0 {
                        let row = &w[j * inp..(j + 1) * inp];
                        for (g, &wv) in gi.iter_mut().zip(row) {
                            *g += dj * wv;
                        }
                    }
                }
            }
            if l > 0 {
                let a = &cache.layers[l];
                debug_assert_eq!(a.len(), n * inp);
                for (g, &av) in ginput.iter_mut().zip(a) {
                    *g *= self.activation.derivative_from_output(av);
                }
            }
            delta = ginput;
        }
        Ok(delta)
    }

    /// Reverse pass that only propagates gradients to the inputs,
    /// skipping parameter-gradient accumulation. Useful when the network
    /// is held fixed and only upstream quantities are being trained.
    pub fn backward_inputs_only(&self, cache: &ForwardCache, out_grad: &[f64]) -> Result<Vec<f64>> {
        let n = cache.n;
        if out_grad.len() != n * self.output_dim() {
            return Err(CoreError::ShapeMismatch {
                expected: n * self.output_dim(),
                got: out_grad.len(),
            });
        }
        if cache.layers.len() != self.num_layers() + 1
            || cache.layers[0].len() != n * self.input_dim()
        {
            return Err(CoreError::InvalidInput("stale or mismatched forward cache"));
        }
        let mut delta = out_grad.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (out, inp) = self.layer_shape(l);
            let w_off = self.weight_offset(l);
            let w = &self.params[w_off..w_off + out * inp];
            let mut ginput = vec![0.0; n * inp];
            for i in 0..n {
                let di = &delta[i * out..(i + 1) * out];
                let gi = &mut ginput[i * inp..(i + 1) * inp];
                for (j, &dj) in di.iter().enumerate() {
                    if dj != 0.0 {
                        let row = &w[j * inp..(j + 1) * inp];
                        for (g, &wv) in gi.iter_mut().zip(row) {
                            *g += dj * wv;
                        }
                    }
                }
            }
            if l > 0 {
                let a = &cache.layers[l];
                debug_assert_eq!(a.len(), n * inp);
                for (g, &av) in ginput.iter_mut().zip(a) {
                    *g *= self.activation.derivative_from_output(av);
                }
            }
            delta = ginput;
        }
        Ok(delta)
    }

    pub fn single_backward(
        &self,
        cache: &ForwardCache,
        out_grad: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>> {
        self.backward_batch(cache, out_grad, grads)
    }
}

/// Bias-corrected Adam over one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(lr: f64, param_len: usize) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; param_len],
            v: vec![0.0; param_len],
        }
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    pub fn restore(lr: f64, step: u64, m: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if m.len() != v.len() {
            return Err(CoreError::ShapeMismatch {
                expected: m.len(),
                got: v.len(),
            });
        }
        Ok(AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step,
            m,
            v,
        })
    }

    /// One update. Refuses (leaving params and state untouched) if any
    /// gradient is non-finite.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(CoreError::ShapeMismatch {
                expected: self.m.len(),
                got: grads.len(),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(CoreError::NonFinite("gradient passed to Adam"));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - libm::pow(self.beta1, t as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, t as f64);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
        Ok(())
    }
}

/// A diagonal Gaussian over the representation space; log stds are
/// clamped to [-5, 2] at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHead {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl GaussianHead {
    /// Splits a raw network output (mean ++ log_std) in half and clamps.
    pub fn from_raw(raw: &[f64]) -> Result<Self> {
        if raw.len() % 2 != 0 {
            return Err(CoreError::InvalidInput("Gaussian head needs an even output"));
        }
        let d = raw.len() / 2;
        Ok(GaussianHead {
            mean: raw[..d].to_vec(),
            log_std: raw[d..]
                .iter()
                .map(|&x| x.clamp(LOG_STD_MIN, LOG_STD_MAX))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// mean + exp(log_std) * noise, with caller-supplied standard-normal
    /// noise (the reparameterization trick).
    pub fn sample_reparameterized(&self, noise: &[f64]) -> Vec<f64> {
        debug_assert_eq!(noise.len(), self.mean.len());
        self.mean
            .iter()
            .zip(&self.log_std)
            .zip(noise)
            .map(|((&m, &ls), &n)| m + math::exp(ls) * n)
            .collect()
    }

    /// Diagonal Gaussian log density at `x`.
    pub fn log_prob(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.mean.len() {
            return Err(CoreError::ShapeMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        let mut lp = 0.0;
        for ((&m, &ls), &xi) in self.mean.iter().zip(&self.log_std).zip(x) {
            let z = (xi - m) / math::exp(ls);
            lp += -0.5 * z * z - ls - 0.5 * math::ln(2.0 * core::f64::consts::PI);
        }
        Ok(lp)
    }

    /// Entropy of the diagonal Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std
            .iter()
            .map(|&ls| ls + 0.5 * (1.0 + math::ln(2.0 * core::f64::consts::PI)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    /// Straight-line re-evaluation of an MLP, written independently of
    /// the implementation above.
    fn reference_forward(net: &Mlp, input: &[f64]) -> Vec<f64> {
        let sizes = net.layer_sizes();
        let mut x = input.to_vec();
        let mut offset = 0;
        for l in 0..sizes.len() - 1 {
            let (inp, out) = (sizes[l], sizes[l + 1]);
            let mut y = vec![0.0; out];
            for j in 0..out {
                let mut acc = 0.0;
                for k in 0..inp {
                    acc += net.params()[offset + j * inp + k] * x[k];
                }
                y[j] = acc;
            }
            offset += out * inp;
            for j in 0..out {
                y[j] += net.params()[offset + j];
            }
            offset += out;
            if l + 1 < sizes.len() - 1 {
                for v in &mut y {
                    *v = match net.activation() {
                        Activation::Relu => v.max(0.0),
                        Activation::Tanh => v.tanh(),
                    };
                }
            }
            x = y;
        }
        x
    }

    #[test]
    fn identity_linear_layer() {
        let mut net = Mlp::zeros(vec![3, 3], Activation::Relu).unwrap();
        for i in 0..3 {
            net.params_mut()[i * 3 + i] = 1.0;
        }
        let (y, _) = net.forward(&[0.5, -2.0, 3.0]).unwrap();
        assert_eq!(y, vec![0.5, -2.0, 3.0]);
    }

    #[test]
    fn relu_hidden_layer() {
        // 2 -> 2 -> 2 with identity weights everywhere: hidden relu clips.
        let mut net = Mlp::zeros(vec![2, 2, 2], Activation::Relu).unwrap();
        net.params_mut()[0] = 1.0;
        net.params_mut()[3] = 1.0;
        let off = 2 * 2 + 2;
        net.params_mut()[off] = 1.0;
        net.params_mut()[off + 3] = 1.0;
        let (y, _) = net.forward(&[-1.0, 2.0]).unwrap();
        assert_eq!(y, vec![0.0, 2.0]);
    }

    #[test]
    fn forward_matches_reference() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for &act in &[Activation::Relu, Activation::Tanh] {
            let net = Mlp::init(vec![4, 7, 5, 3], act, &mut rng).unwrap();
            for _ in 0..10 {
                let x: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
                let (y, _) = net.forward(&x).unwrap();
                let want = reference_forward(&net, &x);
                for (a, b) in y.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn batch_matches_singles() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let net = Mlp::init(vec![3, 8, 2], Activation::Tanh, &mut rng).unwrap();
        let batch: Vec<f64> = (0..15).map(|_| rng.gen::<f64>() - 0.5).collect();
        let (y, _) = net.forward_batch(&batch, 5).unwrap();
        for i in 0..5 {
            let (yi, _) = net.forward(&batch[i * 3..(i + 1) * 3]).unwrap();
            assert_eq!(&y[i * 2..(i + 1) * 2], yi.as_slice());
        }
    }

    #[test]
    fn linear_input_gradient_is_w_transpose() {
        let mut net = Mlp::zeros(vec![2, 2], Activation::Relu).unwrap();
        net.set_params(&[1.0, 2.0, 3.0, 4.0, 0.0, 0.0]).unwrap();
        let (_, cache) = net.forward(&[0.3, -0.7]).unwrap();
        let mut grads = net.zero_grads();
        let gin = net.backward_batch(&cache, &[1.0, 0.5], &mut grads).unwrap();
        // W^T . [1, 0.5] = [1*1 + 3*0.5, 2*1 + 4*0.5]
        assert!((gin[0] - 2.5).abs() < 1e-15);
        assert!((gin[1] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_out_grad_gives_zero_grads() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let net = Mlp::init(vec![3, 6, 2], Activation::Relu, &mut rng).unwrap();
        let (_, cache) = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        let mut grads = net.zero_grads();
        let gin = net.backward_batch(&cache, &[0.0, 0.0], &mut grads).unwrap();
        assert!(grads.iter().all(|&g| g == 0.0));
        assert!(gin.iter().all(|&g| g == 0.0));
    }

    fn finite_diff_check(sizes: Vec<usize>, act: Activation, rng: &mut ChaCha20Rng) {
        let net = Mlp::init(sizes.clone(), act, rng).unwrap();
        let in_dim = sizes[0];
        let out_dim = *sizes.last().unwrap();
        let x: Vec<f64> = (0..in_dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let w: Vec<f64> = (0..out_dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();

        let scalar = |net: &Mlp, x: &[f64]| -> f64 {
            let (y, _) = net.forward(x).unwrap();
            math::dot(&y, &w)
        };

        let (_, cache) = net.forward(&x).unwrap();
        let mut grads = net.zero_grads();
        let gin = net.backward_batch(&cache, &w, &mut grads).unwrap();

        let h = 1e-5;
        for i in 0..net.params().len() {
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let fd = (scalar(&plus, &x) - scalar(&minus, &x)) / (2.0 * h);
            let denom = fd.abs().max(grads[i].abs()).max(1e-6);
            assert!(
                (fd - grads[i]).abs() / denom < 1e-4,
                "param {i}: fd={fd} analytic={}",
                grads[i]
            );
        }
        for i in 0..in_dim {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (scalar(&net, &xp) - scalar(&net, &xm)) / (2.0 * h);
            let denom = fd.abs().max(gin[i].abs()).max(1e-6);
            assert!((fd - gin[i]).abs() / denom < 1e-4);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(100);
        for _ in 0..5 {
            finite_diff_check(vec![3, 8, 8, 2], Activation::Tanh, &mut rng);
            finite_diff_check(vec![2, 5, 1], Activation::Relu, &mut rng);
        }
    }

    #[test]
    fn inputs_only_backward_matches_full_backward() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for &act in &[Activation::Relu, Activation::Tanh] {
            let net = Mlp::init(vec![4, 9, 6, 3], act, &mut rng).unwrap();
            let batch: Vec<f64> = (0..12).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let og: Vec<f64> = (0..9).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let (_, cache) = net.forward_batch(&batch, 3).unwrap();
            let mut grads = net.zero_grads();
            let full = net.backward_batch(&cache, &og, &mut grads).unwrap();
            let fast = net.backward_inputs_only(&cache, &og).unwrap();
            assert_eq!(full, fast);
        }
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut params = vec![0.0];
        let mut adam = AdamState::new(1e-3, 1);
        adam.update(&mut params, &[1.0]).unwrap();
        // m_hat = v_hat = 1 => delta = -lr / (1 + eps).
        let expect = -1e-3 / (1.0 + 1e-8);
        assert!((params[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn adam_second_step_shrinks_delta() {
        let mut params = vec![0.0];
        let mut adam = AdamState::new(1e-3, 1);
        adam.update(&mut params, &[1.0]).unwrap();
        let first = params[0];
        adam.update(&mut params, &[1.0]).unwrap();
        let second = params[0] - first;
        assert!(second.abs() <= first.abs());
        // Closed form: m_hat = v_hat = 1 again for constant unit gradient.
        assert!((second - first).abs() < 1e-12);
    }

    #[test]
    fn adam_zero_grad_keeps_params() {
        let mut params = vec![0.5, -0.25];
        let mut adam = AdamState::new(1e-2, 2);
        adam.update(&mut params, &[0.0, 0.0]).unwrap();
        assert_eq!(params, vec![0.5, -0.25]);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn adam_refuses_non_finite() {
        let mut params = vec![0.5];
        let mut adam = AdamState::new(1e-2, 1);
        assert!(adam.update(&mut params, &[f64::NAN]).is_err());
        assert_eq!(params, vec![0.5]);
        assert_eq!(adam.step, 0);
    }

    #[test]
    fn head_examples() {
        let head = GaussianHead {
            mean: vec![0.3, -0.2],
            log_std: vec![0.0, 0.0],
        };
        assert_eq!(head.sample_reparameterized(&[0.0, 0.0]), vec![0.3, -0.2]);
        assert_eq!(head.sample_reparameterized(&[1.0, 1.0]), vec![1.3, 0.8]);

        let head1 = GaussianHead {
            mean: vec![0.0],
            log_std: vec![0.0],
        };
        let lp = head1.log_prob(&[0.0]).unwrap();
        assert!((lp - (-0.5 * (2.0 * core::f64::consts::PI).ln())).abs() < 1e-12);

        // Translation invariance.
        let a = GaussianHead {
            mean: vec![1.0],
            log_std: vec![0.3],
        };
        let b = GaussianHead {
            mean: vec![4.0],
            log_std: vec![0.3],
        };
        assert!((a.log_prob(&[1.7]).unwrap() - b.log_prob(&[4.7]).unwrap()).abs() < 1e-12);

        // Multi-dim log prob equals the sum of per-dim ones.
        let joint = GaussianHead {
            mean: vec![0.5, -1.0],
            log_std: vec![0.1, -0.4],
        };
        let per_dim = GaussianHead {
            mean: vec![0.5],
            log_std: vec![0.1],
        }
        .log_prob(&[0.2])
        .unwrap()
            + GaussianHead {
                mean: vec![-1.0],
                log_std: vec![-0.4],
            }
            .log_prob(&[-1.3])
            .unwrap();
        assert!((joint.log_prob(&[0.2, -1.3]).unwrap() - per_dim).abs() < 1e-12);
    }

    #[test]
    fn log_std_clamped() {
        let head = GaussianHead::from_raw(&[0.0, 0.0, 10.0, -30.0]).unwrap();
        assert_eq!(head.log_std, vec![LOG_STD_MAX, LOG_STD_MIN]);
    }
}
