use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use super::Activation;
use crate::rng::SeededRng;

/// A chain of dense layers: activation after every layer but the last.
pub(super) struct Stack {
    sizes: Vec<usize>,
    activation: Activation,
    /// Offset of the first parameter of this stack in the flat vector.
    offset: usize,
}

/// Pre-activations and activations of every layer, kept for the backward pass.
pub(super) struct Tape {
    /// `acts[0]` is the input; `acts[l + 1]` the output of layer `l`.
    acts: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

impl Tape {
    pub(super) fn output(&self) -> &Array2<f64> {
        self.acts.last().unwrap()
    }
}

impl Stack {
    pub(super) fn new(sizes: Vec<usize>, activation: Activation, offset: usize) -> Self {
        Self { sizes, activation, offset }
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub(super) fn param_count(&self) -> usize {
        self.sizes.windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }

    /// Start offsets of weight and bias of layer `l`.
    fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let before: usize = self.sizes[..l + 1].windows(2).map(|w| w[1] * (w[0] + 1)).sum();
        let w = self.offset + before;
        (w, w + self.sizes[l + 1] * self.sizes[l])
    }

    fn weights<'a>(&self, theta: &'a [f64], l: usize) -> (ArrayView2<'a, f64>, ArrayView1<'a, f64>) {
        let (wo, bo) = self.layer_offsets(l);
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = ArrayView2::from_shape((fan_out, fan_in), &theta[wo..bo]).unwrap();
        let b = ArrayView1::from(&theta[bo..bo + fan_out]);
        (w, b)
    }

    pub(super) fn forward(&self, theta: &[f64], input: ArrayView2<f64>) -> Array2<f64> {
        let mut a = input.to_owned();
        for l in 0..self.layers() {
            let (w, b) = self.weights(theta, l);
            let mut z = a.dot(&w.t()) + &b;
            if l + 1 < self.layers() {
                z.mapv_inplace(|v| self.activation.apply(v));
            }
            a = z;
        }
        a
    }

    pub(super) fn forward_tape(&self, theta: &[f64], input: ArrayView2<f64>) -> Tape {
        let mut acts = vec![input.to_owned()];
        let mut pre = Vec::with_capacity(self.layers());
        for l in 0..self.layers() {
            let (w, b) = self.weights(theta, l);
            let z = acts[l].dot(&w.t()) + &b;
            let a = if l + 1 < self.layers() {
                z.mapv(|v| self.activation.apply(v))
            } else {
                z.clone()
            };
            pre.push(z);
            acts.push(a);
        }
        Tape { acts, pre }
    }

    /// Accumulate parameter gradients given `d loss / d output` in `seed`.
    pub(super) fn backward(&self, theta: &[f64], tape: &Tape, seed: Array2<f64>, grad: &mut [f64]) {
        let mut delta = seed;
        for l in (0..self.layers()).rev() {
            if l + 1 < self.layers() {
                let act = self.activation;
                ndarray::Zip::from(&mut delta)
                    .and(&tape.pre[l])
                    .and(&tape.acts[l + 1])
                    .for_each(|d, &z, &a| *d *= act.derivative(z, a));
            }
            let (wo, bo) = self.layer_offsets(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let dw = delta.t().dot(&tape.acts[l]);
            for (g, v) in grad[wo..bo].iter_mut().zip(dw.iter()) {
                *g += v;
            }
            let db = delta.sum_axis(Axis(0));
            for (g, v) in grad[bo..bo + fan_out].iter_mut().zip(db.iter()) {
                *g += v;
            }
            if l > 0 {
                let (w, _) = self.weights(theta, l);
                debug_assert_eq!(w.ncols(), fan_in);
                delta = delta.dot(&w);
            }
        }
    }

    pub(super) fn glorot_init(&self, rng: &mut SeededRng, theta: &mut [f64]) {
        for l in 0..self.layers() {
            let (wo, bo) = self.layer_offsets(l);
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut theta[wo..bo] {
                *w = limit * (2.0 * rng.uniform() - 1.0);
            }
            theta[bo..bo + fan_out].fill(0.0);
        }
    }
}
