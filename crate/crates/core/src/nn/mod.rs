//! Coordinate networks: a plain MLP and a factorised branch-trunk network
//! (FCN), with hand-written reverse-mode gradients and Adam.
//!
//! Parameter layout: one flat `Vec<f64>`, layer-major. Each dense layer
//! stores its weight matrix row-major as `[out][in]`, followed by its `out`
//! biases. An MLP is a single stack ending in one linear output unit. An FCN
//! stores the branch stack, then the trunk stack, then the scalar bias `b`;
//! both stacks end in a linear layer of width `K`.

mod adam;
mod checkpoint;
mod dense;

pub use adam::{adam_step, cosine_lr, AdamHyper, AdamState};
pub use checkpoint::{
    load as load_checkpoint, read_checkpoint, save as save_checkpoint, write_checkpoint, Checkpoint,
};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::rng::SeededRng;
use dense::Stack;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sin,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => libm::tanh(z),
            Activation::Sin => libm::sin(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    #[inline]
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sin => libm::cos(z),
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Sin => 1,
            Activation::Identity => 2,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Sin),
            2 => Some(Activation::Identity),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MlpArch {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FcnArch {
    /// Dimension of the trunk input `z`; the branch always sees one scalar.
    pub input_dim: usize,
    pub branch_hidden: Vec<usize>,
    pub trunk_hidden: Vec<usize>,
    pub latent: usize,
    pub activation: Activation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Arch {
    Mlp(MlpArch),
    Fcn(FcnArch),
}

impl Arch {
    pub fn validate(&self) -> Result<()> {
        match self {
            Arch::Mlp(a) => {
                ensure!(a.input_dim >= 1, "MLP input dimension must be >= 1");
                ensure!(!a.hidden.is_empty(), "MLP needs at least one hidden layer");
                ensure!(a.hidden.iter().all(|&w| w >= 1), "hidden widths must be >= 1");
            }
            Arch::Fcn(a) => {
                ensure!(a.input_dim >= 1, "FCN trunk input dimension must be >= 1");
                ensure!(a.latent >= 1, "FCN latent width K must be >= 1");
                ensure!(
                    a.branch_hidden.iter().chain(&a.trunk_hidden).all(|&w| w >= 1),
                    "hidden widths must be >= 1"
                );
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Arch::Mlp(a) => a.input_dim,
            Arch::Fcn(a) => a.input_dim,
        }
    }

    fn stacks(&self) -> Vec<Stack> {
        match self {
            Arch::Mlp(a) => {
                let mut sizes = vec![a.input_dim];
                sizes.extend(&a.hidden);
                sizes.push(1);
                vec![Stack::new(sizes, a.activation, 0)]
            }
            Arch::Fcn(a) => {
                let mut b = vec![1];
                b.extend(&a.branch_hidden);
                b.push(a.latent);
                let mut t = vec![a.input_dim];
                t.extend(&a.trunk_hidden);
                t.push(a.latent);
                let branch = Stack::new(b, a.activation, 0);
                let trunk = Stack::new(t, a.activation, branch.param_count());
                vec![branch, trunk]
            }
        }
    }

    pub fn param_count(&self) -> usize {
        let stacks = self.stacks();
        let n: usize = stacks.iter().map(Stack::param_count).sum();
        match self {
            Arch::Mlp(_) => n,
            Arch::Fcn(_) => n + 1,
        }
    }
}

/// Architecture plus flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    arch: Arch,
    theta: Vec<f64>,
}

impl NetworkParams {
    pub fn new(arch: Arch, theta: Vec<f64>) -> Result<Self> {
        arch.validate()?;
        ensure!(
            theta.len() == arch.param_count(),
            "parameter vector has {} entries, architecture needs {}",
            theta.len(),
            arch.param_count()
        );
        ensure!(theta.iter().all(|v| v.is_finite()), "parameters must be finite");
        Ok(Self { arch, theta })
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Forward pass over a batch; row `r` of `inputs` is one coordinate `z`.
    /// For the FCN the time-like branch input `s` is the last entry of `z`.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Result<Array1<f64>> {
        ensure!(
            inputs.ncols() == self.arch.input_dim(),
            "input has {} columns, network expects {}",
            inputs.ncols(),
            self.arch.input_dim()
        );
        let stacks = self.arch.stacks();
        Ok(match self.arch {
            Arch::Mlp(_) => stacks[0].forward(&self.theta, inputs).column(0).to_owned(),
            Arch::Fcn(_) => {
                let s = time_column(inputs);
                let b = stacks[0].forward(&self.theta, s.view());
                let t = stacks[1].forward(&self.theta, inputs);
                (&b * &t).sum_axis(Axis(1)) + self.theta[self.theta.len() - 1]
            }
        })
    }

    /// Mean squared residual against `targets` and its exact gradient.
    pub fn grad_mse(&self, inputs: ArrayView2<f64>, targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let rows = inputs.nrows();
        ensure!(rows > 0, "gradient of an empty batch");
        ensure!(targets.len() == rows, "{} targets for {rows} inputs", targets.len());
        ensure!(
            inputs.ncols() == self.arch.input_dim(),
            "input has {} columns, network expects {}",
            inputs.ncols(),
            self.arch.input_dim()
        );
        let stacks = self.arch.stacks();
        let mut grad = vec![0.0; self.theta.len()];
        let scale = 2.0 / rows as f64;
        let loss = match self.arch {
            Arch::Mlp(_) => {
                let tape = stacks[0].forward_tape(&self.theta, inputs);
                let out = tape.output();
                let mut loss = 0.0;
                let mut seed = Array2::zeros((rows, 1));
                for r in 0..rows {
                    let e = out[[r, 0]] - targets[r];
                    loss += e * e;
                    seed[[r, 0]] = scale * e;
                }
                stacks[0].backward(&self.theta, &tape, seed, &mut grad);
                loss / rows as f64
            }
            Arch::Fcn(_) => {
                let s = time_column(inputs);
                let btape = stacks[0].forward_tape(&self.theta, s.view());
                let ttape = stacks[1].forward_tape(&self.theta, inputs);
                let (bo, to) = (btape.output(), ttape.output());
                let bias = self.theta[self.theta.len() - 1];
                let pred = (bo * to).sum_axis(Axis(1)) + bias;
                let mut loss = 0.0;
                let mut g = Array1::zeros(rows);
                for r in 0..rows {
                    let e = pred[r] - targets[r];
                    loss += e * e;
                    g[r] = scale * e;
                }
                let gcol = g.view().insert_axis(Axis(1));
                let seed_b = to * &gcol;
                let seed_t = bo * &gcol;
                let last = grad.len() - 1;
                grad[last] = g.sum();
                stacks[0].backward(&self.theta, &btape, seed_b, &mut grad);
                stacks[1].backward(&self.theta, &ttape, seed_t, &mut grad);
                loss / rows as f64
            }
        };
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("non-finite loss {loss}")));
        }
        Ok((loss, grad))
    }
}

fn time_column(inputs: ArrayView2<f64>) -> Array2<f64> {
    let last = inputs.ncols() - 1;
    inputs.column(last).to_owned().insert_axis(Axis(1))
}

/// `M(z)` for an MLP.
pub fn mlp_forward(params: &NetworkParams, z: &[f64]) -> Result<f64> {
    ensure!(matches!(params.arch, Arch::Mlp(_)), "mlp_forward needs an MLP");
    let row = ArrayView2::from_shape((1, z.len()), z)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(params.forward_batch(row)?[0])
}

/// `N(s, z) = b + sum_k B_k(s) T_k(z)` for an FCN with explicit branch input.
pub fn fcn_forward(params: &NetworkParams, s: f64, z: &[f64]) -> Result<f64> {
    let Arch::Fcn(arch) = &params.arch else {
        return Err(Error::InvalidArgument("fcn_forward needs an FCN".into()));
    };
    ensure!(z.len() == arch.input_dim, "trunk input has {} entries, expected {}", z.len(), arch.input_dim);
    let stacks = params.arch.stacks();
    let sv = Array2::from_elem((1, 1), s);
    let zv = ArrayView2::from_shape((1, z.len()), z)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let b = stacks[0].forward(&params.theta, sv.view());
    let t = stacks[1].forward(&params.theta, zv);
    Ok(params.theta[params.theta.len() - 1] + (&b * &t).sum())
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(rng: &mut SeededRng, arch: &Arch) -> Result<NetworkParams> {
    arch.validate()?;
    let mut theta = vec![0.0; arch.param_count()];
    for stack in arch.stacks() {
        stack.glorot_init(rng, &mut theta);
    }
    NetworkParams::new(arch.clone(), theta)
}
