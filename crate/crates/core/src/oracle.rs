//! Stochastic first-order oracles for the two local cost families.
//!
//! Each node owns one [`OracleHandle`]. Draws are addressed by
//! `(seed, node, iteration)` through [`crate::rng::stream`], so handles are
//! independent and may be driven from any thread.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::block::{dot, norm_sq};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// `r(x) = R Σ_k x_k² / (1 + x_k²)`.
pub fn regularizer(reg: f64, x: &[f64]) -> f64 {
    reg * x.iter().map(|v| v * v / (1.0 + v * v)).sum::<f64>()
}

/// Adds `∇r(x)` into `out`.
pub fn add_regularizer_gradient(reg: f64, x: &[f64], out: &mut [f64]) {
    if reg == 0.0 {
        return;
    }
    for (o, &v) in out.iter_mut().zip(x) {
        let d = 1.0 + v * v;
        *o += 2.0 * reg * v / (d * d);
    }
}

/// `log(1 + e^{-z})` without overflow.
fn softplus_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// Non-convex regularized logistic loss over one node's local samples.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
    reg_coeff: f64,
    node_id: usize,
}

impl LogisticModel {
    /// `features` are the rows `θ_ij`, each of unit Euclidean norm; labels are ±1.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<f64>, reg_coeff: f64, node_id: usize) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features[0].len();
        if dim == 0 || features.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("feature rows must share a positive length".into()));
        }
        if let Some((j, _)) = features
            .iter()
            .enumerate()
            .find(|(_, r)| (norm_sq(r).sqrt() - 1.0).abs() > 1e-9)
        {
            return Err(Error::Dataset(format!("feature row {j} is not unit norm")));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::Dataset(format!("label {l} is not in {{-1, +1}}")));
        }
        if !(reg_coeff >= 0.0) {
            return Err(Error::Dataset("regularization coefficient must be nonnegative".into()));
        }
        Ok(Self {
            dim,
            features: features.concat(),
            labels,
            reg_coeff,
            node_id,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn reg_coeff(&self) -> f64 {
        self.reg_coeff
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    pub fn feature(&self, j: usize) -> &[f64] {
        &self.features[j * self.dim..(j + 1) * self.dim]
    }

    pub fn label(&self, j: usize) -> f64 {
        self.labels[j]
    }

    /// Mean logistic loss, without the regularizer.
    pub fn data_loss(&self, x: &[f64]) -> f64 {
        let total: f64 = (0..self.len())
            .map(|j| softplus_neg(self.labels[j] * dot(x, self.feature(j))))
            .sum();
        total / self.len() as f64
    }

    /// Adds `scale · ∇ log(1 + e^{-l⟨x,θ⟩})` for sample `j` into `out`.
    fn add_sample_gradient(&self, j: usize, x: &[f64], scale: f64, out: &mut [f64]) {
        let theta = self.feature(j);
        let l = self.labels[j];
        let coef = -l / (1.0 + (l * dot(x, theta)).exp()) * scale;
        for (o, t) in out.iter_mut().zip(theta) {
            *o += coef * t;
        }
    }

    fn data_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        let inv = 1.0 / self.len() as f64;
        for j in 0..self.len() {
            self.add_sample_gradient(j, x, inv, &mut g);
        }
        g
    }

    /// Mean-squared smoothness constant under unit-norm features: a single
    /// logistic term has Hessian norm at most ¼ and the regularizer at most 2R.
    pub fn smoothness(&self) -> f64 {
        0.25 + 2.0 * self.reg_coeff
    }
}

/// `f(x) = ½ xᵀQx` with oracle `Qx + ξ`, `ξ ~ N(0, σ² I)`.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    dim: usize,
    q: Vec<f64>,
    noise_std: f64,
}

impl QuadraticModel {
    pub fn new(q: Vec<Vec<f64>>, noise_std: f64) -> Result<Self> {
        let dim = q.len();
        if dim == 0 || q.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("Q must be a nonempty square matrix".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                if (q[i][j] - q[j][i]).abs() > 1e-12 {
                    return Err(Error::Dimension(format!("Q is not symmetric at ({i}, {j})")));
                }
            }
        }
        if !(noise_std >= 0.0) || !noise_std.is_finite() {
            return Err(Error::Dimension("noise_std must be finite and nonnegative".into()));
        }
        Ok(Self {
            dim,
            q: q.concat(),
            noise_std,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn q_row(&self, i: usize) -> &[f64] {
        &self.q[i * self.dim..(i + 1) * self.dim]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| dot(self.q_row(i), x)).collect()
    }

    /// Spectral norm `‖Q‖`.
    pub fn smoothness(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.q);
        m.symmetric_eigenvalues().iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }
}

/// A local cost `f_i` (regularizer folded in) together with its sampling model.
#[derive(Debug, Clone)]
pub enum LocalModel {
    Logistic(LogisticModel),
    Quadratic(QuadraticModel),
}

impl From<LogisticModel> for LocalModel {
    fn from(m: LogisticModel) -> Self {
        LocalModel::Logistic(m)
    }
}

impl From<QuadraticModel> for LocalModel {
    fn from(m: QuadraticModel) -> Self {
        LocalModel::Quadratic(m)
    }
}

fn check_finite(x: &[f64], what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl LocalModel {
    pub fn dim(&self) -> usize {
        match self {
            LocalModel::Logistic(m) => m.dim(),
            LocalModel::Quadratic(m) => m.dim(),
        }
    }

    /// Regularization coefficient `R` (zero for quadratics).
    pub fn reg_coeff(&self) -> f64 {
        match self {
            LocalModel::Logistic(m) => m.reg_coeff(),
            LocalModel::Quadratic(_) => 0.0,
        }
    }

    /// Local sample count `m`, when the model is backed by data.
    pub fn local_size(&self) -> Option<usize> {
        match self {
            LocalModel::Logistic(m) => Some(m.len()),
            LocalModel::Quadratic(_) => None,
        }
    }

    /// Smoothness constant `L` used by the step-size schedules.
    pub fn smoothness(&self) -> f64 {
        match self {
            LocalModel::Logistic(m) => m.smoothness(),
            LocalModel::Quadratic(m) => m.smoothness(),
        }
    }

    /// `f_i(x)` without the regularizer.
    pub fn data_loss(&self, x: &[f64]) -> f64 {
        match self {
            LocalModel::Logistic(m) => m.data_loss(x),
            LocalModel::Quadratic(m) => 0.5 * dot(x, &m.apply(x)),
        }
    }

    /// `∇f_i(x)` without the regularizer.
    pub fn data_gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LocalModel::Logistic(m) => m.data_gradient(x),
            LocalModel::Quadratic(m) => m.apply(x),
        }
    }

    /// `f_i(x) + r(x)`.
    pub fn exact_local_loss(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x, "exact_local_loss")?;
        Ok(self.data_loss(x) + regularizer(self.reg_coeff(), x))
    }

    /// `∇f_i(x) + ∇r(x)`.
    pub fn exact_local_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x, "exact_local_gradient")?;
        let mut g = self.data_gradient(x);
        add_regularizer_gradient(self.reg_coeff(), x, &mut g);
        Ok(g)
    }

    fn check_input(&self, x: &[f64], what: &'static str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{what}: point has dimension {}, model has {}",
                x.len(),
                self.dim()
            )));
        }
        check_finite(x, what)
    }

    /// Minibatch of `batch` fresh samples at `x`, drawn from `rng`.
    fn minibatch(&self, x: &[f64], batch: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            LocalModel::Logistic(m) => {
                let mut g = vec![0.0; m.dim()];
                for _ in 0..batch {
                    let j = rng.random_range(0..m.len());
                    m.add_sample_gradient(j, x, 1.0, &mut g);
                }
                let inv = 1.0 / batch as f64;
                g.iter_mut().for_each(|v| *v *= inv);
                add_regularizer_gradient(m.reg_coeff(), x, &mut g);
                g
            }
            LocalModel::Quadratic(m) => {
                // the mean of `batch` i.i.d. N(0, σ²I) draws is N(0, σ²/batch · I)
                let scale = m.noise_std() / (batch as f64).sqrt();
                let mut g = m.apply(x);
                if m.noise_std() > 0.0 {
                    for v in g.iter_mut() {
                        let z: f64 = rng.sample(StandardNormal);
                        *v += scale * z;
                    }
                }
                g
            }
        }
    }

    /// One sample `ξ` evaluated at two points.
    fn paired(&self, x_now: &[f64], x_prev: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        match self {
            LocalModel::Logistic(m) => {
                let j = rng.random_range(0..m.len());
                let eval = |x: &[f64]| {
                    let mut g = vec![0.0; m.dim()];
                    m.add_sample_gradient(j, x, 1.0, &mut g);
                    add_regularizer_gradient(m.reg_coeff(), x, &mut g);
                    g
                };
                (eval(x_now), eval(x_prev))
            }
            LocalModel::Quadratic(m) => {
                let mut now = m.apply(x_now);
                let mut prev = m.apply(x_prev);
                if m.noise_std() > 0.0 {
                    for (a, b) in now.iter_mut().zip(prev.iter_mut()) {
                        let z: f64 = rng.sample(StandardNormal);
                        let xi = m.noise_std() * z;
                        *a += xi;
                        *b += xi;
                    }
                }
                (now, prev)
            }
        }
    }
}

/// Per-node access point to the stochastic oracle.
#[derive(Debug, Clone)]
pub struct OracleHandle<'m> {
    model: &'m LocalModel,
    node_id: usize,
    seed: u64,
    queries: u64,
}

impl<'m> OracleHandle<'m> {
    pub fn new(model: &'m LocalModel, seed: u64, node_id: usize) -> Self {
        Self {
            model,
            node_id,
            seed,
            queries: 0,
        }
    }

    pub fn model(&self) -> &'m LocalModel {
        self.model
    }

    pub fn node_id(&self) -> usize {
        self.node_id
    }

    /// Single-sample oracle queries made so far.
    pub fn query_count(&self) -> u64 {
        self.queries
    }

    fn stream(&self, iteration: usize) -> ChaCha8Rng {
        rng::stream(self.seed, Domain::Oracle, self.node_id as u64, iteration as u64)
    }

    /// `(1/b) Σ_r g_i(x, ξ_{t,r})` using the draws of iteration `t`.
    pub fn sample_gradient(&mut self, x: &[f64], iteration: usize, batch: usize) -> Result<Vec<f64>> {
        if batch == 0 {
            return Err(Error::config("batch", "minibatch size must be at least 1"));
        }
        self.model.check_input(x, "sample_gradient")?;
        let mut rng = self.stream(iteration);
        self.queries += batch as u64;
        Ok(self.model.minibatch(x, batch, &mut rng))
    }

    /// `(g_i(x_now, ξ_t), g_i(x_prev, ξ_t))` with one shared sample; counts as
    /// two queries.
    pub fn paired_sample_gradient(
        &mut self,
        x_now: &[f64],
        x_prev: &[f64],
        iteration: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.model.check_input(x_now, "paired_sample_gradient")?;
        self.model.check_input(x_prev, "paired_sample_gradient")?;
        let mut rng = self.stream(iteration);
        self.queries += 2;
        Ok(self.model.paired(x_now, x_prev, &mut rng))
    }

    /// Empirical `E‖g_i(x, ξ) − ∇f_i(x)‖²` over `draws` single samples. Uses a
    /// separate stream so it never perturbs a run, and is not counted as queries.
    pub fn estimate_noise(&self, x: &[f64], draws: usize) -> Result<f64> {
        if draws < 2 {
            return Err(Error::config("draws", "need at least 2 draws"));
        }
        let exact = self.model.exact_local_gradient(x)?;
        let mut rng = rng::stream(self.seed, Domain::NoiseEstimate, self.node_id as u64, 0);
        let total: f64 = (0..draws)
            .map(|_| {
                let g = self.model.minibatch(x, 1, &mut rng);
                g.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .sum();
        Ok(total / draws as f64)
    }
}
