//! Evaluation quantities computed from swarm snapshots.

use serde::{Deserialize, Serialize};

use crate::block::{norm_sq, NodeBlock};
use crate::error::{Error, Result};
use crate::oracle::{add_regularizer_gradient, regularizer, LocalModel};

/// Fraction of iterations, counted from the end, used for steady-state averages.
pub const TAIL_FRACTION: f64 = 0.2;

/// One row of a run trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    /// Cumulative per-node oracle queries divided by the epoch size `m`.
    pub epoch: f64,
    /// `F(x̄_t)`.
    pub loss: f64,
    /// `‖∇F(x̄_t)‖²`.
    pub stat_gap: f64,
    /// `‖x_t − Jx_t‖² / n`.
    pub consensus: f64,
    /// `‖y_t − Jy_t‖²`.
    pub tracking: f64,
    /// Cumulative oracle queries made by each node.
    pub queries: u64,
}

fn mean_reg(models: &[LocalModel]) -> f64 {
    models.iter().map(LocalModel::reg_coeff).sum::<f64>() / models.len() as f64
}

/// `F(x̄) = (1/n) Σ f_i(x̄) + r(x̄)`, regularizer counted once.
pub fn global_loss(models: &[LocalModel], x_bar: &[f64]) -> f64 {
    let data: f64 = models.iter().map(|m| m.data_loss(x_bar)).sum::<f64>() / models.len() as f64;
    data + regularizer(mean_reg(models), x_bar)
}

/// `∇F(x) = (1/n) Σ ∇f_i(x) + ∇r(x)`.
pub fn global_gradient(models: &[LocalModel], x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for m in models {
        for (a, b) in g.iter_mut().zip(m.data_gradient(x)) {
            *a += b;
        }
    }
    let inv = 1.0 / models.len() as f64;
    g.iter_mut().for_each(|v| *v *= inv);
    add_regularizer_gradient(mean_reg(models), x, &mut g);
    g
}

/// `‖∇F(x̄)‖²`.
pub fn stationary_gap(models: &[LocalModel], x_bar: &[f64]) -> f64 {
    norm_sq(&global_gradient(models, x_bar))
}

/// `(1/n) Σ_i ‖∇F(x^i)‖²`, the per-node form of the stationarity measure.
pub fn node_stationary_gap(models: &[LocalModel], x: &NodeBlock) -> f64 {
    x.rows_iter().map(|row| stationary_gap(models, row)).sum::<f64>() / x.rows() as f64
}

/// `‖x − Jx‖² / n`.
pub fn consensus_error(x: &NodeBlock) -> f64 {
    x.deviation_sq() / x.rows() as f64
}

/// `‖y − Jy‖²`.
pub fn tracking_error(y: &NodeBlock) -> f64 {
    y.deviation_sq()
}

/// Steady-state error bound `8βν̄²/n + 256λ²β²ν̄²/(1−λ²)³`.
pub fn sse_bound(beta: f64, lambda: f64, nu_bar_sq: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::config("lambda", format!("must lie in [0, 1), got {lambda}")));
    }
    let gap = 1.0 - lambda * lambda;
    Ok(8.0 * beta * nu_bar_sq / n as f64
        + 256.0 * lambda * lambda * beta * beta * nu_bar_sq / (gap * gap * gap))
}

/// Mean of the last `fraction` of `values` (at least one element).
pub fn tail_average(values: &[f64], fraction: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let keep = ((values.len() as f64 * fraction).ceil() as usize).clamp(1, values.len());
    let tail = &values[values.len() - keep..];
    tail.iter().sum::<f64>() / keep as f64
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
