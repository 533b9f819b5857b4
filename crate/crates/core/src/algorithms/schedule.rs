//! Step-size, weight and minibatch schedules from the convergence theory.

use crate::error::{Error, Result};

/// Parameters of one GT-HSGD run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Step size `α > 0`.
    pub alpha: f64,
    /// Hybrid weight `β ∈ [0, 1]`; 1 is plain stochastic gradient, 0 is SARAH.
    pub beta: f64,
    /// Initial minibatch size `b0 ≥ 1`.
    pub b0: usize,
    /// Horizon `T ≥ 2`: the run produces iterates `x_0, ..., x_T`.
    pub horizon: usize,
}

impl Schedule {
    pub fn new(alpha: f64, beta: f64, b0: usize, horizon: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::config("alpha", format!("must be positive and finite, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::config("beta", format!("must lie in [0, 1], got {beta}")));
        }
        if b0 == 0 {
            return Err(Error::config("b0", "must be at least 1"));
        }
        if horizon < 2 {
            return Err(Error::config("T", format!("must be at least 2, got {horizon}")));
        }
        Ok(Self {
            alpha,
            beta,
            b0,
            horizon,
        })
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.b0, self.horizon)
    }
}

/// `α = n^{2/3} / (8 L T^{1/3})`, `β = 3 n^{1/3} / (4 T^{2/3})`,
/// `b0 = ⌈T^{1/3} / n^{2/3}⌉`. β is capped at 1 for horizons so short that
/// the closed form leaves `[0, 1]`.
pub fn corollary1_schedule(n: usize, horizon: usize, smoothness: f64) -> Result<Schedule> {
    if n == 0 {
        return Err(Error::config("n", "must be at least 1"));
    }
    if !(smoothness > 0.0) {
        return Err(Error::config("L", format!("must be positive, got {smoothness}")));
    }
    let n_f = n as f64;
    let t_f = horizon as f64;
    let alpha = n_f.powf(2.0 / 3.0) / (8.0 * smoothness * t_f.cbrt());
    let beta = (3.0 * n_f.cbrt() / (4.0 * t_f.powf(2.0 / 3.0))).min(1.0);
    let b0 = (t_f.cbrt() / n_f.powf(2.0 / 3.0)).ceil().max(1.0) as usize;
    Schedule::new(alpha, beta, b0, horizon)
}

/// Horizon beyond which the topology-independent rate holds:
/// `max{1424 λ⁶ n² / (1−λ²)⁶, 35 λ³ √n / (1−λ)^{1.5}}`.
pub fn corollary1_threshold(n: usize, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let n_f = n as f64;
    let gap2 = 1.0 - lambda * lambda;
    let first = 1424.0 * lambda.powi(6) * n_f * n_f / gap2.powi(6);
    let second = 35.0 * lambda.powi(3) * n_f.sqrt() / (1.0 - lambda).powf(1.5);
    first.max(second)
}

/// Whether `horizon` exceeds [`corollary1_threshold`].
pub fn corollary1_valid(n: usize, lambda: f64, horizon: usize) -> bool {
    horizon as f64 > corollary1_threshold(n, lambda)
}

/// The three branches of the step-size region, each already divided by `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeBranches {
    /// `(1−λ²)² / (90 λ²)`
    pub spectral: f64,
    /// `√(n(1−λ)) / (26 λ)`
    pub network: f64,
    /// `1 / (4√3)`
    pub smoothness: f64,
}

impl StepsizeBranches {
    pub fn cap(&self) -> f64 {
        self.spectral.min(self.network).min(self.smoothness)
    }
}

pub fn theorem1_branches(n: usize, lambda: f64, smoothness: f64) -> Result<StepsizeBranches> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::config("lambda", format!("must lie in [0, 1), got {lambda}")));
    }
    if !(smoothness > 0.0) {
        return Err(Error::config("L", format!("must be positive, got {smoothness}")));
    }
    let (spectral, network) = if lambda == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let gap2 = 1.0 - lambda * lambda;
        (
            gap2 * gap2 / (90.0 * lambda * lambda),
            (n as f64 * (1.0 - lambda)).sqrt() / (26.0 * lambda),
        )
    };
    Ok(StepsizeBranches {
        spectral: spectral / smoothness,
        network: network / smoothness,
        smoothness: 1.0 / (4.0 * 3f64.sqrt()) / smoothness,
    })
}

/// Upper end of the admissible step-size interval.
pub fn theorem1_stepsize_cap(n: usize, lambda: f64, smoothness: f64) -> Result<f64> {
    Ok(theorem1_branches(n, lambda, smoothness)?.cap())
}

/// The weight coupled to `α` by the theory: `β = 48 L² α² / n`.
pub fn theorem1_beta(alpha: f64, smoothness: f64, n: usize) -> f64 {
    48.0 * smoothness * smoothness * alpha * alpha / n as f64
}
