//! Synchronous iterations over the whole network.
//!
//! Within a step every node queries its own oracle against a read-only view of
//! the previous state, so the per-node phase can run on a thread pool without
//! changing any result. The mixing products that follow are the barrier.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::block::NodeBlock;
use crate::error::{Error, Result};
use crate::oracle::OracleHandle;
use crate::topology::Topology;

use super::schedule::Schedule;

/// Tolerance of the tracking identity `ȳ_{t+1} = v̄_t`.
pub const TRACKING_TOL: f64 = 1e-10;
/// Tolerance of the mean recursion `x̄_{t+1} = x̄_t − α v̄_t`.
pub const MEAN_RECURSION_TOL: f64 = 1e-12;

/// Network state at iteration `t`.
///
/// `v` holds the most recent local estimators `v_{t−1}` (the ones folded into
/// `y_t`) and `v_prev` the ones before, `v_{t−2}`. `x_prev` is `x_{t−1}`, the
/// second evaluation point of the paired oracle query.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub t: usize,
    pub x: NodeBlock,
    pub x_prev: NodeBlock,
    pub y: NodeBlock,
    pub v: NodeBlock,
    pub v_prev: NodeBlock,
    /// Largest row norm that has entered the tracker so far; the scale against
    /// which accumulated rounding in the identities is measured.
    magnitude: f64,
}

impl SwarmState {
    /// `x_0^i = x0` for every node, all other blocks zero, `t = 0`.
    pub fn initial(n: usize, x0: &[f64]) -> Self {
        let p = x0.len();
        Self {
            t: 0,
            x: NodeBlock::broadcast(n, x0),
            x_prev: NodeBlock::broadcast(n, x0),
            y: NodeBlock::zeros(n, p),
            v: NodeBlock::zeros(n, p),
            v_prev: NodeBlock::zeros(n, p),
            magnitude: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn dim(&self) -> usize {
        self.x.cols()
    }

    pub fn x_bar(&self) -> Vec<f64> {
        self.x.mean_row()
    }
}

/// The per-node oracles of a network plus the optional pool that drives them.
pub struct NodeOracles<'m> {
    handles: Vec<OracleHandle<'m>>,
    pool: Option<ThreadPool>,
}

impl<'m> NodeOracles<'m> {
    /// `threads <= 1` evaluates nodes sequentially.
    pub fn new(handles: Vec<OracleHandle<'m>>, threads: usize) -> Result<Self> {
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::config("threads", e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Self { handles, pool })
    }

    pub fn sequential(handles: Vec<OracleHandle<'m>>) -> Self {
        Self { handles, pool: None }
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    pub fn handles(&self) -> &[OracleHandle<'m>] {
        &self.handles
    }

    pub fn query_counts(&self) -> Vec<u64> {
        self.handles.iter().map(OracleHandle::query_count).collect()
    }

    /// Runs `f(node, handle)` for every node and stacks the returned rows.
    fn per_node<F>(&mut self, f: F) -> Result<NodeBlock>
    where
        F: Fn(usize, &mut OracleHandle<'m>) -> Result<Vec<f64>> + Sync + Send,
    {
        let rows: Vec<Vec<f64>> = match &self.pool {
            Some(pool) => {
                let handles = &mut self.handles;
                pool.install(|| {
                    handles
                        .par_iter_mut()
                        .enumerate()
                        .map(|(i, h)| f(i, h))
                        .collect::<Result<Vec<_>>>()
                })?
            }
            None => self
                .handles
                .iter_mut()
                .enumerate()
                .map(|(i, h)| f(i, h))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(NodeBlock::from_rows(&rows))
    }
}

fn check_shapes(state: &SwarmState, topology: &Topology, oracles: &NodeOracles<'_>) -> Result<()> {
    if oracles.len() != topology.n() || state.n() != topology.n() {
        return Err(Error::Dimension(format!(
            "{} oracles and {} state rows for a {}-node topology",
            oracles.len(),
            state.n(),
            topology.n()
        )));
    }
    if let Some(h) = oracles.handles().iter().find(|h| h.model().dim() != state.dim()) {
        return Err(Error::Dimension(format!(
            "node {} model has dimension {}, iterate has {}",
            h.node_id(),
            h.model().dim(),
            state.dim()
        )));
    }
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `y_{t+1} = W(y_t + v_t − v_{t−1})`, `x_{t+1} = W(x_t − α y_{t+1})`, then
/// the identity checks and the index shift.
fn track_and_mix(
    state: &SwarmState,
    v_new: NodeBlock,
    topology: &Topology,
    alpha: f64,
    checks: bool,
) -> Result<SwarmState> {
    let z = state.y.axpy(1.0, &v_new).axpy(-1.0, &state.v);
    let y_next = topology.mix(&z);
    let x_next = topology.mix(&state.x.axpy(-alpha, &y_next));
    let t_next = state.t + 1;
    if !x_next.is_finite() || !y_next.is_finite() {
        return Err(Error::Diverged(t_next));
    }
    let magnitude = state
        .magnitude
        .max(v_new.max_row_norm())
        .max(z.max_row_norm())
        .max(y_next.max_row_norm());

    if checks {
        let v_bar = v_new.mean_row();
        let y_bar = y_next.mean_row();
        let dev = max_abs_diff(&y_bar, &v_bar) / magnitude.max(f64::MIN_POSITIVE);
        if dev > TRACKING_TOL {
            return Err(Error::Invariant {
                t: t_next,
                what: "tracking identity",
                deviation: dev,
                tolerance: TRACKING_TOL,
            });
        }
        mean_recursion_check(state, &x_next, &v_bar, alpha, magnitude)?;
    }

    Ok(SwarmState {
        t: t_next,
        x_prev: state.x.clone(),
        x: x_next,
        y: y_next,
        v_prev: state.v.clone(),
        v: v_new,
        magnitude,
    })
}

fn mean_recursion_check(
    state: &SwarmState,
    x_next: &NodeBlock,
    direction_bar: &[f64],
    alpha: f64,
    magnitude: f64,
) -> Result<()> {
    let predicted: Vec<f64> = state
        .x_bar()
        .iter()
        .zip(direction_bar)
        .map(|(x, d)| x - alpha * d)
        .collect();
    let scale = state
        .x
        .max_row_norm()
        .max(x_next.max_row_norm())
        .max(alpha * magnitude)
        .max(f64::MIN_POSITIVE);
    let dev = max_abs_diff(&x_next.mean_row(), &predicted) / scale;
    if dev > MEAN_RECURSION_TOL {
        return Err(Error::Invariant {
            t: state.t + 1,
            what: "mean recursion",
            deviation: dev,
            tolerance: MEAN_RECURSION_TOL,
        });
    }
    Ok(())
}

/// Initialization: `v_0` from a `b0` minibatch at `x_0`, then the first
/// tracking and mixing round. Returns the state at `t = 1`.
pub fn init_gt_hsgd(
    topology: &Topology,
    oracles: &mut NodeOracles<'_>,
    x0: &[f64],
    schedule: &Schedule,
    checks: bool,
) -> Result<SwarmState> {
    let state = SwarmState::initial(topology.n(), x0);
    check_shapes(&state, topology, oracles)?;
    let b0 = schedule.b0;
    let v0 = oracles.per_node(|_, h| h.sample_gradient(x0, 0, b0))?;
    track_and_mix(&state, v0, topology, schedule.alpha, checks)
}

/// One GT-HSGD iteration `t → t+1` with the hybrid estimator
/// `v_t = g(x_t, ξ_t) + (1−β)(v_{t−1} − g(x_{t−1}, ξ_t))`.
pub fn step_gt_hsgd(
    state: &SwarmState,
    topology: &Topology,
    oracles: &mut NodeOracles<'_>,
    schedule: &Schedule,
    checks: bool,
) -> Result<SwarmState> {
    if state.t < 1 {
        return Err(Error::config("t", "GT-HSGD steps start from the initialized state t = 1"));
    }
    check_shapes(state, topology, oracles)?;
    let t = state.t;
    let keep = 1.0 - schedule.beta;
    let v_new = oracles.per_node(|i, h| {
        let (g_now, g_prev) = h.paired_sample_gradient(state.x.row(i), state.x_prev.row(i), t)?;
        Ok(g_now
            .iter()
            .zip(&g_prev)
            .zip(state.v.row(i))
            .map(|((gn, gp), v)| gn + keep * (v - gp))
            .collect())
    })?;
    track_and_mix(state, v_new, topology, schedule.alpha, checks)
}

/// Gradient tracking with a plain minibatch gradient, `v_t = g(x_t, ξ_t)`.
/// Shares the initialization of [`init_gt_hsgd`].
pub fn step_gt_dsgd(
    state: &SwarmState,
    topology: &Topology,
    oracles: &mut NodeOracles<'_>,
    alpha: f64,
    batch: usize,
    checks: bool,
) -> Result<SwarmState> {
    if state.t < 1 {
        return Err(Error::config("t", "GT-DSGD steps start from the initialized state t = 1"));
    }
    check_shapes(state, topology, oracles)?;
    let t = state.t;
    let v_new = oracles.per_node(|i, h| h.sample_gradient(state.x.row(i), t, batch))?;
    track_and_mix(state, v_new, topology, alpha, checks)
}

/// Adapt-then-combine DSGD: `x_{t+1} = W(x_t − α g_t)`. `y` stays zero and
/// `v` holds the last stochastic gradients.
pub fn step_dsgd(
    state: &SwarmState,
    topology: &Topology,
    oracles: &mut NodeOracles<'_>,
    alpha: f64,
    batch: usize,
    checks: bool,
) -> Result<SwarmState> {
    check_shapes(state, topology, oracles)?;
    let t = state.t;
    let grads = oracles.per_node(|i, h| h.sample_gradient(state.x.row(i), t, batch))?;
    let x_next = topology.mix(&state.x.axpy(-alpha, &grads));
    if !x_next.is_finite() {
        return Err(Error::Diverged(t + 1));
    }
    let magnitude = state.magnitude.max(grads.max_row_norm());
    if checks {
        mean_recursion_check(state, &x_next, &grads.mean_row(), alpha, magnitude)?;
    }
    Ok(SwarmState {
        t: t + 1,
        x_prev: state.x.clone(),
        x: x_next,
        y: state.y.clone(),
        v_prev: state.v.clone(),
        v: grads,
        magnitude,
    })
}
