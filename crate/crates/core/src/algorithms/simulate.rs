//! Whole-run driver: initialization, stepping, recording and output selection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, TraceRecord};
use crate::oracle::{LocalModel, OracleHandle};
use crate::rng::{self, Domain};
use crate::topology::Topology;

use super::schedule::Schedule;
use super::swarm::{self, NodeOracles, SwarmState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Gradient tracking with the hybrid variance-reduced estimator.
    GtHsgd,
    /// Gradient tracking with plain stochastic gradients (β = 1).
    GtDsgd,
    /// Gradient tracking with the pure SARAH recursion (β = 0).
    GtSarahLoop,
    /// Decentralized SGD without tracking.
    Dsgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::GtHsgd,
        Algorithm::GtDsgd,
        Algorithm::GtSarahLoop,
        Algorithm::Dsgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GtHsgd => "gt_hsgd",
            Algorithm::GtDsgd => "gt_dsgd",
            Algorithm::GtSarahLoop => "gt_sarah_loop",
            Algorithm::Dsgd => "dsgd",
        }
    }

    pub fn tracks_gradients(self) -> bool {
        self != Algorithm::Dsgd
    }

    /// Exact per-node query count after a full run.
    pub fn expected_queries(self, schedule: &Schedule, batch: usize) -> u64 {
        let t = schedule.horizon as u64;
        let b0 = schedule.b0 as u64;
        match self {
            Algorithm::GtHsgd | Algorithm::GtSarahLoop => b0 + 2 * (t - 1),
            Algorithm::GtDsgd => b0 + batch as u64 * (t - 1),
            Algorithm::Dsgd => batch as u64 * t,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config("algorithm", format!("unknown algorithm `{s}`")))
    }
}

/// A network together with its local costs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub topology: Topology,
    pub models: Vec<LocalModel>,
    /// Per-node oracle queries that make one epoch.
    pub epoch_size: f64,
}

/// Default epoch size for models not backed by a local dataset.
pub const DEFAULT_EPOCH_SIZE: f64 = 1000.0;

impl Problem {
    pub fn new(topology: Topology, models: Vec<LocalModel>) -> Result<Self> {
        if models.len() != topology.n() {
            return Err(Error::Dimension(format!(
                "{} local models for a {}-node topology",
                models.len(),
                topology.n()
            )));
        }
        let dim = models[0].dim();
        if models.iter().any(|m| m.dim() != dim) {
            return Err(Error::Dimension("local models disagree on dimension".into()));
        }
        let sizes: Option<Vec<usize>> = models.iter().map(LocalModel::local_size).collect();
        let epoch_size = match sizes {
            Some(s) => s.iter().sum::<usize>() as f64 / s.len() as f64,
            None => DEFAULT_EPOCH_SIZE,
        };
        Ok(Self {
            topology,
            models,
            epoch_size,
        })
    }

    pub fn with_epoch_size(mut self, epoch_size: f64) -> Self {
        self.epoch_size = epoch_size;
        self
    }

    pub fn n(&self) -> usize {
        self.models.len()
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    /// Largest local smoothness constant.
    pub fn smoothness(&self) -> f64 {
        self.models.iter().map(LocalModel::smoothness).fold(0.0, f64::max)
    }
}

/// Everything about a run except the problem it runs on.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    /// Per-iteration minibatch after initialization (GT-DSGD and DSGD).
    pub batch: usize,
    /// Common starting point; zeros when `None`.
    pub x0: Option<Vec<f64>>,
    pub seed: u64,
    pub output_seed: u64,
    pub record_every: usize,
    pub check_invariants: bool,
    /// Also average `(1/n)Σ_i ‖∇F(x_t^i)‖²` over every iterate, the expected
    /// stationarity of the uniformly selected output. Costs `n` full gradients
    /// per iteration.
    pub track_output_expectation: bool,
    pub threads: usize,
}

impl RunSettings {
    pub fn new(algorithm: Algorithm, schedule: Schedule) -> Self {
        Self {
            algorithm,
            schedule,
            batch: 1,
            x0: None,
            seed: 0,
            output_seed: 0,
            record_every: 1,
            check_invariants: true,
            track_output_expectation: false,
            threads: 1,
        }
    }

    /// Effective schedule: β forced to 1 or 0 for the two reductions.
    pub fn effective_schedule(&self) -> Schedule {
        let mut s = self.schedule;
        match self.algorithm {
            Algorithm::GtDsgd => s.beta = 1.0,
            Algorithm::GtSarahLoop => s.beta = 0.0,
            _ => {}
        }
        s
    }
}

/// Product of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    /// `x̃_T`, drawn uniformly from `{x_t^i : 0 ≤ t ≤ T, i ∈ nodes}`.
    pub output: Vec<f64>,
    /// `(t, i)` of the selected iterate.
    pub output_index: (usize, usize),
    /// `‖∇F(x̃_T)‖²`.
    pub output_stat_gap: f64,
    /// Mean over every iterate of `‖∇F(x_t^i)‖²`, if requested.
    pub expected_output_stat_gap: Option<f64>,
    pub queries_per_node: Vec<u64>,
    pub final_state: SwarmState,
}

impl RunOutput {
    pub fn final_record(&self) -> &TraceRecord {
        self.trace.last().expect("trace always holds t = 0")
    }
}

fn record(problem: &Problem, state: &SwarmState, queries: u64) -> TraceRecord {
    let x_bar = state.x_bar();
    TraceRecord {
        t: state.t,
        epoch: queries as f64 / problem.epoch_size,
        loss: metrics::global_loss(&problem.models, &x_bar),
        stat_gap: metrics::stationary_gap(&problem.models, &x_bar),
        consensus: metrics::consensus_error(&state.x),
        tracking: metrics::tracking_error(&state.y),
        queries,
    }
}

/// Executes one run of `settings.schedule.horizon` iterations.
pub fn simulate(problem: &Problem, settings: &RunSettings) -> Result<RunOutput> {
    let schedule = settings.effective_schedule();
    let horizon = schedule.horizon;
    let n = problem.n();
    let p = problem.dim();
    if settings.record_every == 0 {
        return Err(Error::config("record_every", "must be at least 1"));
    }
    if settings.batch == 0 {
        return Err(Error::config("batch", "must be at least 1"));
    }
    let x0 = settings.x0.clone().unwrap_or_else(|| vec![0.0; p]);
    if x0.len() != p {
        return Err(Error::Dimension(format!("x0 has length {}, models have dimension {p}", x0.len())));
    }

    let handles = problem
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| OracleHandle::new(m, settings.seed, i))
        .collect();
    let mut oracles = NodeOracles::new(handles, settings.threads)?;

    let pick = rng::stream(settings.output_seed, Domain::Output, 0, 0).random_range(0..(horizon + 1) * n);
    let output_index = (pick / n, pick % n);
    let mut output = None;
    let mut node_gap_sum = 0.0;

    let mut observe = |state: &SwarmState, output: &mut Option<Vec<f64>>| {
        if state.t == output_index.0 {
            *output = Some(state.x.row(output_index.1).to_vec());
        }
        if settings.track_output_expectation {
            node_gap_sum += metrics::node_stationary_gap(&problem.models, &state.x);
        }
    };

    let initial = SwarmState::initial(n, &x0);
    let mut trace = vec![record(problem, &initial, 0)];
    observe(&initial, &mut output);

    let checks = settings.check_invariants;
    let queries = |o: &NodeOracles<'_>| o.handles()[0].query_count();
    let mut state = match settings.algorithm {
        Algorithm::Dsgd => initial,
        _ => swarm::init_gt_hsgd(&problem.topology, &mut oracles, &x0, &schedule, checks)?,
    };
    let wants_record = |t: usize| t % settings.record_every == 0 || t == horizon;
    if state.t > 0 {
        observe(&state, &mut output);
        if wants_record(state.t) {
            trace.push(record(problem, &state, queries(&oracles)));
        }
    }

    while state.t < horizon {
        state = match settings.algorithm {
            Algorithm::GtHsgd | Algorithm::GtSarahLoop => {
                swarm::step_gt_hsgd(&state, &problem.topology, &mut oracles, &schedule, checks)?
            }
            Algorithm::GtDsgd => swarm::step_gt_dsgd(
                &state,
                &problem.topology,
                &mut oracles,
                schedule.alpha,
                settings.batch,
                checks,
            )?,
            Algorithm::Dsgd => swarm::step_dsgd(
                &state,
                &problem.topology,
                &mut oracles,
                schedule.alpha,
                settings.batch,
                checks,
            )?,
        };
        observe(&state, &mut output);
        if wants_record(state.t) {
            trace.push(record(problem, &state, queries(&oracles)));
        }
    }

    let queries_per_node = oracles.query_counts();
    let expected = settings.algorithm.expected_queries(&schedule, settings.batch);
    if checks {
        if let Some(&bad) = queries_per_node.iter().find(|&&q| q != expected) {
            return Err(Error::Invariant {
                t: horizon,
                what: "per-node query count",
                deviation: (bad as f64 - expected as f64).abs(),
                tolerance: 0.0,
            });
        }
    }

    let output = output.expect("selected iteration lies in 0..=T");
    let output_stat_gap = metrics::stationary_gap(&problem.models, &output);
    Ok(RunOutput {
        trace,
        output_stat_gap,
        output,
        output_index,
        expected_output_stat_gap: settings
            .track_output_expectation
            .then(|| node_gap_sum / (horizon + 1) as f64),
        queries_per_node,
        final_state: state,
    })
}
