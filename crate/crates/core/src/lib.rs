//! Decentralized stochastic non-convex optimization over a network of nodes.
//!
//! Each node holds a local cost `f_i` behind a stochastic first-order oracle
//! and talks only to its graph neighbors through a doubly-stochastic mixing
//! matrix. The crate simulates GT-HSGD (gradient tracking fed by a hybrid
//! SARAH-style local estimator), its two reductions GT-DSGD (`β = 1`) and the
//! GT-SARAH inner loop (`β = 0`), and the DSGD baseline, and records the loss,
//! stationarity, consensus and tracking errors of every run.
//!
//! ```no_run
//! use gthsgd::algorithms::{corollary1_schedule, simulate, Algorithm, Problem, RunSettings};
//! use gthsgd::dataio::synthesize_logistic;
//! use gthsgd::topology::{Family, Topology};
//!
//! let topology = Topology::build(Family::UndirectedExponential, 20)?;
//! let models = synthesize_logistic(20, 200, 20, 2.0, 1, 1e-4)?
//!     .into_iter()
//!     .map(Into::into)
//!     .collect();
//! let problem = Problem::new(topology, models)?;
//! let schedule = corollary1_schedule(20, 2000, problem.smoothness())?;
//! let out = simulate(&problem, &RunSettings::new(Algorithm::GtHsgd, schedule))?;
//! println!("final loss {}", out.final_record().loss);
//! # Ok::<(), gthsgd::Error>(())
//! ```

pub mod algorithms;
pub mod block;
pub mod cli;
pub mod config;
pub mod dataio;
mod error;
pub mod metrics;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
