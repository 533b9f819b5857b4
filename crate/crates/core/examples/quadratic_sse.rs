//! Steady-state error of GT-HSGD on a ring of quadratics, against its bound.

use gthsgd::algorithms::{simulate, theorem1_beta, theorem1_stepsize_cap, Algorithm, Problem, RunSettings, Schedule};
use gthsgd::dataio::synthesize_quadratic;
use gthsgd::metrics::{mean_and_stderr, sse_bound};
use gthsgd::topology::{Family, Topology};

fn main() -> gthsgd::Result<()> {
    let (n, p, sigma, horizon) = (8, 10, 0.1, 20_000);
    let models = synthesize_quadratic(n, p, sigma, 0.5, 1.0, 7)?.into_iter().map(Into::into).collect();
    let problem = Problem::new(Topology::build(Family::Ring, n)?, models)?;
    let lambda = problem.topology.lambda();
    let l = problem.smoothness();
    let cap = theorem1_stepsize_cap(n, lambda, l)?;
    println!("lambda = {lambda:.4}, L = {l:.4}, alpha cap = {cap:.4e}");
    for frac in [0.99, 0.5, 0.25] {
        let alpha = frac * cap;
        let beta = theorem1_beta(alpha, l, n);
        let b0 = (1.0 / (beta * beta * horizon as f64)).ceil() as usize;
        let tails: Vec<f64> = (0..10)
            .map(|seed| {
                let mut s = RunSettings::new(Algorithm::GtHsgd, Schedule::new(alpha, beta, b0, horizon)?);
                s.seed = seed;
                s.record_every = 10;
                s.x0 = Some(vec![1e-3; p]);
                let out = simulate(&problem, &s)?;
                let gaps: Vec<f64> = out.trace.iter().filter(|r| r.t >= horizon * 4 / 5).map(|r| r.stat_gap).collect();
                Ok(gaps.iter().sum::<f64>() / gaps.len() as f64)
            })
            .collect::<gthsgd::Result<_>>()?;
        let (m, se) = mean_and_stderr(&tails);
        let bound = sse_bound(beta, lambda, p as f64 * sigma * sigma, n)?;
        println!("alpha = {alpha:.3e} beta = {beta:.3e} b0 = {b0}: tail ‖∇F‖² = {m:.3e} ± {se:.1e}, bound {bound:.3e}");
    }
    Ok(())
}
