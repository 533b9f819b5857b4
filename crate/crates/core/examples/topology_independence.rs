//! Final loss of GT-HSGD with the horizon-based schedule on each topology.

use gthsgd::algorithms::{corollary1_schedule, corollary1_valid, simulate, Algorithm, Problem, RunSettings};
use gthsgd::dataio::synthesize_logistic;
use gthsgd::topology::{Family, Topology};

fn main() -> gthsgd::Result<()> {
    let n = 20;
    let horizon: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let models: Vec<_> = synthesize_logistic(n, 500, 20, 1.0, 3, 1e-4)?.into_iter().map(Into::into).collect();
    for fam in Family::BUILTIN {
        let problem = Problem::new(Topology::build(fam, n)?, models.clone())?;
        let schedule = corollary1_schedule(n, horizon, problem.smoothness())?;
        let mut total = 0.0;
        for seed in 0..3 {
            let mut s = RunSettings::new(Algorithm::GtHsgd, schedule);
            s.seed = seed;
            s.record_every = horizon;
            total += simulate(&problem, &s)?.final_record().loss;
        }
        println!(
            "{fam:<15} lambda {:.3}  horizon large enough: {:<5}  final loss {:.6}",
            problem.topology.lambda(),
            corollary1_valid(n, problem.topology.lambda(), horizon),
            total / 3.0
        );
    }
    Ok(())
}
