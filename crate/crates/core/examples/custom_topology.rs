//! A hand-written weight matrix: validation, spectrum, and a short run.

use gthsgd::algorithms::{simulate, Algorithm, Problem, RunSettings, Schedule};
use gthsgd::dataio::synthesize_quadratic;
use gthsgd::topology::{validate_assumption3, Topology};

fn main() -> gthsgd::Result<()> {
    // A 5-node "star plus ring" with Metropolis-style weights.
    let w = vec![
        vec![0.2, 0.2, 0.2, 0.2, 0.2],
        vec![0.2, 0.4, 0.2, 0.0, 0.2],
        vec![0.2, 0.2, 0.4, 0.2, 0.0],
        vec![0.2, 0.0, 0.2, 0.4, 0.2],
        vec![0.2, 0.2, 0.0, 0.2, 0.4],
    ];
    println!("{}", validate_assumption3(&w));
    let topology = Topology::custom(w)?;

    let broken = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    match Topology::custom(broken) {
        Ok(_) => println!("unexpected: permutation accepted"),
        Err(e) => println!("rejected as expected: {e}"),
    }

    let models = synthesize_quadratic(5, 3, 0.05, 0.5, 1.0, 2)?.into_iter().map(Into::into).collect();
    let problem = Problem::new(topology, models)?;
    let mut s = RunSettings::new(Algorithm::GtHsgd, Schedule::new(0.2, 0.05, 32, 400)?);
    s.record_every = 100;
    s.x0 = Some(vec![2.0; 3]);
    for r in simulate(&problem, &s)?.trace {
        println!("t {:>4}  ‖∇F‖² {:.3e}  consensus {:.3e}", r.t, r.stat_gap, r.consensus);
    }
    Ok(())
}
