//! λ and the admissible step size for every built-in family.
//!
//! `cargo run --release --example spectrum -- 20`

use gthsgd::algorithms::{corollary1_threshold, theorem1_branches};
use gthsgd::topology::{Family, Topology, WeightRule};

fn main() -> gthsgd::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    println!("{:<15} {:>6} {:>9} {:>12} {:>14}", "family", "rule", "lambda", "alpha cap", "T threshold");
    for fam in Family::BUILTIN {
        for rule in [WeightRule::Equal, WeightRule::Lazy] {
            let Ok(t) = Topology::build_with_rule(fam, n, rule) else { continue };
            let cap = theorem1_branches(n, t.lambda(), 0.25 + 2e-4)?.cap();
            let marker = if rule == fam.default_rule() { "*" } else { "" };
            println!(
                "{:<15} {:>6} {:>9.4} {:>12.4e} {:>14.3e}",
                format!("{fam}{marker}"),
                format!("{rule:?}").to_lowercase(),
                t.lambda(),
                cap,
                corollary1_threshold(n, t.lambda())
            );
        }
    }
    println!("* default rule; cap uses the logistic smoothness 1/4 + 2R with R = 1e-4");
    Ok(())
}
