//! Load a LIBSVM or CSV file, normalize and shard it over nodes, and run
//! GT-HSGD. Without an argument a small demo file is generated first.
//!
//! `cargo run --release --example load_dataset -- data/a9a.libsvm 20`

use gthsgd::algorithms::{corollary1_schedule, simulate, Algorithm, Problem, RunSettings};
use gthsgd::dataio::{load_dataset, normalize_rows, partition_uniform, write_csv, Dataset, Format};
use gthsgd::topology::{Family, Topology};

fn main() -> gthsgd::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = match args.next() {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let path = std::env::temp_dir().join("gthsgd_demo.csv");
            let rows: Vec<Vec<f64>> = (0..400).map(|k| vec![(k % 7) as f64 - 3.0, (k % 5) as f64, 1.0]).collect();
            let labels = rows.iter().map(|r| if r[0] + 0.5 * r[1] > 0.5 { 1.0 } else { -1.0 }).collect();
            write_csv(&Dataset::new(rows, labels, "demo")?, &path)?;
            path
        }
    };
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let data = normalize_rows(&load_dataset(&path, Format::from_path(&path))?)?;
    println!("{}: {} rows, dimension {}", path.display(), data.len(), data.dim());
    let models = partition_uniform(&data, n, 0, 1e-4)?.into_iter().map(Into::into).collect();
    let problem = Problem::new(Topology::build(Family::UndirectedExponential, n)?, models)?;
    let schedule = corollary1_schedule(n, 5000, problem.smoothness())?;
    let out = simulate(&problem, &RunSettings { record_every: 500, ..RunSettings::new(Algorithm::GtHsgd, schedule) })?;
    for r in &out.trace {
        println!("t {:>5}  epoch {:>7.3}  loss {:.6}  ‖∇F‖² {:.3e}", r.t, r.epoch, r.loss, r.stat_gap);
    }
    Ok(())
}
