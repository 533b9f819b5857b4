//! GT-HSGD against GT-DSGD, the GT-SARAH loop and DSGD on synthetic logistic
//! regression over the 20-node undirected exponential graph. Writes mean
//! traces and an SVG into the directory given as the first argument.

use std::path::PathBuf;

use gthsgd::algorithms::{simulate, Algorithm, Problem, RunSettings, Schedule};
use gthsgd::config::PlotMetric;
use gthsgd::dataio::synthesize_logistic;
use gthsgd::report::{mean_trace, render_svg, trace_to_csv, write_atomic, PlotOptions, Series};
use gthsgd::topology::{Family, Topology};

fn main() -> gthsgd::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "comparison_out".into()).into();
    std::fs::create_dir_all(&out)?;
    let n = 20;
    let models = synthesize_logistic(n, 500, 20, 1.0, 3, 1e-4)?.into_iter().map(Into::into).collect();
    let problem = Problem::new(Topology::build(Family::UndirectedExponential, n)?, models)?;
    let epochs = 10.0;
    let budget = (epochs * problem.epoch_size) as usize;
    let runs = [
        ("gt_hsgd", Algorithm::GtHsgd, Schedule::new(1.0, 0.01, 16, budget / 2)?, 1),
        ("gt_dsgd", Algorithm::GtDsgd, Schedule::new(1.0, 1.0, 16, budget / 16)?, 16),
        ("gt_sarah_loop", Algorithm::GtSarahLoop, Schedule::new(0.25, 0.0, 64, budget / 2)?, 1),
        ("dsgd", Algorithm::Dsgd, Schedule::new(1.0, 1.0, 1, budget / 16)?, 16),
    ];
    let mut series = vec![];
    for (name, alg, schedule, batch) in runs {
        let traces = (0..5)
            .map(|seed| {
                let mut s = RunSettings::new(alg, schedule);
                s.batch = batch;
                s.seed = seed;
                s.record_every = (schedule.horizon / 100).max(1);
                simulate(&problem, &s).map(|o| o.trace)
            })
            .collect::<gthsgd::Result<Vec<_>>>()?;
        let mean = mean_trace(&traces)?;
        let csv = trace_to_csv(&mean)?;
        write_atomic(&out.join(format!("{name}.csv")), &csv)?;
        println!("{name:<14} final loss {:.5} after {:.2} epochs", mean.last().unwrap().loss, mean.last().unwrap().epoch);
        series.push(Series::from_csv(name, &csv, PlotMetric::Loss)?);
    }
    let svg = render_svg(&series, &PlotOptions { title: "synthetic logistic, n = 20".into(), y_label: "loss".into(), log_y: true });
    write_atomic(&out.join("comparison.svg"), &svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
