//! Command implementations behind the `gthsgd` binary.
//!
//! Each command returns its process exit code: 0 on success, 1 for usage or
//! configuration errors, 2 when a runtime invariant check aborts a run.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::algorithms::{simulate, theorem1_branches, theorem1_stepsize_cap, RunOutput};
use crate::config::{ExperimentSpec, PlotMetric, RunConfig};
use crate::error::{Error, Result};
use crate::metrics::{self, TAIL_FRACTION};
use crate::report::{self, PlotOptions, Series};
use crate::topology::{self, Family, Topology};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "GTHSGD_THREADS";

/// Thread count from `GTHSGD_THREADS`, defaulting to the available parallelism.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_runtime_violation() {
        EXIT_INVARIANT
    } else {
        EXIT_USAGE
    }
}

/// Runs one config and returns its output along with the resolved metadata.
fn execute(cfg: &RunConfig, threads: usize, warn: &mut dyn Write) -> Result<(RunOutput, serde_json::Value)> {
    let (problem, settings) = cfg.prepare(threads)?;
    let lambda = problem.topology.lambda();
    let smoothness = problem.smoothness();
    let schedule = settings.effective_schedule();
    let cap = if lambda < 1.0 {
        theorem1_stepsize_cap(problem.n(), lambda, smoothness).ok()
    } else {
        None
    };
    if let Some(cap) = cap {
        if schedule.alpha >= cap {
            let _ = writeln!(
                warn,
                "warning: {}: alpha = {} exceeds the step-size cap {cap:.6e} for lambda = {lambda:.4}, L = {smoothness:.4}; running anyway",
                cfg.name, schedule.alpha
            );
        }
    }
    let out = simulate(&problem, &settings)?;
    let meta = json!({
        "name": cfg.name,
        "algorithm": cfg.algorithm.name(),
        "n": problem.n(),
        "p": problem.dim(),
        "lambda": lambda,
        "L": smoothness,
        "alpha": schedule.alpha,
        "beta": schedule.beta,
        "b0": schedule.b0,
        "T": schedule.horizon,
        "batch": settings.batch,
        "seed": settings.seed,
        "output_seed": settings.output_seed,
        "epoch_size": problem.epoch_size,
        "tail_fraction": TAIL_FRACTION,
        "stepsize_cap": cap,
        "output_index": [out.output_index.0, out.output_index.1],
        "output_stat_gap": out.output_stat_gap,
        "queries_per_node": out.queries_per_node[0],
    });
    Ok((out, meta))
}

fn write_run_files(dir: &Path, stem: &str, out: &RunOutput, meta: &serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    report::write_atomic(&csv_path, &report::trace_to_csv(&out.trace)?)?;
    report::write_atomic(
        &dir.join(format!("{stem}.meta.json")),
        &(serde_json::to_string_pretty(meta)? + "\n"),
    )?;
    Ok(csv_path)
}

/// `run <config.json>`: one run, one CSV.
pub fn cmd_run(config_path: &Path, out_dir: &Path, threads: usize, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = (|| {
        let cfg = RunConfig::load(config_path)?;
        let (out, meta) = execute(&cfg, threads, stderr)?;
        let csv = write_run_files(out_dir, &cfg.name, &out, &meta)?;
        let last = out.final_record();
        let tail: Vec<f64> = out.trace.iter().map(|r| r.stat_gap).collect();
        let _ = writeln!(
            stdout,
            "{}: T={} loss={:.6} stat_gap={:.6e} tail_stat_gap={:.6e} consensus={:.3e} queries/node={} -> {}",
            cfg.name,
            last.t,
            last.loss,
            last.stat_gap,
            metrics::tail_average(&tail, TAIL_FRACTION),
            last.consensus,
            last.queries,
            csv.display()
        );
        Ok(())
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Renders the comparison plot from CSV files on disk.
pub fn plot_csvs(csvs: &[(String, PathBuf)], metric: PlotMetric, log_y: bool, title: &str) -> Result<String> {
    let series = csvs
        .iter()
        .map(|(name, path)| Series::from_csv(name.clone(), &std::fs::read_to_string(path)?, metric))
        .collect::<Result<Vec<_>>>()?;
    let y_label = match (metric, log_y) {
        (PlotMetric::Loss, false) => "loss F(x̄)",
        (PlotMetric::Loss, true) => "log10 loss F(x̄)",
        (PlotMetric::StatGap, false) => "‖∇F(x̄)‖²",
        (PlotMetric::StatGap, true) => "log10 ‖∇F(x̄)‖²",
    };
    Ok(report::render_svg(
        &series,
        &PlotOptions {
            title: title.to_string(),
            y_label: y_label.to_string(),
            log_y,
        },
    ))
}

/// `compare <spec.json>`: every run × `repeat` seeds, per-seed and averaged
/// CSVs, and optionally an SVG with one polyline per run.
pub fn cmd_compare(
    spec_path: &Path,
    out_dir: Option<&Path>,
    threads: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let result = (|| {
        let spec = ExperimentSpec::load(spec_path)?;
        let dir = out_dir.map_or_else(|| spec.output_dir.clone(), Path::to_path_buf);
        std::fs::create_dir_all(&dir)?;

        let jobs: Vec<(usize, u64)> = (0..spec.runs.len())
            .flat_map(|r| (0..spec.repeat as u64).map(move |k| (r, k)))
            .collect();
        let run_job = |&(r, k): &(usize, u64)| {
            let cfg = spec.runs[r].replicate(k);
            let mut warnings = Vec::new();
            execute(&cfg, 1, &mut warnings)
                .map(|(out, meta)| (out, meta, warnings))
                .map_err(|e| Error::RunFailed {
                    name: format!("{} (seed {})", cfg.name, cfg.seed),
                    source: Box::new(e),
                })
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?;
        let results: Vec<Result<_>> = pool.install(|| jobs.par_iter().map(run_job).collect());

        let mut outputs = Vec::with_capacity(results.len());
        for res in results {
            let (out, meta, warnings) = res?;
            stderr.write_all(&warnings)?;
            outputs.push((out, meta));
        }

        let mut mean_csvs = Vec::new();
        for (r, cfg) in spec.runs.iter().enumerate() {
            let mine = &outputs[r * spec.repeat..(r + 1) * spec.repeat];
            for (k, (out, meta)) in mine.iter().enumerate() {
                write_run_files(&dir, &format!("{}_seed{k}", cfg.name), out, meta)?;
            }
            let traces: Vec<_> = mine.iter().map(|(o, _)| o.trace.clone()).collect();
            let mean = report::mean_trace(&traces)?;
            let path = dir.join(format!("{}_mean.csv", cfg.name));
            report::write_atomic(&path, &report::trace_to_csv(&mean)?)?;
            let last = mean.last().expect("nonempty trace");
            let _ = writeln!(
                stdout,
                "{}: {} seeds, final mean loss={:.6} stat_gap={:.6e} epochs={:.3} -> {}",
                cfg.name,
                spec.repeat,
                last.loss,
                last.stat_gap,
                last.epoch,
                path.display()
            );
            mean_csvs.push((cfg.name.clone(), path));
        }

        if spec.plot {
            let title = spec_path
                .file_stem()
                .map_or_else(|| "comparison".into(), |s| s.to_string_lossy().into_owned());
            let svg = plot_csvs(&mean_csvs, spec.metric, spec.log_y, &title)?;
            let svg_path = dir.join(format!("{title}.svg"));
            report::write_atomic(&svg_path, &svg)?;
            let _ = writeln!(stdout, "plot -> {}", svg_path.display());
        }
        Ok(())
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// `spectrum --family <f> --n <int> [--L <float>] [--matrix <path>]`.
pub fn cmd_spectrum(
    family: &str,
    n: Option<usize>,
    smoothness: f64,
    matrix: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let result = (|| {
        let family: Family = family.parse()?;
        let weights = match (family, matrix) {
            (Family::Custom, Some(path)) => topology::read_weight_matrix(path)?,
            (Family::Custom, None) => {
                return Err(Error::config("matrix", "custom family needs --matrix <path>"))
            }
            (f, _) => {
                let n = n.ok_or_else(|| Error::config("n", "required for built-in families"))?;
                Topology::build(f, n)?.weights().to_vec()
            }
        };
        let report = topology::validate_assumption3(&weights);
        let n = weights.len();
        let _ = writeln!(stdout, "family: {family}  n: {n}");
        let support: Vec<usize> = weights
            .iter()
            .map(|r| r.iter().filter(|&&w| w > 0.0).count())
            .collect();
        let _ = writeln!(
            stdout,
            "nonzeros per row: min {} max {}  diagonal min {:.6}",
            support.iter().min().copied().unwrap_or(0),
            support.iter().max().copied().unwrap_or(0),
            (0..n).map(|i| weights[i].get(i).copied().unwrap_or(0.0)).fold(f64::INFINITY, f64::min)
        );
        if n <= 12 {
            for row in &weights {
                let cells: Vec<String> = row.iter().map(|w| format!("{w:.4}")).collect();
                let _ = writeln!(stdout, "  {}", cells.join(" "));
            }
        }
        let _ = writeln!(stdout, "lambda: {:.6}", report.lambda);
        if report.lambda < 1.0 {
            let b = theorem1_branches(n, report.lambda, smoothness)?;
            let _ = writeln!(
                stdout,
                "step-size cap (L = {smoothness}): {:.6e}  [branches {:.6e} {:.6e} {:.6e}]",
                b.cap(),
                b.spectral,
                b.network,
                b.smoothness
            );
        }
        let _ = writeln!(stdout, "{report}");
        if report.passed() {
            Ok(())
        } else {
            Err(Error::WeightMatrix("matrix fails the network assumption".into()))
        }
    })();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
