use std::path::{Path, PathBuf};

use peakon_core::asymptotics::{fmt_real, permuted_sector_run, run_with_extension, AsymptoticsRun};
use peakon_core::flows::{compare_routes, conserved_report, integrate, lax_to_state, rhs, toda_step, LedgerEntry};
use peakon_core::lax::lax_from_state;
use peakon_core::spectral::lax_spectrum;
use peakon_core::verify::{self, Suite, VerifyOptions};
use peakon_core::wavefield::{emit_grid, WaveGridSpec};
use peakon_core::{Mat, State};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Overrides, RunConfig, Solver};
use crate::error::{core, CliError};
use crate::output::{ledger_csv, read_trajectory, to_json, trajectory_csv, OutputSet};

fn config_value(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn simulate(o: &Overrides) -> Result<(), CliError> {
    let cfg = o.resolve()?;
    let dir = PathBuf::from(&cfg.output_dir);
    let s0 = cfg.initial_state()?;
    let icfg = cfg.integrator_config()?;
    let mut out = OutputSet::new(&dir)?;
    let mut results = serde_json::Map::new();
    results.insert("n".into(), s0.n().into());
    results.insert("sector".into(), serde_json::to_value(&s0.sector).expect("sector"));
    results.insert("t_end".into(), cfg.t_end.into());

    let (times, states, ledger) = match cfg.solver {
        Solver::Ode | Solver::Both => {
            let tr = if cfg.solver == Solver::Both {
                let cmp = core("route comparison", Some(&dir), compare_routes(&s0, &icfg, cfg.dt_max))?;
                results.insert("route_max_discrepancy".into(), cmp.max_discrepancy.into());
                cmp.trajectory
            } else {
                core("integration", Some(&dir), integrate(&s0, &icfg))?
            };
            let drift = core("conserved quantities", Some(&dir), conserved_report(&tr))?;
            results.insert("momentum_drift".into(), drift.momentum_drift().into());
            results.insert("hamiltonian_drift".into(), drift.hamiltonian_drift().into());
            results.insert("steps".into(), serde_json::to_value(&tr.diagnostics).expect("diagnostics"));
            (tr.times, tr.states, tr.ledger)
        }
        Solver::Factorization => {
            let (times, states) = factorization_trajectory(&s0, cfg.t_end, cfg.dt_max, &dir)?;
            let ledger = states
                .iter()
                .map(|s| core("conserved quantities", Some(&dir), LedgerEntry::of(s)))
                .collect::<Result<Vec<_>, _>>()?;
            (times, states, ledger)
        }
    };
    results.insert("samples".into(), times.len().into());
    out.write("trajectory.csv", &trajectory_csv(&times, &states))?;
    out.write("ledger.csv", &ledger_csv(&times, &ledger))?;
    let m = out.finish("simulate", config_value(&cfg), cfg.tail_bound(), results.into())?;
    println!("{}", to_json(&m.results)?.trim_end());
    Ok(())
}

/// Samples the factorization route every `dt_max`. The matrix fixes only
/// the gaps, so the first relabeled position is carried by Simpson's rule
/// on its speed.
fn factorization_trajectory(s0: &State, t_end: f64, dt_max: f64, dir: &Path) -> Result<(Vec<f64>, Vec<State>), CliError> {
    let ctx = |what: &str| format!("factorization route: {what}");
    let sector = s0.sector.clone();
    let sign = sector.flow_sign();
    let anchor_speed = |l: &Mat| -> Result<f64, CliError> {
        let s = core(&ctx("inverse map"), Some(dir), lax_to_state(l, 0.0, &sector))?;
        let (dq, _) = core(&ctx("speeds"), Some(dir), rhs(&s.relabeled()))?;
        Ok(dq[0])
    };
    let mut l = core(&ctx("lax operator"), Some(dir), lax_from_state(s0))?.matrix;
    let mut anchor = s0.relabeled().q[0];
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![s0.clone()];
    let steps = (t_end / dt_max).ceil().max(0.0) as usize;
    for k in 0..steps {
        let h = if k + 1 == steps { t_end - t } else { dt_max };
        let v0 = anchor_speed(&l)?;
        let mid = core(&ctx("step"), Some(dir), toda_step(&l, 0.5 * h, sign))?;
        let vm = anchor_speed(&mid)?;
        l = core(&ctx("step"), Some(dir), toda_step(&mid, 0.5 * h, sign))?;
        let v1 = anchor_speed(&l)?;
        anchor += h / 6.0 * (v0 + 4.0 * vm + v1);
        t = if k + 1 == steps { t_end } else { t + h };
        times.push(t);
        states.push(core(&ctx("inverse map"), Some(dir), lax_to_state(&l, anchor, &sector))?);
    }
    Ok((times, states))
}

#[derive(Serialize)]
struct SpectrumOut {
    lambdas: Vec<f64>,
    phi_first_row: Vec<f64>,
    residual: f64,
}

pub fn spectrum(o: &Overrides) -> Result<(), CliError> {
    let cfg = o.resolve()?;
    let s0 = cfg.initial_state()?;
    let l = core("lax operator", None, lax_from_state(&s0))?.matrix;
    let spec = core("eigendecomposition", None, lax_spectrum(&l, None))?;
    let result = SpectrumOut { lambdas: spec.lambdas.clone(), phi_first_row: spec.first_row(), residual: spec.residual };
    let text = to_json(&result)?;
    if o.out.is_some() {
        let mut out = OutputSet::new(&cfg.output_dir)?;
        out.write("spectrum.json", &text)?;
        out.finish("spectrum", config_value(&cfg), cfg.tail_bound(), serde_json::to_value(&result).expect("spectrum"))?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    /// Criterion key or number; repeatable. `all` selects every criterion.
    #[arg(long, default_value = "all")]
    pub suite: Vec<String>,
    /// Truncation size for the sorting and scattering runs.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the JSON summary here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let mut suites = Vec::new();
    for key in &a.suite {
        if key == "all" {
            suites.extend(Suite::ALL);
            continue;
        }
        let s = Suite::parse(key).ok_or_else(|| {
            let known: Vec<_> = Suite::ALL.iter().map(|s| s.key()).collect();
            CliError::Config(format!("suite: unknown '{key}', expected all or one of {}", known.join(", ")))
        })?;
        suites.push(s);
    }
    suites.sort();
    suites.dedup();
    if a.n < 2 {
        return Err(CliError::Config(format!("n: sorting and scattering need n >= 2, got {}", a.n)));
    }
    let results = verify::run(&suites, VerifyOptions { n: a.n, seed: a.seed });
    for r in &results {
        eprint!("{r}");
    }
    let summary = verify::summary_json(&results);
    let text = to_json(&summary)?;
    if let Some(path) = &a.json {
        std::fs::write(path, &text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    print!("{text}");
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("{} {}", r.id, r.name)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct WavefieldArgs {
    /// Trajectory CSV written by `simulate`.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub count: usize,
    /// Times to sample; the final recorded time when absent.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    pub out: String,
}

pub fn wavefield(a: &WavefieldArgs) -> Result<(), CliError> {
    let path = a.trajectory.as_ref().ok_or_else(|| CliError::Config("trajectory: input CSV is required".into()))?;
    let tr = read_trajectory(path)?;
    let times = match &a.times {
        Some(t) if t.is_empty() => return Err(CliError::Config("times: empty selection".into())),
        Some(t) => t.clone(),
        None => vec![*tr.times.last().expect("non-empty")],
    };
    // default window: every peak at every selected time, plus a margin
    let margin = 10.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in &times {
        let s = core("interpolation", None, tr.state_at(t))?;
        for &q in &s.q {
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    let grid = WaveGridSpec::new(a.x_min.unwrap_or(lo - margin), a.x_max.unwrap_or(hi + margin), a.count)
        .map_err(|e| CliError::Config(format!("grid: {e}")))?;
    let dir = PathBuf::from(&a.out);
    let wg = core("wave grid", Some(&dir), emit_grid(&tr, &grid, &times))?;
    let mut out = OutputSet::new(&dir)?;
    out.write("wavefield.csv", &wg.to_csv())?;
    let results = serde_json::json!({
        "trajectory": path.display().to_string(),
        "grid": grid,
        "times": times,
        "source": wg.source,
        "values": wg.len(),
    });
    let config = serde_json::json!({ "trajectory": path.display().to_string(), "x_min": a.x_min, "x_max": a.x_max, "count": a.count, "times": a.times });
    let m = out.finish("wavefield", config, None, results)?;
    println!("{}", to_json(&m.results)?.trim_end());
    Ok(())
}

/// Runs the sorting and scattering analysis, permuted when the sector
/// carries a permutation.
fn analyse(cfg: &RunConfig, dir: &Path) -> Result<(AsymptoticsRun<f64>, Option<f64>), CliError> {
    let s0 = cfg.initial_state()?;
    let icfg = cfg.integrator_config()?;
    if cfg.asymptotics.cap < cfg.t_end {
        return Err(CliError::Config(format!("asymptotics.cap: {} is below t_end = {}", cfg.asymptotics.cap, cfg.t_end)));
    }
    if s0.sector.permutation().is_some() {
        let r = core("permuted sector run", Some(dir), permuted_sector_run(&s0, &icfg, cfg.asymptotics.cap, cfg.thresholds()))?;
        Ok((r.run, Some(r.relabeling_discrepancy)))
    } else {
        let r = core("asymptotics run", Some(dir), run_with_extension(&s0, &icfg, cfg.asymptotics.cap, cfg.thresholds()))?;
        Ok((r, None))
    }
}

pub fn asymptotics(o: &Overrides) -> Result<(), CliError> {
    let cfg = o.resolve()?;
    let dir = PathBuf::from(&cfg.output_dir);
    let (run, discrepancy) = analyse(&cfg, &dir)?;
    let rep = &run.report;
    let mut out = OutputSet::new(&dir)?;
    out.write("report.json", &core("report", None, rep.to_json())?)?;
    out.write("report.csv", &rep.to_csv())?;
    out.write("trajectory.csv", &trajectory_csv(&run.trajectory.times, &run.trajectory.states))?;
    let results = serde_json::json!({
        "sector": rep.sector,
        "n": rep.n,
        "t_end": rep.t_end,
        "max_momentum_residual": rep.max_momentum_residual,
        "max_slope_residual": rep.max_slope_residual,
        "converged": rep.converged(),
        "separated": rep.separated,
        "extension": rep.extension,
        "relabeling_discrepancy": discrepancy,
        "p_targets": rep.rows.iter().map(|r| r.p_target).collect::<Vec<_>>(),
        "slope_targets": rep.rows.iter().map(|r| r.slope_target).collect::<Vec<_>>(),
    });
    let m = out.finish("asymptotics", config_value(&cfg), cfg.tail_bound(), results)?;
    println!("{}", to_json(&m.results)?.trim_end());
    Ok(())
}

#[derive(Debug, Clone, clap::Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub base: Overrides,
    /// Truncation sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    /// Seeds; one job per (n, seed).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Worker threads; falls back to PEAKON_WORKERS, then the core count.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    n: usize,
    seed: Option<u64>,
    t_end: f64,
    max_momentum_residual: f64,
    max_slope_residual: Option<f64>,
    converged: bool,
    tail_bound: Option<f64>,
    error: Option<String>,
}

pub const WORKERS_ENV: &str = "PEAKON_WORKERS";

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let mut base = a.base.clone();
    // n is per job; validation of the base happens with the first n
    base.n = a.ns.first().copied();
    let cfg = base.resolve()?;
    let workers = match a.workers {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.parse().map_err(|_| CliError::Config(format!("{WORKERS_ENV}: not a count: {v}")))?,
            Err(_) => 0,
        },
    };
    let seeds: Vec<Option<u64>> = match &a.seeds {
        Some(s) => s.iter().map(|&x| Some(x)).collect(),
        None => vec![cfg.seed],
    };
    let mut jobs = Vec::new();
    for &n in &a.ns {
        for &seed in &seeds {
            let mut c = cfg.clone();
            c.n = Some(n);
            c.seed = seed;
            c.validate()?;
            jobs.push(c);
        }
    }
    let dir = PathBuf::from(&cfg.output_dir);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let outcomes: Vec<(SweepRow, Option<CliError>)> = pool.install(|| {
        jobs.par_iter()
            .map(|c| {
                let mut row = SweepRow {
                    n: c.n.expect("set"),
                    seed: c.seed,
                    t_end: f64::NAN,
                    max_momentum_residual: f64::NAN,
                    max_slope_residual: None,
                    converged: false,
                    tail_bound: c.tail_bound(),
                    error: None,
                };
                match analyse(c, &dir) {
                    Ok((run, _)) => {
                        row.t_end = run.report.t_end;
                        row.max_momentum_residual = run.report.max_momentum_residual;
                        row.max_slope_residual = run.report.max_slope_residual;
                        row.converged = run.report.converged();
                        (row, None)
                    }
                    Err(e) => {
                        row.error = Some(e.to_string());
                        (row, Some(e))
                    }
                }
            })
            .collect()
    });
    let (rows, errors): (Vec<SweepRow>, Vec<Option<CliError>>) = outcomes.into_iter().unzip();
    let mut csv = String::from("n,seed,t_end,max_momentum_residual,max_slope_residual,converged\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.seed.map_or(String::new(), |s| s.to_string()),
            fmt_real(r.t_end),
            fmt_real(r.max_momentum_residual),
            r.max_slope_residual.map_or(String::new(), fmt_real),
            r.converged
        ));
    }
    let mut out = OutputSet::new(&dir)?;
    out.write("sweep.csv", &csv)?;
    let results = serde_json::to_value(&rows).expect("rows");
    out.finish("sweep", config_value(&cfg), None, serde_json::json!({ "jobs": results }))?;
    print!("{csv}");
    match errors.into_iter().flatten().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
