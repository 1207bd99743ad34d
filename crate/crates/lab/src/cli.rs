//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use erw_core::coupling::{build_pair, default_burnin, sample_noise, verify};
use erw_core::estimators::simulate_cycles;
use erw_core::oracle::{
    exact_speed_and_derivative, girsanov_check, girsanov_check_rational, Difference, Rational,
};
use erw_core::renewal::{detect_direct, extract_cycles, ConfirmPolicy, Cycle};
use erw_core::rng::{derive_seed, stream_rng};
use erw_core::walk::{simulate_trajectory, Excitation};
use erw_core::weights::{FlagSource, WeightTrace};
use serde_json::json;

use crate::config::{EstimatorKind, ExperimentConfig, Kind, Threshold};
use crate::error::{LabError, LabResult};
use crate::exact::parallel_expectation;
use crate::harness::{run_experiment, run_replicates};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "erwlab", version, about = "Excited random walk laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Walk and run settings; each flag overrides the config file.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Excitation threshold, a positive integer or "inf".
    #[arg(long)]
    pub m: Option<Threshold>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated bias values.
    #[arg(long, value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    /// Horizon (steps per replicate).
    #[arg(long, alias = "steps")]
    pub n: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Reduce strictly in replicate order.
    #[arg(long)]
    pub bit_exact: bool,
    /// Directory for results.json and config.json; must exist.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Bootstrap resamples for the regenerative derivative.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Half-width of the paired central difference.
    #[arg(long)]
    pub h: Option<f64>,
    /// Comma-separated novelty windows k.
    #[arg(long, value_delimiter = ',')]
    pub windows: Option<Vec<u64>>,
    /// Renewal confirmation margin in steps.
    #[arg(long)]
    pub margin: Option<usize>,
    /// Comma-separated estimators, replacing the subcommand default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorKind>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

fn missing(flag: &str) -> LabError {
    LabError::Config(format!(
        "missing required value --{flag} (or set it in --config)"
    ))
}

impl RunArgs {
    /// Config file values with flag overrides applied.
    pub fn to_config(&self, default_estimators: &[EstimatorKind]) -> LabResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let mut c = ExperimentConfig::new(
                    self.d.ok_or_else(|| missing("d"))?,
                    0.0,
                    self.n.ok_or_else(|| missing("n"))?,
                );
                c.beta = None;
                c.estimators = default_estimators.to_vec();
                c
            }
        };
        if let Some(k) = self.kind {
            cfg.kind = k;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(b) = self.beta {
            cfg.beta = Some(b);
            cfg.beta_grid = None;
        }
        if let Some(g) = &self.beta_grid {
            cfg.beta_grid = Some(g.clone());
            cfg.beta = None;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.bit_exact {
            cfg.bit_exact = true;
        }
        if self.out_dir.is_some() {
            cfg.out_dir = self.out_dir.clone();
        }
        if let Some(b) = self.bootstrap {
            cfg.bootstrap = b;
        }
        if self.h.is_some() {
            cfg.h = self.h;
        }
        if let Some(w) = &self.windows {
            cfg.windows = w.clone();
        }
        if let Some(m) = self.margin {
            cfg.margin = m;
        }
        if let Some(e) = &self.estimators {
            cfg.estimators = e.clone();
        } else if self.config.is_none() || cfg.estimators.is_empty() {
            cfg.estimators = default_estimators.to_vec();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Speed,
    Derivative,
    Range,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observable {
    X,
    Novel,
    Excited,
    Range,
}

#[derive(Debug, Clone, Args)]
pub struct OracleWalk {
    #[arg(long, value_enum, default_value = "erw")]
    pub kind: Kind,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value = "1")]
    pub m: Threshold,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Largest path-level gap between the reweighted and the direct law.
    Girsanov {
        #[command(flatten)]
        walk: OracleWalk,
        /// Reference bias; a decimal or p/q.
        #[arg(long)]
        beta0: String,
        /// Target bias; a decimal or p/q.
        #[arg(long)]
        beta: String,
        /// Exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Exact expectation of a path observable at time n.
    Expectation {
        #[command(flatten)]
        walk: OracleWalk,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value = "x")]
        observable: Observable,
    },
    /// Exact speed, its finite difference and the score-formula derivative.
    Speed {
        #[command(flatten)]
        walk: OracleWalk,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value = "1e-4")]
        h: f64,
        #[arg(long)]
        richardson: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one walk and write its trajectory CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "erw")]
        kind: Kind,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "1")]
        m: Threshold,
        #[arg(long, default_value = "0")]
        beta: f64,
        #[arg(long, alias = "n")]
        steps: usize,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the regenerative cycles of the path.
        #[arg(long)]
        cycles: Option<PathBuf>,
    },
    /// Run estimators over a bias grid.
    Estimate {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Cycle CSV and tail table of cycle lengths.
    RenewalStats {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        cycles_out: Option<PathBuf>,
    },
    /// Build coupled pairs and check dominance and shared renewals.
    CouplingCheck {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "1")]
        m: Threshold,
        #[arg(long)]
        beta0: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "100")]
        replicates: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the first pair as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Range rate R_n/n per bias value.
    RangeScan {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact checks by path enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

fn parse_rational(text: &str) -> LabResult<Rational> {
    let bad = || LabError::Config(format!("cannot read {text:?} as a rational number"));
    if let Some((p, q)) = text.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: i128 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Rational::new(digits, 10i128.pow(frac.len() as u32)))
}

fn excitation(m: Threshold) -> LabResult<Excitation> {
    Ok(match m {
        Threshold::Finite(m) => Excitation::finite(m)?,
        Threshold::Infinite => Excitation::Infinite,
    })
}

fn oracle_params(walk: &OracleWalk, beta: f64) -> LabResult<erw_core::WalkParams> {
    let mut cfg = ExperimentConfig::new(walk.d, beta, walk.n.max(1) as u64);
    cfg.kind = walk.kind;
    cfg.m = walk.m;
    cfg.params(beta)
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> LabResult<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json")
    )
    .map_err(|e| LabError::io(std::path::Path::new("<stdout>"), e))
}

fn emit_text(out: &mut dyn Write, text: &str) -> LabResult<()> {
    write!(out, "{text}").map_err(|e| LabError::io(std::path::Path::new("<stdout>"), e))
}

fn run_oracle(cmd: &OracleCommand, out: &mut dyn Write) -> LabResult<()> {
    match cmd {
        OracleCommand::Girsanov {
            walk,
            beta0,
            beta,
            exact,
        } => {
            let (r0, r) = (parse_rational(beta0)?, parse_rational(beta)?);
            let to_f = |q: &Rational| *q.numer() as f64 / *q.denom() as f64;
            let params = oracle_params(walk, to_f(&r0))?;
            let discrepancy = if *exact {
                let gap = girsanov_check_rational(&params, &r0, &r, walk.n)?;
                json!({ "max_discrepancy": to_f(&gap), "exact": format!("{}/{}", gap.numer(), gap.denom()) })
            } else {
                json!({ "max_discrepancy": girsanov_check(&params, to_f(&r0), to_f(&r), walk.n)? })
            };
            emit(out, &discrepancy)
        }
        OracleCommand::Expectation {
            walk,
            beta,
            observable,
        } => {
            let params = oracle_params(walk, *beta)?;
            let value = parallel_expectation(&params, walk.n, |v| match observable {
                Observable::X => v.x_n() as f64,
                Observable::Novel => v.novel_count() as f64,
                Observable::Excited => v.excited_count() as f64,
                Observable::Range => {
                    let mut sites: Vec<&[i64]> = (0..=v.n()).map(|i| v.point(i)).collect();
                    sites.sort_unstable();
                    sites.dedup();
                    sites.len() as f64
                }
            })?;
            emit(
                out,
                &json!({ "observable": format!("{observable:?}").to_lowercase(), "n": walk.n, "beta": beta, "value": value }),
            )
        }
        OracleCommand::Speed {
            walk,
            beta,
            h,
            richardson,
        } => {
            let params = oracle_params(walk, *beta)?;
            let scheme = if *richardson {
                Difference::Richardson
            } else {
                Difference::Plain
            };
            let s = exact_speed_and_derivative(&params, walk.n, *h, scheme)?;
            emit(
                out,
                &json!({
                    "n": walk.n,
                    "beta": beta,
                    "speed": s.speed,
                    "finite_difference": s.finite_difference,
                    "score_formula": s.score_formula,
                }),
            )
        }
    }
}

fn print_results(
    set: &crate::results::ResultSet,
    format: Format,
    out: &mut dyn Write,
) -> LabResult<()> {
    match format {
        Format::Json => emit_text(out, &format!("{}\n", set.to_json())),
        Format::Csv => emit_text(out, &set.to_csv()?),
    }
}

fn run_estimate(cfg: &ExperimentConfig, format: Format, out: &mut dyn Write) -> LabResult<()> {
    let set = run_experiment(cfg)?;
    if let Some(dir) = &cfg.out_dir {
        set.persist(dir)?;
    }
    print_results(&set, format, out)
}

fn renewal_stats(
    run: &RunArgs,
    cycles_out: Option<&PathBuf>,
    out: &mut dyn Write,
) -> LabResult<()> {
    let cfg = run.to_config(&[EstimatorKind::SpeedRegenerative])?;
    let policy = ConfirmPolicy::with_margin(cfg.margin);
    let mut all: Vec<Cycle> = Vec::new();
    let mut censored = 0u64;
    for beta in cfg.betas()? {
        let params = cfg.params(beta)?;
        let paths = run_replicates(cfg.replicates, cfg.workers, |r| {
            Ok(simulate_cycles(
                &params,
                cfg.n,
                policy,
                &mut stream_rng(cfg.seed, "replicate", r),
            )?)
        })?;
        for p in paths {
            censored += u64::from(p.record.censored_tail);
            all.extend(p.cycles);
        }
    }
    if let Some(path) = cycles_out {
        io::write_cycles(io::create(path)?, &all)?;
    }
    let count = all.len() as f64;
    let mut tail = Vec::new();
    let mut t = 1u64;
    while all.iter().any(|c| c.dt > t) {
        let frac = all.iter().filter(|c| c.dt > t).count() as f64 / count;
        tail.push((t, frac));
        t *= 2;
    }
    match run.format {
        Format::Json => emit(
            out,
            &json!({
                "cycles": all.len(),
                "censored_paths": censored,
                "mean_dt": all.iter().map(|c| c.dt as f64).sum::<f64>() / count,
                "mean_dx": all.iter().map(|c| c.dx as f64).sum::<f64>() / count,
                "tail": tail.iter().map(|&(t, p)| json!({ "t": t, "p_dt_greater": p })).collect::<Vec<_>>(),
            }),
        ),
        Format::Csv => {
            let mut text = String::from("t,p_dt_greater\n");
            for (t, p) in tail {
                text.push_str(&format!("{t},{p}\n"));
            }
            emit_text(out, &text)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn coupling_check(
    d: usize,
    m: Threshold,
    beta0: f64,
    beta: f64,
    n: usize,
    replicates: u64,
    seed: u64,
    burnin: Option<usize>,
    workers: Option<usize>,
    dump: Option<&PathBuf>,
    out: &mut dyn Write,
) -> LabResult<bool> {
    let m = excitation(m)?;
    let burnin = burnin.unwrap_or_else(|| default_burnin(n));
    let reports = run_replicates(replicates, workers, |r| {
        let noise = sample_noise(d, beta0, beta, n, burnin, derive_seed(seed, "coupling", r))?;
        let pair = build_pair(&noise, m)?;
        if r == 0 {
            if let Some(path) = dump {
                io::write_coupled(io::create(path)?, &pair)?;
            }
        }
        Ok(verify(&pair))
    })?;
    let dominance = reports.iter().filter(|r| !r.dominance_ok).count();
    let shared = reports.iter().filter(|r| !r.shared_renewals_ok).count();
    let checked: usize = reports.iter().map(|r| r.renewals_checked).sum();
    let pass = dominance == 0 && shared == 0;
    emit(
        out,
        &json!({
            "pairs": replicates,
            "burnin": burnin,
            "dominance_violations": dominance,
            "renewal_violations": shared,
            "renewals_checked": checked,
            "result": if pass { "PASS" } else { "FAIL" },
        }),
    )?;
    Ok(pass)
}

fn simulate(
    kind: Kind,
    d: usize,
    m: Threshold,
    beta: f64,
    steps: usize,
    seed: u64,
    path: &Path,
    cycles: Option<&PathBuf>,
) -> LabResult<()> {
    let mut cfg = ExperimentConfig::new(d, beta, steps.max(1) as u64);
    cfg.kind = kind;
    cfg.m = m;
    let params = cfg.params(beta)?;
    let traj = simulate_trajectory(&params, steps, seed)?;
    io::write_trajectory(io::create(path)?, &traj)?;
    if let Some(cpath) = cycles {
        let record = detect_direct(&traj);
        let trace = WeightTrace::new(&traj, FlagSource::Excitation, beta, beta)?;
        let list = match extract_cycles(&traj, &record, &trace) {
            Ok(c) => c,
            Err(erw_core::Error::FewerThanTwoRenewals { .. }) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        io::write_cycles(io::create(cpath)?, &list)?;
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> LabResult<i32> {
    match &cli.command {
        Command::Simulate {
            kind,
            d,
            m,
            beta,
            steps,
            seed,
            out: path,
            cycles,
        } => {
            simulate(*kind, *d, *m, *beta, *steps, *seed, path, cycles.as_ref())?;
        }
        Command::Estimate { target, run } => {
            let defaults: &[EstimatorKind] = match target {
                Target::Speed => &[EstimatorKind::Speed, EstimatorKind::SpeedRegenerative],
                Target::Derivative if run.h.is_some() => &[
                    EstimatorKind::Derivative,
                    EstimatorKind::DerivativeRegenerative,
                    EstimatorKind::DerivativeDifference,
                ],
                Target::Derivative => &[
                    EstimatorKind::Derivative,
                    EstimatorKind::DerivativeRegenerative,
                ],
                Target::Range => &[EstimatorKind::Range],
                Target::Truncated => &[EstimatorKind::Novelty, EstimatorKind::Truncated],
            };
            let cfg = run.to_config(defaults)?;
            run_estimate(&cfg, run.format, out)?;
        }
        Command::RenewalStats { run, cycles_out } => renewal_stats(run, cycles_out.as_ref(), out)?,
        Command::CouplingCheck {
            d,
            m,
            beta0,
            beta,
            n,
            replicates,
            seed,
            burnin,
            workers,
            dump,
        } => {
            let pass = coupling_check(
                *d,
                *m,
                *beta0,
                *beta,
                *n,
                *replicates,
                *seed,
                *burnin,
                *workers,
                dump.as_ref(),
                out,
            )?;
            if !pass {
                return Ok(3);
            }
        }
        Command::RangeScan { run } => {
            let mut run = run.clone();
            if run.kind.is_none() && run.config.is_none() {
                run.kind = Some(Kind::BiasedSrw);
            }
            let cfg = run.to_config(&[EstimatorKind::Range])?;
            run_estimate(&cfg, run.format, out)?;
        }
        Command::Oracle(cmd) => run_oracle(cmd, out)?,
    }
    Ok(0)
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "erwlab: {e}");
            e.exit_code()
        }
    }
}
