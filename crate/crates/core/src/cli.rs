//! Command-line front end: `bosonic-fridge <command> [--preset NAME] [--config PATH] ...`.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::{OutputFormat, ResolvedRun, RunConfig};
use crate::dynamics::{certify_truncation, default_steady_tol, evolve, steady_state, EvolveOptions, EvolveStats};
use crate::error::{Error, Result};
use crate::fock::Mode;
use crate::lindblad::{build_liouvillian, DensityMatrix, PairBasis};
use crate::model::{build_h_rwa, SystemParams};
use crate::output;
use crate::presets::{self, Experiment};
use crate::protocols::{
    fit_simplified, linear_grid, log_grid, run_schedule, rwa_comparison, rwa_schedule, steady_report, sweep,
    transient_protocol, Coupling, FitMode, FitOptions, RwaOptions, Schedule, SweepParam, SweepSpec, TransientOptions,
};
use crate::thermo::{ReportInputs, ThermoReport};

#[derive(Parser, Debug)]
#[command(name = "bosonic-fridge", version, about = "Three-oscillator Josephson-junction absorption refrigerator")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Named parameter set (see `presets list`).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// TOML config, or JSON when the extension is `.json`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Phase bias φ in radians.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long = "ej-ghz", global = true, allow_negative_numbers = true)]
    pub ej_ghz: Option<f64>,
    #[arg(long = "t-hot-mk", global = true, allow_negative_numbers = true)]
    pub t_hot_mk: Option<f64>,
    /// Fock truncation as C,H,R.
    #[arg(long, global = true, value_parser = parse_dims)]
    pub dims: Option<[usize; 3]>,
    /// Refine the truncation until steady observables settle.
    #[arg(long = "auto-truncate", global = true)]
    pub auto_truncate: bool,
    /// Output directory (default: config, then $BOSONIC_FRIDGE_OUT, then ./out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Steady state and thermodynamic report.
    Steady,
    /// Piecewise on/off schedule from the bath-thermal state.
    Evolve,
    /// Experimental protocols.
    Protocol {
        #[command(subcommand)]
        which: ProtocolCommand,
    },
    /// Steady states over a parameter grid.
    Sweep(SweepArgs),
    /// Fit a simplified-model coupling to the dressed model.
    Fit {
        #[arg(long, value_enum)]
        mode: Option<FitModeArg>,
    },
    /// Built-in validation suites.
    Validate {
        #[command(subcommand)]
        which: ValidateCommand,
    },
    /// Bundled parameter sets.
    Presets {
        #[command(subcommand)]
        which: PresetsCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProtocolCommand {
    /// Switch the refrigerator off at the first minimum of θ_c.
    Transient,
}

#[derive(Subcommand, Debug)]
pub enum ValidateCommand {
    /// Lab-frame against rotating-frame evolution.
    Rwa,
    /// Closeness of the steady reduced cold state to a thermal state.
    Thermality,
    /// Structural checks of operators, generator and states.
    Invariants,
}

#[derive(Subcommand, Debug)]
pub enum PresetsCommand {
    List,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_parser = parse_param)]
    pub param: Option<SweepParam>,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub values: Option<Vec<f64>>,
    /// LO:HI:N grid, linear unless --log.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub log: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum FitModeArg {
    On,
    Off,
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad dimension `{x}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[usize; 3]>::try_from(v).map_err(|_| "expected three comma-separated dimensions C,H,R".to_string())
}

fn parse_param(s: &str) -> std::result::Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str, log: bool) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Validation(format!("grid `{s}` is not LO:HI:N"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    if n == 0 || (log && !(lo > 0.0 && hi > 0.0)) {
        return Err(bad());
    }
    Ok(if log { log_grid(lo, hi, n) } else { linear_grid(lo, hi, n) })
}

/// Config file plus flag overrides, resolved against `default_preset`.
pub fn resolve(common: &CommonArgs, default_preset: &str) -> Result<ResolvedRun> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.preset {
        cfg.preset = Some(p.clone());
    }
    if let Some(v) = common.phi {
        cfg.system.phi_rad = Some(v);
    }
    if let Some(v) = common.ej_ghz {
        cfg.system.ej_ghz = Some(v);
    }
    if let Some(v) = common.t_hot_mk {
        cfg.system.h.get_or_insert_with(Default::default).temperature_mk = Some(v);
    }
    if let Some(d) = common.dims {
        cfg.solver.dims = Some(d);
    }
    if common.auto_truncate {
        cfg.solver.auto_truncate = true;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    cfg.resolve(default_preset)
}

fn certify(run: &mut ResolvedRun) -> Result<()> {
    if run.solver.auto_truncate {
        let tol = run.solver.steady_tol;
        let cert = certify_truncation(
            &run.params,
            |p| {
                let (r, _) = steady_report(p, tol)?;
                Ok(vec![r.theta_c_mk, r.currents.internal[0], r.currents.internal[1]])
            },
            run.solver.certify_step,
            run.solver.certify_tol,
            run.solver.max_dim,
        )?;
        log::info!("certified truncation {:?} after {} solves", cert.dims, cert.evaluations);
        run.params.dims = cert.dims;
    }
    run.certified_dims = Some(run.params.dims);
    Ok(())
}

#[derive(Serialize)]
struct SteadyOutput {
    #[serde(flatten)]
    report: ThermoReport,
    residual: f64,
    unknowns: usize,
    method: String,
    clipped: Option<f64>,
    advisories: Vec<String>,
}

fn solve_steady(params: &SystemParams, tol: Option<f64>) -> Result<(SteadyOutput, DensityMatrix)> {
    let space = params.space()?;
    let h = build_h_rwa(params, &space)?;
    let l = build_liouvillian(&h, params)?;
    let ss = steady_state(&l, tol.unwrap_or_else(|| default_steady_tol(&l)))?;
    let report = ThermoReport::compute(&ss.rho, params, ReportInputs::default())?;
    Ok((
        SteadyOutput {
            report,
            residual: ss.residual,
            unknowns: ss.unknowns,
            method: ss.method,
            clipped: ss.clipped,
            advisories: params.advisories(),
        },
        ss.rho,
    ))
}

struct Emitter<'a> {
    dir: PathBuf,
    format: OutputFormat,
    run: &'a ResolvedRun,
    command: &'a str,
}

impl Emitter<'_> {
    fn summary<T: Serialize>(&self, result: &T) -> Result<()> {
        let path = output::write(&self.dir, "summary.json", &output::summary_json(self.command, self.run, result)?)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn trajectory(&self, records: &[crate::protocols::Record]) -> Result<()> {
        if self.format.csv() {
            let path = output::write(&self.dir, "trajectory.csv", &output::trajectory_csv(self.run, records)?)?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn print_line<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string(v).map_err(|e| Error::Config(e.to_string()))?);
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryOutput<'a> {
    stats: &'a EvolveStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    records: Option<&'a [crate::protocols::Record]>,
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

#[derive(Serialize)]
struct CheckReport {
    checks: Vec<Check>,
    passed: usize,
    failed: usize,
}

impl CheckReport {
    fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            failed: checks.len() - passed,
            passed,
            checks,
        }
    }

    fn into_result(self, what: &str) -> Result<Self> {
        for c in &self.checks {
            println!(
                "{} {:<44} {:>12.3e} (limit {:.1e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            );
        }
        println!("{what}: {} of {} checks passed", self.passed, self.checks.len());
        Ok(self)
    }
}

/// Structural invariants at the given parameters.
pub fn invariant_checks(params: &SystemParams) -> Result<Vec<(String, f64, f64)>> {
    let space = params.space()?;
    let h = build_h_rwa(params, &space)?;
    let l = build_liouvillian(&h, params)?;
    let basis: Arc<PairBasis> = l.basis().clone();
    let mut out = vec![("hamiltonian hermiticity residue".to_string(), h.hermiticity_residue(), 1e-12)];

    // column sums over diagonal rows vanish for a trace-preserving generator
    let mut col_trace = vec![C64::new(0.0, 0.0); l.dim()];
    for (r, c, v) in l.matrix().triplets() {
        let (k, b) = basis.pair(r);
        if k == b {
            col_trace[c] += v;
        }
    }
    let tp = col_trace.iter().map(|x| x.norm()).fold(0.0, f64::max);
    out.push(("generator trace preservation".into(), tp, 1e-12));

    let n = Mode::ALL.map(|m| params.oscillator(m).bath_occupation());
    let mut probe = DensityMatrix::thermal_product(basis.clone(), &n)?;
    for i in 0..probe.len() {
        let (k, b) = basis.pair(i);
        if k != b {
            let sign = if k < b { 1.0 } else { -1.0 };
            probe.data_mut()[i] = C64::new(1e-3 * ((k * 7 + b * 3) % 5) as f64, sign * 1e-3 * ((k + b) % 3) as f64);
        }
    }
    probe.symmetrize();
    let lp = l.apply(&probe)?;
    out.push(("generator hermiticity preservation".into(), lp.hermiticity_residue(), 1e-12));

    let ss = steady_state(&l, default_steady_tol(&l))?;
    out.push(("steady trace deviation".into(), (ss.rho.trace() - 1.0).norm(), 1e-10));
    out.push(("steady hermiticity residue".into(), ss.rho.hermiticity_residue(), 1e-10));
    out.push(("steady negative eigenvalue".into(), (-ss.rho.min_eigenvalue()?).max(0.0), 1e-7));
    out.push(("steady residual / tolerance".into(), ss.residual / default_steady_tol(&l), 1.0));
    let reduced = ss.rho.reduced(Mode::C.label())?;
    let red_tr: C64 = (0..reduced.nrows()).map(|i| reduced[(i, i)]).sum();
    out.push(("reduced cold state trace deviation".into(), (red_tr - 1.0).norm(), 1e-10));

    let rho0 = DensityMatrix::thermal_product(basis.clone(), &n)?;
    let tau = 1.0 / params.c.kappa();
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2 * tau).collect();
    let traj = evolve(
        &rho0,
        &l,
        &grid,
        EvolveOptions {
            check_positivity: true,
            ..EvolveOptions::default()
        },
    )?;
    out.push(("evolution trace drift".into(), traj.stats.max_trace_drift, 1e-8));
    out.push(("evolution hermiticity residue".into(), traj.stats.max_hermiticity_residue, 1e-10));
    out.push((
        "evolution negative eigenvalue".into(),
        (-traj.stats.min_eigenvalue.unwrap_or(0.0)).max(0.0),
        1e-7,
    ));

    let free = params.clone().with_ej(0.0);
    let (r0, _) = steady_report(&free, None)?;
    let dev = Mode::ALL
        .into_iter()
        .map(|m| {
            let i = m.position();
            let nb = params.oscillator(m).bath_occupation();
            let q = nb / (nb + 1.0);
            let (mut z, mut mean) = (0.0, 0.0);
            for k in 0..params.dims[i] {
                let w = q.powi(k as i32);
                z += w;
                mean += k as f64 * w;
            }
            (r0.mean_n[i] - mean / z).abs()
        })
        .fold(0.0, f64::max);
    out.push(("decoupled occupations vs truncated thermal".into(), dev, 1e-8));
    Ok(out)
}

fn default_schedule(params: &SystemParams) -> Schedule {
    Schedule::single(params.phi_rad, (10.0 / params.c.kappa()).round(), 1.0)
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    let (default_preset, name) = match &cli.command {
        Command::Steady => ("table1", "steady"),
        Command::Evolve => ("fig1b", "evolve"),
        Command::Protocol { .. } => ("fig3", "protocol transient"),
        Command::Sweep(_) => ("fig2", "sweep"),
        Command::Fit { .. } => ("fig1b", "fit"),
        Command::Validate {
            which: ValidateCommand::Rwa,
        } => ("appB", "validate rwa"),
        Command::Validate {
            which: ValidateCommand::Thermality,
        } => ("appC", "validate thermality"),
        Command::Validate {
            which: ValidateCommand::Invariants,
        } => ("table1", "validate invariants"),
        Command::Presets { .. } => {
            for p in presets::all() {
                println!("{:<11} dims {:?}  {}", p.name, p.params.dims, p.description);
            }
            return Ok(());
        }
    };
    let mut run = resolve(common, default_preset)?;
    for w in run.params.advisories() {
        log::warn!("{w}");
    }
    let evolve_opts = run.solver.evolve_options();
    let dir = output::resolve_dir(common.out.as_deref(), &run);
    let format = run.output.format;

    match &cli.command {
        Command::Steady => {
            run.experiment = Experiment::Steady;
            certify(&mut run)?;
            let (out, _) = solve_steady(&run.params, run.solver.steady_tol)?;
            print_line(&serde_json::json!({
                "theta_c_mk": out.report.theta_c_mk,
                "ratio": out.report.ratio,
                "cop_current": out.report.cop_current,
                "residual": out.residual,
            }))?;
            emitter(&dir, format, &run, name).summary(&out)?;
        }
        Command::Evolve => {
            let schedule = match &run.experiment {
                Experiment::Schedule { schedule } | Experiment::Fit { schedule, .. } | Experiment::Rwa { schedule } => {
                    schedule.clone()
                }
                _ => default_schedule(&run.params),
            };
            run.experiment = Experiment::Schedule {
                schedule: schedule.clone(),
            };
            certify(&mut run)?;
            let res = run_schedule(&schedule, &run.params, Coupling::Dressed, evolve_opts)?;
            let last = res.records.last().expect("non-empty schedule");
            print_line(&serde_json::json!({"t_ns": last.t_ns, "theta_c_mk": last.theta_c_mk, "samples": res.records.len()}))?;
            let e = emitter(&dir, format, &run, name);
            e.trajectory(&res.records)?;
            e.summary(&TrajectoryOutput {
                stats: &res.stats,
                records: format.json().then_some(res.records.as_slice()),
            })?;
        }
        Command::Protocol {
            which: ProtocolCommand::Transient,
        } => {
            run.experiment = Experiment::Transient;
            certify(&mut run)?;
            let mut opts = TransientOptions::for_params(&run.params);
            opts.evolve = evolve_opts;
            let res = transient_protocol(&run.params, &opts)?;
            print_line(&res.event)?;
            let e = emitter(&dir, format, &run, name);
            e.trajectory(&res.records)?;
            #[derive(Serialize)]
            struct Out<'a> {
                event: &'a crate::protocols::TransientEvent,
                stats: &'a EvolveStats,
                #[serde(skip_serializing_if = "Option::is_none")]
                records: Option<&'a [crate::protocols::Record]>,
            }
            e.summary(&Out {
                event: &res.event,
                stats: &res.stats,
                records: format.json().then_some(res.records.as_slice()),
            })?;
        }
        Command::Sweep(args) => {
            let (param, mut values, mut hot_tail) = match &run.experiment {
                Experiment::Sweep {
                    param,
                    values,
                    hot_tail,
                } => (Some(*param), values.clone(), *hot_tail),
                _ => (None, Vec::new(), None),
            };
            let param = args.param.or(param).ok_or_else(|| {
                Error::Validation("no sweep parameter: pass --param or use a sweep preset/config".into())
            })?;
            if let Some(v) = &args.values {
                values = v.clone();
            } else if let Some(g) = &args.grid {
                values = parse_grid(g, args.log)?;
            }
            if param == SweepParam::THot && hot_tail.is_none() {
                hot_tail = Some(1e-4);
            }
            run.experiment = Experiment::Sweep {
                param,
                values: values.clone(),
                hot_tail,
            };
            certify(&mut run)?;
            let spec = SweepSpec {
                param,
                values,
                base: run.params.clone(),
                steady_tol: run.solver.steady_tol,
                hot_tail,
            };
            let points = sweep(&spec, common.workers)?;
            for p in &points {
                match &p.outcome {
                    Ok(r) => print_line(&serde_json::json!({"value": p.value, "theta_c_mk": r.theta_c_mk, "ratio": r.ratio}))?,
                    Err(e) => print_line(&serde_json::json!({"value": p.value, "error": e}))?,
                }
            }
            let e = emitter(&dir, format, &run, name);
            if format.csv() {
                let path = output::write(&dir, "sweep.csv", &output::sweep_csv(&run, &points)?)?;
                eprintln!("wrote {}", path.display());
            }
            e.summary(&serde_json::json!({ "points": points }))?;
        }
        Command::Fit { mode } => {
            let (schedule, cfg_mode) = match &run.experiment {
                Experiment::Fit { schedule, mode } => (Some(schedule.clone()), Some(*mode)),
                _ => (None, None),
            };
            let mode = match mode {
                Some(FitModeArg::On) => FitMode::On,
                Some(FitModeArg::Off) => FitMode::Off,
                None => cfg_mode.unwrap_or(FitMode::On),
            };
            let schedule = schedule.unwrap_or_else(|| match mode {
                FitMode::On => presets::fit_schedule(),
                FitMode::Off => Schedule::single(0.0, 100.0, 1.0),
            });
            run.experiment = Experiment::Fit {
                schedule: schedule.clone(),
                mode,
            };
            certify(&mut run)?;
            let reference = run_schedule(&schedule, &run.params, Coupling::Dressed, evolve_opts)?;
            let opts = FitOptions {
                evolve: evolve_opts,
                ..FitOptions::default()
            };
            let fit = fit_simplified(&reference.records, &schedule, &run.params, mode, &opts)?;
            print_line(&serde_json::json!({
                "ej_prime_ghz": fit.ej_prime_ghz,
                "ej_doubleprime_ghz": fit.ej_doubleprime_ghz,
                "ej_prime_over_ej": fit.ej_prime_ghz / run.params.ej_ghz,
                "ej_doubleprime_over_ej": fit.ej_doubleprime_ghz / run.params.ej_ghz,
                "residual": fit.residual,
            }))?;
            let e = emitter(&dir, format, &run, name);
            e.trajectory(&reference.records)?;
            e.summary(&fit)?;
        }
        Command::Validate {
            which: ValidateCommand::Rwa,
        } => {
            let schedule = match &run.experiment {
                Experiment::Rwa { schedule } => schedule.clone(),
                _ => rwa_schedule(&run.params),
            };
            run.experiment = Experiment::Rwa {
                schedule: schedule.clone(),
            };
            run.certified_dims = Some(run.params.dims);
            let opts = RwaOptions {
                split_dt_ns: run.solver.split_dt_ns,
                evolve: evolve_opts,
            };
            let cmp = rwa_comparison(&run.params, &schedule, &opts)?;
            let report = CheckReport::new(vec![
                Check::at_most("max relative θ_c deviation", cmp.max_rel_dev, 0.05),
                Check::at_most(
                    "rotating-frame cooling deficit (mK)",
                    cmp.mean_cooling_full_mk - cmp.mean_cooling_rwa_mk,
                    0.0,
                ),
            ])
            .into_result(name)?;
            let failed = report.failed;
            emitter(&dir, format, &run, name).summary(&serde_json::json!({ "comparison": cmp, "report": report }))?;
            if failed > 0 {
                return Err(Error::CheckFailed(format!("{failed} rwa checks failed")));
            }
        }
        Command::Validate {
            which: ValidateCommand::Thermality,
        } => {
            run.experiment = Experiment::Steady;
            certify(&mut run)?;
            let (out, _) = solve_steady(&run.params, run.solver.steady_tol)?;
            let theta_s = out.report.theta_c_entropy_mk.unwrap_or(f64::NAN);
            let theta_e = out.report.theta_c_mk;
            let report = CheckReport::new(vec![
                Check::at_most("population TVD from thermal", out.report.thermality_tvd, 0.02),
                Check::at_most("|θ_entropy − θ_energy| / θ_energy", (theta_s - theta_e).abs() / theta_e, 0.03),
            ])
            .into_result(name)?;
            let failed = report.failed;
            emitter(&dir, format, &run, name).summary(&serde_json::json!({ "steady": out, "report": report }))?;
            if failed > 0 {
                return Err(Error::CheckFailed(format!("{failed} thermality checks failed")));
            }
        }
        Command::Validate {
            which: ValidateCommand::Invariants,
        } => {
            run.experiment = Experiment::Steady;
            certify(&mut run)?;
            let checks = invariant_checks(&run.params)?
                .into_iter()
                .map(|(n, v, t)| Check::at_most(&n, v, t))
                .collect();
            let report = CheckReport::new(checks).into_result(name)?;
            let failed = report.failed;
            emitter(&dir, format, &run, name).summary(&report)?;
            if failed > 0 {
                return Err(Error::CheckFailed(format!("{failed} invariant checks failed")));
            }
        }
        Command::Presets { .. } => unreachable!(),
    }
    Ok(())
}

fn emitter<'a>(dir: &std::path::Path, format: OutputFormat, run: &'a ResolvedRun, command: &'a str) -> Emitter<'a> {
    Emitter {
        dir: dir.to_path_buf(),
        format,
        run,
        command,
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let record = serde_json::json!({
                "error": {
                    "kind": e.kind(),
                    "message": e.to_string(),
                    "exit_code": e.exit_code(),
                }
            });
            eprintln!("{record}");
            e.exit_code()
        }
    }
}
