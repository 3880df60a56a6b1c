//! Subcommands and their argument handling.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgq_core::closed_form;
use lgq_core::fock::{self, FockConfig, FockSpace, InitialState};
use lgq_core::model::{constants, dimensionless_from_si, CouplingForm, OscillatorMass, PhysicalSetup};
use lgq_core::scan::{self, Engine, RegionMask, ScanGrid};
use lgq_core::semiclassical;
use lgq_core::{ModelParams, OscillatorInit, QuasiResult, SignPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{load_config, EngineChoice, InitConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{self, fmt_f64, QuasiRecord};
use crate::plot;

#[derive(Debug, Parser)]
#[command(name = "lgq", version, about = "Two-time quasiprobabilities of a qubit coupled to an oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the four quasiprobabilities at one pair of times
    Eval(EvalArgs),
    /// Scan the (t1, t2) plane and write the grid, negativity masks and regions
    Scan(ScanArgs),
    /// Refine the minimum of every negative region
    Minima(ScanArgs),
    /// Entanglement negativity as a function of time
    Negativity(NegativityArgs),
    /// Compare the quantum result with the mean-field (classical oscillator) model
    Ns(NsArgs),
    /// Dimensionless coupling and thermal occupation from SI parameters
    Estimate(EstimateArgs),
    /// Check the closed form against exact evolution on random parameters
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitKind {
    Ground,
    Thermal,
    Squeezed,
}

/// Model flags shared by every physics subcommand; each overrides the config file.
#[derive(Debug, Default, Args)]
struct ModelArgs {
    /// JSON run configuration (unknown keys are rejected)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Squared dimensionless coupling lambda^2 (required unless --lambda or the config sets it)
    #[arg(long, conflicts_with = "lambda", allow_negative_numbers = true)]
    lambda2: Option<f64>,
    /// Dimensionless coupling lambda = g / omega
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Qubit splitting over oscillator frequency [default: 0, the degenerate qubit]
    #[arg(long, allow_negative_numbers = true)]
    omega_ratio: Option<f64>,
    /// Azimuth of the in-plane measurement axis [default: 0, sigma_x]
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Explicit unit measurement axis nx,ny,nz (overrides --phi)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    axis: Option<Vec<f64>>,
    /// Oscillator start [default: ground]
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    /// Mean occupation for --init thermal
    #[arg(long)]
    nbar: Option<f64>,
    /// Squeezing amplitude for --init squeezed (negative flips the axis)
    #[arg(long, allow_negative_numbers = true)]
    zeta: Option<f64>,
    /// Squeezing phase for --init squeezed [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Read times and window bounds as multiples of pi
    #[arg(long)]
    period_units: bool,
    /// Evaluation engine [default: closed]
    #[arg(long, value_enum)]
    engine: Option<EngineChoice>,
    /// Fock truncation for the oracle [default: chosen from the coupling and state]
    #[arg(long)]
    n_fock: Option<usize>,
    /// Output file [default: standard output; scan writes scan.csv]
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
struct TimeArgs {
    /// First measurement time omega t1
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Second measurement time omega t2 (>= t1)
    #[arg(long, allow_negative_numbers = true)]
    t2: Option<f64>,
}

#[derive(Debug, Default, Args)]
struct WindowArgs {
    /// Lower window bound [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    lo: Option<f64>,
    /// Upper window bound [default: 4 pi, two oscillator periods]
    #[arg(long, allow_negative_numbers = true)]
    hi: Option<f64>,
    /// Samples per axis [default: 401]
    #[arg(long)]
    resolution: Option<usize>,
    /// Worker threads [default: all cores; results do not depend on it]
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    times: TimeArgs,
    /// First outcome (+1 or -1); with --s2 prints only that quasiprobability
    #[arg(long, allow_negative_numbers = true, requires = "s2")]
    s1: Option<i32>,
    /// Second outcome (+1 or -1)
    #[arg(long, allow_negative_numbers = true, requires = "s1")]
    s2: Option<i32>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Debug, Args)]
struct NegativityArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Debug, Args)]
struct NsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    times: TimeArgs,
    /// Integration step [default: 2 pi / 2000]
    #[arg(long)]
    dtau: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Approximate,
    Exact,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Oscillator density in kg/m^3 [default: 2e4, a tungsten-like mass]
    #[arg(long, conflicts_with = "mass")]
    density: Option<f64>,
    /// Oscillator mass in kg (instead of a density; exact form only)
    #[arg(long)]
    mass: Option<f64>,
    /// Particle mass in kg [default: 2.2e-25, a caesium atom]
    #[arg(long)]
    particle_mass: Option<f64>,
    /// Particle-oscillator distance L in m [default: 1e-3]
    #[arg(long)]
    separation: Option<f64>,
    /// Path separation of the particle in m [default: 1e-3]
    #[arg(long)]
    ell: Option<f64>,
    /// Oscillator angular frequency in rad/s [default: 2 pi / 10]
    #[arg(long)]
    omega_si: Option<f64>,
    /// Temperature in K [default: 300]
    #[arg(long)]
    temperature: Option<f64>,
    /// Coupling expression [default: approximate, the small-oscillator form]
    #[arg(long, value_enum, default_value = "approximate")]
    form: FormArg,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random parameter tuples [default: 100]
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Seed of the tuple generator [default: 1]
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest tolerated |q_closed - q_oracle| [default: 1e-8]
    #[arg(long, default_value_t = 1e-8)]
    limit: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let msg = msg.trim_start_matches("error: ").trim_end();
            eprintln!("error[USAGE]: {msg}");
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Eval(a) => eval(a),
        Command::Scan(a) => scan_cmd(a),
        Command::Minima(a) => minima(a),
        Command::Negativity(a) => negativity(a),
        Command::Ns(a) => ns(a),
        Command::Estimate(a) => estimate(a),
        Command::Verify(a) => verify(a),
    }
}

/// Config file, then flag overrides.
fn resolve(model: &ModelArgs) -> Result<RunConfig> {
    let mut cfg = match &model.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(l2) = model.lambda2 {
        (cfg.lambda2, cfg.lambda) = (Some(l2), None);
    }
    if let Some(l) = model.lambda {
        (cfg.lambda, cfg.lambda2) = (Some(l), None);
    }
    if let Some(r) = model.omega_ratio {
        cfg.omega_ratio = r;
    }
    if let Some(phi) = model.phi {
        cfg.phi = phi;
    }
    if let Some(axis) = &model.axis {
        let &[x, y, z] = axis.as_slice() else {
            return Err(CliError::Usage(format!("--axis needs three components, got {}", axis.len())));
        };
        cfg.axis = Some([x, y, z]);
    }
    match model.init {
        Some(InitKind::Ground) => cfg.init = InitConfig::Ground {},
        Some(InitKind::Thermal) => cfg.init = InitConfig::Thermal { nbar: model.nbar.ok_or(CliError::Missing("nbar"))? },
        Some(InitKind::Squeezed) => {
            cfg.init = InitConfig::Squeezed {
                zeta: model.zeta.ok_or(CliError::Missing("zeta"))?,
                theta: model.theta.unwrap_or(0.0),
            }
        }
        None => {}
    }
    cfg.period_units |= model.period_units;
    if let Some(e) = model.engine {
        cfg.engine = e;
    }
    if model.n_fock.is_some() {
        cfg.n_fock = model.n_fock;
    }
    if model.output.is_some() {
        cfg.output = model.output.clone();
    }
    Ok(cfg)
}

fn apply_times(cfg: &mut RunConfig, t: &TimeArgs) {
    if t.t1.is_some() {
        cfg.t1 = t.t1;
    }
    if t.t2.is_some() {
        cfg.t2 = t.t2;
    }
}

fn apply_window(cfg: &mut RunConfig, w: &WindowArgs) {
    if w.lo.is_some() {
        cfg.window.lo = w.lo;
    }
    if w.hi.is_some() {
        cfg.window.hi = w.hi;
    }
    if let Some(r) = w.resolution {
        cfg.window.resolution = r;
    }
    if w.workers.is_some() {
        cfg.workers = w.workers;
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn sibling(output: &Path, suffix: &str) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Oracle space and initial state, honouring an explicit truncation.
fn oracle_setup(cfg: &RunConfig, params: &ModelParams, init: &OscillatorInit) -> Result<(FockSpace, InitialState)> {
    Ok(match cfg.n_fock {
        Some(n) => {
            let space = FockSpace::build(FockConfig::new(n), params)?;
            let state = space.build_initial(init)?;
            (space, state)
        }
        None => fock::build_adaptive(params, init, fock::DEFAULT_TOL_TRUNCATION)?,
    })
}

fn quasi(cfg: &RunConfig, params: &ModelParams, init: &OscillatorInit, t1: f64, t2: f64) -> Result<QuasiResult> {
    match cfg.engine {
        EngineChoice::Closed => Ok(closed_form::quasiprob(t1, t2, params, init)?),
        EngineChoice::Oracle => {
            let (space, state) = oracle_setup(cfg, params, init)?;
            Ok(space.quasiprob_oracle(&state, t1, t2, &space.params().measurement_axis())?)
        }
    }
}

fn pair_from(s1: i32, s2: i32) -> Result<SignPair> {
    SignPair::from_ints(s1, s2).ok_or_else(|| CliError::Usage(format!("outcomes must be +1 or -1 (got {s1}, {s2})")))
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut cfg = resolve(&a.model)?;
    apply_times(&mut cfg, &a.times);
    let (t1, t2) = cfg.times()?;
    let params = cfg.params()?;
    let r = quasi(&cfg, &params, &cfg.init(), t1, t2)?;
    let out = sink(cfg.output.as_deref())?;
    match (a.s1, a.s2) {
        (Some(s1), Some(s2)) => {
            let pair = pair_from(s1, s2)?;
            output::write_key_values(out, &[(format!("q_{}", pair.tag()), r.get(pair))])
        }
        _ => output::write_quasi(out, &r),
    }
}

fn run_scan(cfg: &RunConfig) -> Result<(ScanGrid, Vec<RegionMask>)> {
    let grid = scan::grid_scan(&cfg.params()?, &cfg.init(), cfg.scan_window(), Engine::from(cfg.engine), cfg.workers)?;
    let masks = SignPair::ALL.iter().map(|&p| scan::region_mask(&grid, p)).collect();
    Ok((grid, masks))
}

fn write_meta(output: &Path, command: &str, cfg: &RunConfig, summary: serde_json::Value) -> Result<()> {
    let path = sibling(output, ".meta.json");
    let meta = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
}

fn scan_cmd(a: ScanArgs) -> Result<()> {
    let mut cfg = resolve(&a.model)?;
    apply_window(&mut cfg, &a.window);
    let output = cfg.output.clone().unwrap_or_else(|| PathBuf::from("scan.csv"));
    let (grid, masks) = run_scan(&cfg)?;

    output::write_scan_grid(create(&output)?, &grid)?;
    output::write_mask(create(&sibling(&output, ".mask.csv"))?, &grid, &masks)?;
    output::write_regions(create(&sibling(&output, ".regions.csv"))?, &grid, &masks)?;
    plot::write_script(&output, &plot::grid_script(&output))?;

    let rows: Vec<Vec<String>> = masks
        .iter()
        .map(|m| {
            let min = scan::global_min_cell(&grid, m.pair).map_or(f64::NAN, |c| c.2);
            vec![m.pair.tag(), m.components.len().to_string(), m.negative_cells().to_string(), fmt_f64(min)]
        })
        .collect();
    let summary: serde_json::Value = masks
        .iter()
        .map(|m| (m.pair.tag(), serde_json::json!({"components": m.components.len(), "negative_cells": m.negative_cells()})))
        .collect::<serde_json::Map<_, _>>()
        .into();
    write_meta(&output, "scan", &cfg, summary)?;
    output::write_table(std::io::stdout().lock(), &["pair", "components", "negative_cells", "q_min"], rows)
}

fn minima(a: ScanArgs) -> Result<()> {
    let mut cfg = resolve(&a.model)?;
    apply_window(&mut cfg, &a.window);
    let (grid, masks) = run_scan(&cfg)?;
    let params = cfg.params()?;
    let predicted = if params.omega_ratio == 0.0 && params.phi == 0.0 && params.axis.is_none() {
        closed_form::min_quasiprob_predicted(&cfg.init(), params.lambda).ok()
    } else {
        None
    };
    if predicted.as_ref().is_some_and(|p| p.beyond_small_coupling) {
        eprintln!("warning: lambda exceeds the small-coupling range of the predicted minimum");
    }
    let mut rows = Vec::new();
    for m in &masks {
        for (i, c) in m.components.iter().enumerate() {
            let (t1, t2) = (grid.tau1_axis[c.min_cell.0], grid.tau2_axis[c.min_cell.1]);
            let seed = scan::local_min_near(&grid, m.pair, t1, t2).unwrap_or(c.min_cell);
            let r = scan::refine_minimum(&grid, m.pair, seed)?;
            let (pred, dev) = match &predicted {
                Some(p) => (fmt_f64(p.value), fmt_f64((r.value - p.value) / p.value.abs())),
                None => (String::new(), String::new()),
            };
            rows.push(vec![
                m.pair.tag(),
                i.to_string(),
                fmt_f64(r.tau1),
                fmt_f64(r.tau2),
                fmt_f64(r.value),
                fmt_f64(c.min_value),
                pred,
                dev,
            ]);
        }
    }
    let header = ["pair", "component", "tau1", "tau2", "q_min", "q_grid", "q_predicted", "rel_dev"];
    output::write_table(sink(cfg.output.as_deref())?, &header, rows)?;
    if let Some(out) = &cfg.output {
        write_meta(out, "minima", &cfg, serde_json::Value::Null)?;
    }
    Ok(())
}

fn negativity(a: NegativityArgs) -> Result<()> {
    let mut cfg = resolve(&a.model)?;
    apply_window(&mut cfg, &a.window);
    let params = cfg.params()?;
    let init = cfg.init();
    let window = cfg.scan_window();
    window.validate()?;
    let taus = window.axis();
    let values: Vec<f64> = match cfg.engine {
        EngineChoice::Closed => {
            if init != OscillatorInit::Ground {
                return Err(lgq_core::Error::UnsupportedInit(init.name()).into());
            }
            params.validate(lgq_core::model::Context::Oracle)?;
            taus.iter().map(|&t| closed_form::negativity_closed(t, params.lambda)).collect()
        }
        EngineChoice::Oracle => {
            let (space, state) = oracle_setup(&cfg, &params, &init)?;
            taus.iter().map(|&t| space.negativity_oracle(&state, t)).collect::<lgq_core::Result<_>>()?
        }
    };
    let rows = taus.iter().zip(&values).map(|(t, n)| vec![fmt_f64(*t), fmt_f64(*n)]);
    output::write_table(sink(cfg.output.as_deref())?, &["tau", "negativity"], rows)?;
    if let Some(out) = &cfg.output {
        plot::write_script(out, &plot::curve_script(out, "{/Symbol w}t", &["negativity"]))?;
    }
    Ok(())
}

fn ns(a: NsArgs) -> Result<()> {
    let mut cfg = resolve(&a.model)?;
    apply_times(&mut cfg, &a.times);
    let (t1, t2) = cfg.times()?;
    let params = cfg.params()?;
    let dtau = a.dtau.unwrap_or_else(semiclassical::default_dtau);
    let mean_field = semiclassical::ns_quasiprob_all(t1, t2, &params, dtau)?;
    let quantum = quasi(&cfg, &params, &cfg.init(), t1, t2)?;
    let mut rows = QuasiRecord::from(&quantum).rows();
    rows.extend(SignPair::ALL.iter().map(|p| (format!("ns_{}", p.tag()), mean_field[p.index()])));
    output::write_key_values(sink(cfg.output.as_deref())?, &rows)
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let mut setup = PhysicalSetup::reference();
    if let Some(m) = a.mass {
        setup.oscillator = OscillatorMass::Mass(m);
    }
    if let Some(rho) = a.density {
        setup.oscillator = OscillatorMass::Density(rho);
    }
    setup.m = a.particle_mass.unwrap_or(constants::M_CS);
    setup.separation = a.separation.unwrap_or(setup.separation);
    setup.ell = a.ell.unwrap_or(setup.ell);
    setup.omega_si = a.omega_si.unwrap_or(setup.omega_si);
    setup.temperature = a.temperature.unwrap_or(setup.temperature);
    let form = match a.form {
        FormArg::Approximate => CouplingForm::Approximate,
        FormArg::Exact => CouplingForm::Exact,
    };
    let est = dimensionless_from_si(&setup, form)?;
    let rows = [
        ("lambda2".to_string(), est.lambda_sq),
        ("nbar".to_string(), est.nbar),
        ("nbar_lambda2".to_string(), est.nbar_lambda_sq()),
    ];
    output::write_key_values(sink(a.output.as_deref())?, &rows)
}

fn verify(a: VerifyArgs) -> Result<()> {
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst = 0.0f64;
    let mut max_fock = 0usize;
    for i in 0..a.samples {
        let lambda = rng.random_range(0.0..=0.1);
        let ratio = rng.random_range(0.0..=2.0);
        let phi = rng.random_range(0.0..2.0 * PI);
        let x = rng.random_range(0.0..=4.0 * PI);
        let y = rng.random_range(0.0..=4.0 * PI);
        let init = match i % 3 {
            0 => OscillatorInit::Ground,
            1 => OscillatorInit::Thermal { nbar: rng.random_range(0.0..=2.0) },
            _ => OscillatorInit::Squeezed { zeta_abs: rng.random_range(0.0..=1.0), theta: rng.random_range(0.0..2.0 * PI) },
        };
        let params = ModelParams::new(lambda).with_omega_ratio(ratio).with_phi(phi);
        let (t1, t2) = (x.min(y), x.max(y));
        let closed = closed_form::quasiprob(t1, t2, &params, &init)?;
        let (space, state) = fock::build_adaptive(&params, &init, fock::DEFAULT_TOL_TRUNCATION)?;
        max_fock = max_fock.max(space.n_fock());
        let oracle = space.quasiprob_oracle(&state, t1, t2, &params.measurement_axis())?;
        for k in 0..4 {
            worst = worst.max((closed.q[k] - oracle.q[k]).abs());
        }
    }
    let rows = [
        ("samples".to_string(), a.samples as f64),
        ("max_abs_diff".to_string(), worst),
        ("max_n_fock".to_string(), max_fock as f64),
    ];
    output::write_key_values(sink(a.output.as_deref())?, &rows)?;
    if worst > a.limit {
        return Err(CliError::VerifyFailed { worst, limit: a.limit });
    }
    Ok(())
}

