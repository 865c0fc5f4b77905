//! Subcommands of the `leewave` binary. Every command is a thin wrapper
//! over `leewave-core`; the binary only parses flags, picks the output
//! stream and maps outcomes to exit codes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use leewave_core::config::{Config, ConfigError, ProfileConfig};
use leewave_core::grid::{FieldRecord, GridError, GridSpec, Sampling, DEFAULT_SEED};
use leewave_core::kinematics::LabelPoint;
use leewave_core::verifier::{self, ResidualReport, Tolerances, TrajectoryReport, VerifyError};
use leewave_core::vorticity::{self, ClosedFormCheck, Figure1Row, PsiAnalysis, VorticityError};
use leewave_core::{field_record, solve_dispersion};

use crate::args::{Cli, Command, Common, Family, Figure1Args, Overrides, SamplingMode, TrajectoryArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Vorticity(#[from] VorticityError),
}

impl CliError {
    /// 1 for failures of the solution itself, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Verify(_) | Self::Vorticity(VorticityError::Kinematics(_)) => 1,
            _ => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(source: io::Error) -> Self {
        Self::Io {
            path: "<stream>".into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(passed: bool) -> Self {
        if passed {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Config file (or the built-in reference) with flag overrides applied.
pub fn effective_config(common: &Common) -> Result<Config, CliError> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    apply_overrides(&mut cfg, &common.overrides)?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut Config, o: &Overrides) -> Result<(), CliError> {
    let set = |slot: &mut f64, value: Option<f64>| {
        if let Some(v) = value {
            *slot = v;
        }
    };
    set(&mut cfg.latitude_deg, o.latitude_deg);
    set(&mut cfg.k, o.k);
    set(&mut cfg.c0, o.c0);
    set(&mut cfg.z0, o.z0);
    set(&mut cfg.s0, o.s0);
    set(&mut cfg.r0, o.r0);
    set(&mut cfg.r1, o.r1);
    set(&mut cfg.xi_guard, o.xi_guard);
    if o.c.is_some() {
        cfg.c = o.c;
    }

    let missing = |name: &str| CliError::Usage(format!("--profile needs --{name}"));
    let (mut surface, mut constant) = match cfg.density_profile {
        ProfileConfig::Affine {
            surface_pressure,
            integration_constant,
            ..
        }
        | ProfileConfig::Exponential {
            surface_pressure,
            integration_constant,
            ..
        } => (surface_pressure, integration_constant),
    };
    if o.surface_pressure.is_some() {
        surface = o.surface_pressure;
    }
    if o.integration_constant.is_some() {
        constant = o.integration_constant;
    }
    cfg.density_profile = match (o.profile, cfg.density_profile) {
        (Some(Family::Affine), _) => ProfileConfig::Affine {
            a: o.a.ok_or_else(|| missing("a"))?,
            b: o.b.ok_or_else(|| missing("b"))?,
            surface_pressure: surface,
            integration_constant: constant,
        },
        (Some(Family::Exponential), _) => ProfileConfig::Exponential {
            rho_ref: o.rho_ref.ok_or_else(|| missing("rho-ref"))?,
            lambda: o.lambda.ok_or_else(|| missing("lambda"))?,
            surface_pressure: surface,
            integration_constant: constant,
        },
        (None, ProfileConfig::Affine { a, b, .. }) => {
            if o.rho_ref.is_some() || o.lambda.is_some() {
                return Err(CliError::Usage("--rho-ref/--lambda need an exponential profile".into()));
            }
            ProfileConfig::Affine {
                a: o.a.unwrap_or(a),
                b: o.b.unwrap_or(b),
                surface_pressure: surface,
                integration_constant: constant,
            }
        }
        (None, ProfileConfig::Exponential { rho_ref, lambda, .. }) => {
            if o.a.is_some() || o.b.is_some() {
                return Err(CliError::Usage("--a/--b need an affine profile".into()));
            }
            ProfileConfig::Exponential {
                rho_ref: o.rho_ref.unwrap_or(rho_ref),
                lambda: o.lambda.unwrap_or(lambda),
                surface_pressure: surface,
                integration_constant: constant,
            }
        }
    };
    Ok(())
}

/// `--grid` (uniform unless a seed or random sampling is requested), or the
/// default 10³-node random grid.
pub fn effective_grid(common: &Common) -> Result<GridSpec, CliError> {
    let seed = common.seed.unwrap_or(DEFAULT_SEED);
    let spec = match &common.grid {
        Some(text) => text.parse::<GridSpec>()?,
        None => GridSpec::default_random(seed),
    };
    Ok(match (common.sampling, common.seed) {
        (Some(SamplingMode::Uniform), Some(_)) => {
            return Err(CliError::Usage("--seed conflicts with --sampling uniform".into()))
        }
        (Some(SamplingMode::Uniform), None) => spec.with_sampling(Sampling::Uniform),
        (Some(SamplingMode::Random), _) | (None, Some(_)) => spec.with_sampling(Sampling::Random { seed }),
        (None, None) => spec,
    })
}

fn describe_sampling(grid: &GridSpec) -> String {
    match grid.sampling {
        Sampling::Uniform => "uniform".into(),
        Sampling::Random { seed } => format!("random seed={seed}"),
    }
}

/// `# key: value` lines echoing the effective run configuration.
pub fn write_header(w: &mut dyn Write, command: &str, cfg: &Config, grid: Option<&GridSpec>) -> Result<(), CliError> {
    writeln!(w, "# leewave {command} {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# config: {}", cfg.to_json())?;
    if let Ok(c) = cfg.wave_speed() {
        writeln!(w, "# c: {}", num(c))?;
    }
    if let Some(grid) = grid {
        writeln!(w, "# grid: {grid}")?;
        writeln!(w, "# sampling: {}", describe_sampling(grid))?;
    }
    Ok(())
}

/// Scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSummary {
    pub latitude_deg: f64,
    pub k: f64,
    pub c0: f64,
    pub c: f64,
    /// kc² + f̂c − f̂c₀ − g
    pub residual: f64,
    pub residual_over_g: f64,
}

pub fn cmd_dispersion(cfg: &Config) -> Result<DispersionSummary, CliError> {
    let site = cfg.site()?;
    let c = solve_dispersion(cfg.k, cfg.c0, &site, &cfg.constants).map_err(ConfigError::from)?;
    let residual = verifier::dispersion_residual(cfg.k, c, cfg.c0, &site, &cfg.constants);
    Ok(DispersionSummary {
        latitude_deg: cfg.latitude_deg,
        k: cfg.k,
        c0: cfg.c0,
        c,
        residual,
        residual_over_g: residual.abs() / cfg.constants.g,
    })
}

pub fn cmd_verify(cfg: &Config, grid: &GridSpec) -> Result<ResidualReport, CliError> {
    let atm = cfg.atmosphere()?;
    let nodes = grid.nodes(atm.flow())?;
    Ok(verifier::verify_nodes(
        &atm,
        &nodes,
        &Tolerances::default(),
        grid.to_string(),
        grid.seed(),
    ))
}

/// Write one CSV row per grid node, in grid order. Returns the row count.
pub fn cmd_field(cfg: &Config, grid: &GridSpec, w: &mut dyn Write) -> Result<usize, CliError> {
    let atm = cfg.atmosphere()?;
    let nodes = grid.nodes(atm.flow())?;
    let records = nodes
        .iter()
        .map(|n| field_record(&atm, n))
        .collect::<Result<Vec<_>, _>>()?;
    write_header(w, "field", cfg, Some(grid))?;
    let mut out = csv::Writer::from_writer(&mut *w);
    out.write_record(FieldRecord::HEADER)?;
    for rec in &records {
        out.write_record(rec.values().iter().map(|v| num(*v)))?;
    }
    out.flush()?;
    Ok(records.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VorticitySummary {
    pub grid: String,
    pub seed: Option<u64>,
    pub nodes: usize,
    /// Nodes on the line f + βs = 0, where ∂|γ|/∂z is not evaluated.
    pub flat_trough_nodes: usize,
    pub growth_violations: usize,
    pub min_dgamma_dz: f64,
    /// Closed-form vorticity against the curl of the closed-form tensor.
    pub max_curl_identity_error: f64,
    /// Closed-form vorticity against the Eulerian numerical curl, relative to |γ|.
    pub max_numeric_curl_error: f64,
    /// Closed-form ∂|γ|/∂z against Eulerian differences, relative.
    pub max_dgamma_dz_error: f64,
    pub psi: Option<PsiAnalysis>,
    pub closed_form: Option<ClosedFormCheck>,
    pub passed: bool,
}

pub fn cmd_vorticity(cfg: &Config, grid: &GridSpec) -> Result<VorticitySummary, CliError> {
    let flow = cfg.flow()?;
    let nodes = grid.nodes(&flow)?;
    let mut s = VorticitySummary {
        grid: grid.to_string(),
        seed: grid.seed(),
        nodes: nodes.len(),
        flat_trough_nodes: 0,
        growth_violations: 0,
        min_dgamma_dz: f64::INFINITY,
        max_curl_identity_error: 0.0,
        max_numeric_curl_error: 0.0,
        max_dgamma_dz_error: 0.0,
        psi: None,
        closed_form: None,
        passed: false,
    };
    for node in &nodes {
        let (l, t) = (&node.label, node.t);
        let gamma = vorticity::vorticity_vec(&flow, l, t).map_err(VerifyError::from)?;
        let tensor = vorticity::velocity_gradient(&flow, l, t).map_err(VerifyError::from)?;
        let numeric = vorticity::numeric_vorticity(&flow, l, t).map_err(VerifyError::from)?;
        let scale = gamma.magnitude;
        s.max_curl_identity_error = s
            .max_curl_identity_error
            .max((vorticity::curl(&tensor) - gamma.to_vector()).norm() / scale);
        s.max_numeric_curl_error = s
            .max_numeric_curl_error
            .max((numeric.to_vector() - gamma.to_vector()).norm() / scale);
        match vorticity::dgamma_dz(&flow, l, t) {
            Err(VorticityError::FlatTrough) => s.flat_trough_nodes += 1,
            Err(e) => return Err(e.into()),
            Ok(d) => {
                let fd = vorticity::numeric_dgamma_dz(&flow, l, t).map_err(VerifyError::from)?;
                s.max_dgamma_dz_error = s.max_dgamma_dz_error.max(((fd - d) / d).abs());
                s.min_dgamma_dz = s.min_dgamma_dz.min(d);
                s.growth_violations += usize::from(!(d > 0.0));
            }
        }
    }
    if let Ok(psi) = vorticity::psi_analysis(flow.trough_slope(0.0)) {
        s.closed_form = Some(vorticity::closed_form_check(&psi));
        s.psi = Some(psi);
    }
    s.passed = s.growth_violations == 0
        && s.max_curl_identity_error < 1e-13
        && s.max_numeric_curl_error < 1e-6
        && s.max_dgamma_dz_error < 1e-6
        && s.psi.is_none_or(|p| p.psi_min > 0.0);
    Ok(s)
}

/// Ψ analysis and curve rows for the figure; m_s defaults to the slope of
/// the trough at s = 0.
pub fn cmd_figure1(cfg: &Config, args: &Figure1Args) -> Result<(PsiAnalysis, Vec<Figure1Row>), CliError> {
    let ms = match args.m_s {
        Some(ms) => ms,
        None => cfg.flow()?.trough_slope(0.0),
    };
    let analysis = vorticity::psi_analysis(ms)?;
    let x_max = args.x_max.unwrap_or(4.0 * analysis.x1);
    let rows = vorticity::figure1_data(ms, (0.0, x_max), args.points)?;
    Ok((analysis, rows))
}

pub fn write_figure1(
    w: &mut dyn Write,
    cfg: &Config,
    analysis: &PsiAnalysis,
    rows: &[Figure1Row],
) -> Result<(), CliError> {
    write_header(w, "figure1", cfg, None)?;
    writeln!(
        w,
        "# m_s: {}, A: {}, X1: {}, Psi(X1): {}",
        num(analysis.m_s),
        num(analysis.a),
        num(analysis.x1),
        num(analysis.psi_min)
    )?;
    let mut out = csv::Writer::from_writer(&mut *w);
    out.write_record(["X", "dPsi", "Psi"])?;
    for r in rows {
        out.write_record([num(r.x), num(r.dpsi), num(r.psi)])?;
    }
    out.flush()?;
    Ok(())
}

/// Label from the trajectory flags: r is given directly or through ξ.
pub fn trajectory_label(cfg: &Config, args: &TrajectoryArgs) -> Result<LabelPoint, CliError> {
    let flow = cfg.flow()?;
    let r = args
        .label_r
        .unwrap_or_else(|| flow.trough_m(args.label_s) + args.xi / flow.wave().k);
    Ok(LabelPoint::new(args.q, args.label_s, r))
}

pub fn cmd_trajectory(cfg: &Config, args: &TrajectoryArgs) -> Result<TrajectoryReport, CliError> {
    let flow = cfg.flow()?;
    let label = trajectory_label(cfg, args)?;
    flow.check_label(&label).map_err(|e| CliError::Usage(e.to_string()))?;
    let horizon = args.horizon.unwrap_or_else(|| flow.period());
    if !(horizon > 0.0) || args.steps == 0 {
        return Err(CliError::Usage(
            "trajectory needs --horizon > 0 and --steps >= 1".into(),
        ));
    }
    Ok(verifier::trajectory_consistency(&flow, &label, horizon, args.steps)?)
}

pub fn write_trajectory(w: &mut dyn Write, cfg: &Config, report: &TrajectoryReport) -> Result<(), CliError> {
    write_header(w, "trajectory", cfg, None)?;
    let l = &report.label;
    writeln!(w, "# label: q={}, s={}, r={}", num(l.q), num(l.s), num(l.r))?;
    let c0 = cfg.c0;
    let mut out = csv::Writer::from_writer(&mut *w);
    out.write_record([
        "t",
        "x_analytic",
        "y_analytic",
        "z_analytic",
        "x_rk4",
        "y_rk4",
        "z_rk4",
        "x_plus_c0t",
        "deviation",
    ])?;
    for s in &report.samples {
        let dev = (s.numeric.to_vector() - s.analytic.to_vector()).norm();
        out.write_record([
            num(s.t),
            num(s.analytic.x),
            num(s.analytic.y),
            num(s.analytic.z),
            num(s.numeric.x),
            num(s.numeric.y),
            num(s.numeric.z),
            num(s.analytic.x + c0 * s.t),
            num(dev),
        ])?;
    }
    out.flush()?;
    drop(out);
    writeln!(
        w,
        "# max_deviation_m: {}, amplitude_m: {}, relative: {}",
        num(report.max_error),
        num(report.amplitude),
        num(report.max_error / report.amplitude)
    )?;
    Ok(())
}

fn open(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Run `f` against `--out` or stdout.
fn with_output<T>(out: Option<&PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<T, CliError>) -> Result<T, CliError> {
    match out {
        Some(path) => {
            let mut file = open(path)?;
            let value = f(&mut file)?;
            file.flush().map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(value)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            let value = f(&mut lock)?;
            lock.flush()?;
            Ok(value)
        }
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

/// Dispatch a parsed command line. Diagnostics go to stderr.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    let cfg = effective_config(common)?;
    match &cli.command {
        Command::Dispersion => {
            let d = cmd_dispersion(&cfg)?;
            with_output(common.out.as_ref(), |w| {
                writeln!(w, "c = {} m/s", num(d.c))?;
                writeln!(w, "residual/g = {:.3e}", d.residual_over_g)?;
                Ok(())
            })?;
            Ok(Outcome::from_bool(d.residual_over_g < Tolerances::default().dispersion))
        }
        Command::Verify => {
            let grid = effective_grid(common)?;
            let report = cmd_verify(&cfg, &grid)?;
            with_output(common.out.as_ref(), |w| write_json(w, &report))?;
            eprint!("{report}");
            Ok(Outcome::from_bool(report.passed))
        }
        Command::Field => {
            let grid = effective_grid(common)?;
            let rows = with_output(common.out.as_ref(), |w| cmd_field(&cfg, &grid, w))?;
            eprintln!("wrote {rows} rows");
            Ok(Outcome::Pass)
        }
        Command::Vorticity => {
            let grid = effective_grid(common)?;
            let summary = cmd_vorticity(&cfg, &grid)?;
            with_output(common.out.as_ref(), |w| write_json(w, &summary))?;
            Ok(Outcome::from_bool(summary.passed))
        }
        Command::Figure1(args) => {
            let (analysis, rows) = cmd_figure1(&cfg, args)?;
            with_output(common.out.as_ref(), |w| write_figure1(w, &cfg, &analysis, &rows))?;
            if let Some(path) = &args.svg {
                with_output(Some(path), |w| {
                    Ok(w.write_all(svg::figure1(&analysis, &rows).as_bytes())?)
                })?;
            }
            eprintln!(
                "A = {:.6e}, X1 = {:.6e}, Psi(X1) = {:.16}",
                analysis.a, analysis.x1, analysis.psi_min
            );
            Ok(Outcome::from_bool(analysis.psi_min > 0.0))
        }
        Command::Trajectory(args) => {
            let report = cmd_trajectory(&cfg, args)?;
            with_output(common.out.as_ref(), |w| write_trajectory(w, &cfg, &report))?;
            eprintln!(
                "max deviation {:.3e} m ({:.3e} of the orbit radius)",
                report.max_error,
                report.max_error / report.amplitude
            );
            Ok(Outcome::from_bool(report.max_error < 1e-6 * report.amplitude))
        }
    }
}
