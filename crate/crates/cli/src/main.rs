//! `tradeoff`: optimized trade-off curves, the validation suite and Monte
//! Carlo runs for the measure-and-feed-forward scheme.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
//! failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tradeoff_core::curve::{generate_curve, CurveKind, CurveSpec};
use tradeoff_core::export::{self, thermal_batch_file_name, Format, Metadata};
use tradeoff_core::fidelities::{
    avg_id_fidelities, disturbance_fidelity_coherent, fock_estimation, info_fidelity_coherent,
    oracle_fidelity, Ensemble, FidelityKind,
};
use tradeoff_core::montecarlo::{
    empirical_estimate_distribution, empirical_id_fidelities, empirical_id_fidelities_gaussian,
    EstimateWithError, HistogramGrid, RunConfig,
};
use tradeoff_core::phase_space::InputState;
use tradeoff_core::quadrature::QuadratureSpec;
use tradeoff_core::scheme::SchemeParams;
use tradeoff_core::validation::{run_validation, Mutation, ValidationConfig};
use tradeoff_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "tradeoff", version, about = "Information/disturbance and estimation/distortion trade-offs of double-homodyne measurement with feed-forward")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the beam-splitter angle and write an optimized trade-off curve.
    Curve(CurveArgs),
    /// Run the closed-form vs oracle validation suite.
    Validate(ValidateArgs),
    /// Monte Carlo estimate of G and F (coherent inputs) or of the
    /// estimate-distribution overlap (any input).
    Mc(McArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    IdCoherent,
    EdCoherent,
    EdFock,
    EdThermal,
}

impl From<KindArg> for CurveKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::IdCoherent => CurveKind::IdCoherent,
            KindArg::EdCoherent => CurveKind::EdCoherent,
            KindArg::EdFock => CurveKind::EdFock,
            KindArg::EdThermal => CurveKind::EdThermal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Detector efficiency in (0, 1].
    #[arg(long)]
    eta: f64,
    /// Width of the Gaussian coherent ensemble (id-/ed-coherent).
    #[arg(long)]
    omega: Option<f64>,
    /// Mean photon number of the thermal ensemble; repeat for a batch.
    #[arg(long, num_args = 1..)]
    nbar: Vec<f64>,
    /// Thermal truncation (default: automatic, tail < 1e-8).
    #[arg(long)]
    n_trunc: Option<usize>,
    /// Photon number of the input (ed-fock); repeat for a batch.
    #[arg(long, num_args = 1..)]
    fock_n: Vec<u32>,
    /// Use the universal protocol instead of the optimized parameters.
    #[arg(long)]
    universal: bool,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Recorded in the JSON metadata.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file, or directory for batches. Single curves go to stdout
    /// when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Ensemble width of the universal-limit check.
    #[arg(long, default_value_t = 1e3)]
    omega_limit: f64,
    /// Inject a known fault; the suite must then fail.
    #[arg(long, value_enum)]
    mutate: Option<MutationArg>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MutationArg {
    FlipKExponent,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long)]
    phi: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    g: f64,
    /// Coherent amplitude as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, conflicts_with_all = ["omega", "fock_n"])]
    beta: Option<(f64, f64)>,
    /// Redraw the coherent amplitude every trial from the Gaussian set.
    #[arg(long, conflicts_with = "fock_n")]
    omega: Option<f64>,
    /// Number-state input; reports the estimate-distribution overlap.
    #[arg(long)]
    fock_n: Option<u32>,
    /// Histogram the rescaled outcomes and report their overlap with the
    /// input Q-function.
    #[arg(long)]
    histogram: bool,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

fn parse_complex(s: &str) -> Result<(f64, f64), String> {
    let mut parts = s.split(',');
    let re = parts
        .next()
        .unwrap_or_default()
        .trim()
        .parse::<f64>()
        .map_err(|e| e.to_string())?;
    let im = match parts.next() {
        Some(v) => v.trim().parse::<f64>().map_err(|e| e.to_string())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err("expected `re` or `re,im`".into());
    }
    Ok((re, im))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Curve(a) => run_curve(a),
        Command::Validate(a) => run_validate(a),
        Command::Mc(a) => run_mc(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(core) if core.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

fn run_curve(a: CurveArgs) -> anyhow::Result<ExitCode> {
    let kind = CurveKind::from(a.kind);
    let format = Format::from(a.format);
    let base = |ensemble| CurveSpec {
        curve: kind,
        eta: a.eta,
        ensemble,
        phi_steps: a.steps,
        universal: a.universal,
    };
    // One (spec, batch file name) per requested curve.
    let jobs: Vec<(CurveSpec, String)> = match kind {
        CurveKind::IdCoherent | CurveKind::EdCoherent => {
            let omega = match (a.omega, a.universal) {
                (Some(o), _) => o,
                // Universal curves do not depend on the ensemble width.
                (None, true) => 1.0,
                (None, false) => bail!(Error::InvalidParams(format!("{kind} needs --omega"))),
            };
            let name = format!("{}_omega{omega}_eta{}.{}", kind.name().replace('-', "_"), a.eta, format.extension());
            vec![(base(Ensemble::GaussianCoherent { omega }), name)]
        }
        CurveKind::EdFock => {
            if a.fock_n.is_empty() {
                bail!(Error::InvalidParams("ed-fock needs --fock-n".into()));
            }
            a.fock_n
                .iter()
                .map(|&n| {
                    let name = format!("ed_fock_n{n}_eta{}.{}", a.eta, format.extension());
                    (base(Ensemble::Single(InputState::Fock(n))), name)
                })
                .collect()
        }
        CurveKind::EdThermal => {
            if a.nbar.is_empty() {
                bail!(Error::InvalidParams("ed-thermal needs --nbar".into()));
            }
            a.nbar
                .iter()
                .map(|&nbar| {
                    let ensemble = Ensemble::ThermalFock {
                        nbar,
                        n_trunc: a.n_trunc,
                    };
                    (base(ensemble), thermal_batch_file_name(nbar, a.eta, format))
                })
                .collect()
        }
    };

    let batch = jobs.len() > 1 || a.out.as_deref().is_some_and(Path::is_dir);
    if batch {
        let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (spec, name) in &jobs {
            let points = generate_curve(spec)?;
            let path = dir.join(name);
            export::export(&points, format, &path, &Metadata::new(*spec, a.seed))?;
            eprintln!("wrote {} ({} points)", path.display(), points.len());
        }
        return Ok(ExitCode::SUCCESS);
    }

    let (spec, _) = &jobs[0];
    let points = generate_curve(spec)?;
    let meta = Metadata::new(*spec, a.seed);
    match &a.out {
        Some(path) => {
            export::export(&points, format, path, &meta)?;
            eprintln!("wrote {} ({} points)", path.display(), points.len());
        }
        None => {
            let body = match format {
                Format::Csv => export::to_csv(&points),
                Format::Json => export::to_json(&points, &meta)? + "\n",
            };
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_validate(a: ValidateArgs) -> anyhow::Result<ExitCode> {
    let cfg = ValidationConfig {
        omega_limit: a.omega_limit,
        mutation: a.mutate.map(|MutationArg::FlipKExponent| Mutation::FlipDistortionExponent),
        ..ValidationConfig::default()
    };
    let report = run_validation(&cfg)?;
    let body = match a.format {
        ReportFormat::Text => format!("{report}\n"),
        ReportFormat::Json => serde_json_string(&report)?,
    };
    emit(&body, a.out.as_deref())?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in report.failures() {
            eprintln!("validation failed: {} (worst {:e}, tol {:e})", f.name, f.worst_deviation, f.tolerance);
        }
        Ok(ExitCode::from(EXIT_VALIDATION))
    }
}

fn emit(body: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(body.as_bytes())?),
    }
}

fn serde_json_string<T: serde::Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

#[derive(serde::Serialize)]
struct McFidelity {
    name: &'static str,
    estimate: EstimateWithError,
    analytic: f64,
}

#[derive(serde::Serialize)]
struct McHistogram {
    bhattacharyya: f64,
    trials: u64,
    bins: usize,
    half_width: f64,
    oracle_h: f64,
}

#[derive(serde::Serialize)]
struct McReport {
    params: SchemeParams,
    config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fidelities: Vec<McFidelity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram: Option<McHistogram>,
}

fn run_mc(a: McArgs) -> anyhow::Result<ExitCode> {
    let p = SchemeParams::new(a.eta, a.phi, a.kappa, a.g)?;
    let cfg = RunConfig::new(a.trials, a.seed, a.workers)?;
    let quad = QuadratureSpec::default();
    let mut report = McReport {
        params: p,
        config: cfg,
        fidelities: Vec::new(),
        histogram: None,
    };

    let state = match (a.fock_n, a.beta) {
        (Some(n), _) => InputState::Fock(n),
        (None, Some((re, im))) => InputState::Coherent(num_complex(re, im)),
        (None, None) => InputState::Coherent(num_complex(0.0, 0.0)),
    };

    if let Some(omega) = a.omega {
        let (g, f) = empirical_id_fidelities_gaussian(omega, &p, &cfg)?;
        let analytic = avg_id_fidelities(p.eta, p.phi, omega, p.kappa, p.g)?;
        report.fidelities.push(McFidelity { name: "G", estimate: g, analytic: analytic.x });
        report.fidelities.push(McFidelity { name: "F", estimate: f, analytic: analytic.y });
    } else if let InputState::Coherent(beta) = state {
        let (g, f) = empirical_id_fidelities(beta, &p, &cfg)?;
        report.fidelities.push(McFidelity { name: "G", estimate: g, analytic: info_fidelity_coherent(&p, beta) });
        report.fidelities.push(McFidelity { name: "F", estimate: f, analytic: disturbance_fidelity_coherent(&p, beta) });
    }

    if a.histogram || a.fock_n.is_some() {
        let grid = HistogramGrid::default_for(&state);
        let h = empirical_estimate_distribution(&state, &p, &cfg, grid)?;
        let oracle_h = match state {
            InputState::Fock(n) => fock_estimation(n, &p, &quad)?,
            InputState::Coherent(_) => oracle_fidelity(FidelityKind::Estimation, &state, &p, &quad)?,
        };
        report.histogram = Some(McHistogram {
            bhattacharyya: h.bhattacharyya,
            trials: h.trials,
            bins: grid.bins,
            half_width: grid.half_width,
            oracle_h,
        });
    }

    let body = match a.format {
        ReportFormat::Json => serde_json_string(&report)?,
        ReportFormat::Text => {
            let mut s = format!(
                "eta={} phi={} kappa={} g={} trials={} seed={} workers={}\n",
                p.eta, p.phi, p.kappa, p.g, cfg.trials, cfg.seed, cfg.workers
            );
            for f in &report.fidelities {
                let z = if f.estimate.std_error > 0.0 {
                    (f.estimate.mean - f.analytic) / f.estimate.std_error
                } else {
                    0.0
                };
                s += &format!(
                    "{}: {:.6} +- {:.6} (analytic {:.6}, {:+.2} se)\n",
                    f.name, f.estimate.mean, f.estimate.std_error, f.analytic, z
                );
            }
            if let Some(h) = &report.histogram {
                s += &format!(
                    "estimate overlap: {:.6} ({}x{} bins; quadrature H {:.6})\n",
                    h.bhattacharyya, h.bins, h.bins, h.oracle_h
                );
            }
            s
        }
    };
    emit(&body, None)?;
    Ok(ExitCode::SUCCESS)
}

fn num_complex(re: f64, im: f64) -> tradeoff_core::phase_space::ComplexAmplitude {
    tradeoff_core::phase_space::ComplexAmplitude::new(re, im)
}
