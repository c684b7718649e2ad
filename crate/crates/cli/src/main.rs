mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdetect::analysis::{AnalysisReport, Analyzer, Init, SimulationReport};
use qdetect::detection::SeriesOptions;
use qdetect::quotient::{symmetric_eigensystem, symmetrize, NodeClass};
use qdetect::spectral::{
    diagonalize, fold_sectors, is_resonant, resonant_periods, Level, Resonance,
};
use qdetect::sweep::Execution;
use qdetect::symmetry::{automorphisms, stabilizer};
use qdetect::{hamiltonian, save_graph};

use config::{InitSpec, TauSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qdetect::Error),
}

impl CliError {
    fn io(path: &str, e: std::io::Error) -> Self {
        CliError::Config(format!("{path}: {e}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qdetect",
    version,
    about = "Detection probabilities of monitored quantum walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// P_det, ν, the symmetry bound and saturation for one or all initial nodes
    Analyze(AnalyzeArgs),
    /// Run the measurement protocol and compare with the spectral value
    Simulate(SimulateArgs),
    /// Reduce the Hamiltonian onto the stabilizer orbits of the detection node
    Quotient(QuotientArgs),
    /// Resonant detection periods in a range
    Resonances(ResonanceArgs),
    /// Eigenvalues, degenerate levels and eigenphase sectors
    Spectrum(SpectrumArgs),
}

#[derive(Args)]
struct Common {
    /// Graph file (JSON) or generator, e.g. ring:6, tree:2, lattice:4x4
    #[arg(long)]
    graph: String,
    /// Hopping rate γ
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    /// Detection node id or state file
    #[arg(long)]
    detect: String,
    /// Initial node id, state file, or `all`
    #[arg(long, default_value = "all")]
    init: String,
    /// Detection period, or scan:min:max:steps
    #[arg(long, default_value = "1.0")]
    tau: String,
    /// Run the per-node sweep on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    detect: String,
    /// Initial node id or state file
    #[arg(long)]
    init: String,
    #[arg(long, default_value = "1.0")]
    tau: String,
    /// Relative tolerance of the series tail
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Maximum number of detection attempts
    #[arg(long, default_value_t = 100_000)]
    max_attempts: usize,
    /// Number of attempts listed in the report
    #[arg(long, default_value_t = 200)]
    record: usize,
}

#[derive(Args)]
struct QuotientArgs {
    /// Graph file (JSON) or generator
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Detection node id
    #[arg(long)]
    detect: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Quotient graph file; the class map goes to `<out>.classes.json`
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResonanceArgs {
    #[command(flatten)]
    common: Common,
    /// Upper end of (0, τ], or scan:min:max:steps for [min, max]
    #[arg(long)]
    tau: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "1.0")]
    tau: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    graph: &'a str,
    gamma: f64,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
pub struct AnalyzeBody {
    pub reports: Vec<AnalysisReport>,
}

#[derive(Serialize)]
pub struct SimulateBody {
    pub report: SimulationReport,
}

#[derive(Serialize)]
pub struct QuotientBody {
    pub original_dim: usize,
    pub reduced_dim: usize,
    pub detect_class: usize,
    pub classes: Vec<NodeClass>,
    pub h_s: Vec<Vec<f64>>,
    pub symmetric_spectrum: Vec<f64>,
    pub levels: Vec<Level>,
    pub graph_file: Option<String>,
    pub classes_file: Option<String>,
}

#[derive(Serialize)]
pub struct ResonanceBody {
    pub tau_min: f64,
    pub tau_max: f64,
    pub resonances: Vec<Resonance>,
}

#[derive(Serialize)]
pub struct SectorRow {
    pub phase: f64,
    pub energies: Vec<f64>,
    pub degeneracy: usize,
}

#[derive(Serialize)]
pub struct SpectrumBody {
    pub tau: f64,
    pub eigenvalues: Vec<f64>,
    pub levels: Vec<Level>,
    pub sectors: Vec<SectorRow>,
    pub near_degenerate: Vec<(f64, f64)>,
    pub resonant: bool,
}

fn emit<T: Serialize + render::Render>(
    command: &str,
    graph: &str,
    gamma: f64,
    body: T,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let text = match format {
        Format::Json => {
            let env = Envelope {
                command,
                graph,
                gamma,
                body,
            };
            let mut s = serde_json::to_string_pretty(&env).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => env_csv(&body)?,
        Format::Text => body.text(),
    };
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::io(&path.display().to_string(), e))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn env_csv<T: render::Render>(body: &T) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    body.csv(&mut w)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let c = &a.common;
    config::gamma(c.gamma)?;
    let g = config::graph(&c.graph)?;
    let n = g.node_count();
    let psi_d = config::state(&a.detect, n)?;
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let mut reports = Vec::new();
    for tau in TauSpec::parse(&a.tau)?.values() {
        let analyzer = Analyzer::new(&g, c.gamma, psi_d.clone(), tau)?;
        warn_all(analyzer.warnings());
        let rows = match config::init(&a.init) {
            InitSpec::All => analyzer.rows_all(exec)?,
            InitSpec::One(s) => {
                let init = match s.parse::<usize>() {
                    Ok(r) => Init::Node(r),
                    Err(_) => Init::State(config::state(&s, n)?),
                };
                vec![analyzer.row(&init)?]
            }
        };
        reports.push(analyzer.report(rows)?);
    }
    emit(
        "analyze",
        &c.graph,
        c.gamma,
        AnalyzeBody { reports },
        c.format,
        c.out.as_ref(),
    )
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let c = &a.common;
    config::gamma(c.gamma)?;
    let g = config::graph(&c.graph)?;
    let n = g.node_count();
    let psi_d = config::state(&a.detect, n)?;
    let tau = TauSpec::parse(&a.tau)?.single()?;
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(CliError::Config(format!(
            "tolerance must lie in (0, 1), got {}",
            a.tol
        )));
    }
    let init = match a.init.parse::<usize>() {
        Ok(r) => Init::Node(r),
        Err(_) => Init::State(config::state(&a.init, n)?),
    };
    let analyzer = Analyzer::new(&g, c.gamma, psi_d, tau)?;
    let opts = SeriesOptions {
        rel_tol: a.tol,
        n_cap: a.max_attempts,
        ..SeriesOptions::default()
    };
    let report = analyzer.simulate(&init, &opts, a.record)?;
    warn_all(&report.warnings);
    emit(
        "simulate",
        &c.graph,
        c.gamma,
        SimulateBody { report },
        c.format,
        c.out.as_ref(),
    )
}

fn quotient(a: QuotientArgs) -> Result<(), CliError> {
    config::gamma(a.gamma)?;
    let g = config::graph(&a.graph)?;
    let n = g.node_count();
    let psi_d = config::state(&a.detect, n)?;
    let h = hamiltonian(&g, a.gamma);
    let stab = stabilizer(&automorphisms(&g)?, &psi_d)?;
    let q = symmetrize(&h, &stab, &psi_d)?;
    let qg = q.quotient_graph(a.gamma)?;
    let es = symmetric_eigensystem(&q)?;
    let (mut graph_file, mut classes_file) = (None, None);
    if let Some(path) = &a.out {
        let gpath = path.display().to_string();
        let cpath = format!("{gpath}.classes.json");
        std::fs::write(path, save_graph(&qg)).map_err(|e| CliError::io(&gpath, e))?;
        let map = serde_json::json!({
            "detect_class": q.detect_class(),
            "classes": q.classes(),
        });
        let mut text = serde_json::to_string_pretty(&map).expect("class map serializes");
        text.push('\n');
        std::fs::write(&cpath, text).map_err(|e| CliError::io(&cpath, e))?;
        graph_file = Some(gpath);
        classes_file = Some(cpath);
    }
    let m = q.h_s().matrix();
    let body = QuotientBody {
        original_dim: n,
        reduced_dim: q.dim(),
        detect_class: q.detect_class(),
        classes: q.classes().to_vec(),
        h_s: (0..q.dim())
            .map(|i| (0..q.dim()).map(|j| m[(i, j)].re).collect())
            .collect(),
        symmetric_spectrum: es.eigenvalues().to_vec(),
        levels: es.levels(),
        graph_file,
        classes_file,
    };
    emit("quotient", &a.graph, a.gamma, body, a.format, None)
}

fn resonances(a: ResonanceArgs) -> Result<(), CliError> {
    let c = &a.common;
    config::gamma(c.gamma)?;
    let g = config::graph(&c.graph)?;
    let es = diagonalize(&hamiltonian(&g, c.gamma))?;
    let (tau_min, tau_max) = TauSpec::parse(&a.tau)?.range();
    let resonances = resonant_periods(&es, tau_max)
        .into_iter()
        .filter(|r| r.tau >= tau_min)
        .collect();
    let body = ResonanceBody {
        tau_min,
        tau_max,
        resonances,
    };
    emit(
        "resonances",
        &c.graph,
        c.gamma,
        body,
        c.format,
        c.out.as_ref(),
    )
}

fn spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let c = &a.common;
    config::gamma(c.gamma)?;
    let g = config::graph(&c.graph)?;
    let tau = TauSpec::parse(&a.tau)?.single()?;
    let es = diagonalize(&hamiltonian(&g, c.gamma))?;
    let sd = fold_sectors(&es, tau)?;
    let resonant = is_resonant(&es, tau);
    if resonant {
        eprintln!("warning: tau = {tau} is resonant");
    }
    let body = SpectrumBody {
        tau,
        eigenvalues: es.eigenvalues().to_vec(),
        levels: es.levels(),
        sectors: sd
            .sectors()
            .iter()
            .map(|s| SectorRow {
                phase: s.phase,
                energies: s.energies.clone(),
                degeneracy: s.degeneracy(),
            })
            .collect(),
        near_degenerate: es.near_degenerate_gaps(),
        resonant,
    };
    emit(
        "spectrum",
        &c.graph,
        c.gamma,
        body,
        c.format,
        c.out.as_ref(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Quotient(a) => quotient(a),
        Command::Resonances(a) => resonances(a),
        Command::Spectrum(a) => spectrum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
