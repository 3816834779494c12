use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use qcorr::broadcast::{self, BroadcastCandidate, EqualInformationCheck};
use qcorr::channels::{recovery_diagnostics, RecoveryDiagnostics};
use qcorr::classify::{self, PptLabel};
use qcorr::corpus;
use qcorr::{ClassicalityVerdict, CorrelationReport, DensityMatrix, ErrorClass, KrausChannel, OptimizerConfig, Side, Units};

#[derive(Debug, Parser)]
#[command(name = "qcorr", version, about = "Classical and quantum correlation measures of bipartite states")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    max_evals: Option<usize>,
    /// Optimizer convergence tolerance; classification tolerance for `classify`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = UnitsArg::Bits)]
    units: UnitsArg,
    /// Outcome count of general POVM searches (default d^2).
    #[arg(long, global = true)]
    outcomes: Option<usize>,
    #[arg(long, global = true)]
    projective_only: bool,
    /// Stinespring ancilla dimension of the broadcast search.
    #[arg(long, global = true)]
    ancilla: Option<usize>,
    /// Measured party of the one-sided search.
    #[arg(long, global = true, value_enum, default_value_t = SideArg::A)]
    side: SideArg,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave the wall time out of the manifest so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mutual information, measured lower bounds and gaps.
    Measures { state: PathBuf },
    /// CC / CQ / QC verdict and PPT label.
    Classify { state: PathBuf },
    /// Local-broadcast search.
    Broadcast { state: PathBuf },
    /// Petz recovery of a local channel.
    Petz {
        state: PathBuf,
        channel: PathBuf,
        /// Party the channel acts on.
        #[arg(long, default_value_t = 0)]
        position: usize,
    },
    /// Measures and broadcast search over a corpus directory, as CSV.
    Suite { corpus: PathBuf },
    /// Writes the labeled corpus.
    GenCorpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 5)]
        per_label: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitsArg {
    Bits,
    Nats,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Bits => Units::Bits,
            UnitsArg::Nats => Units::Nats,
        }
    }
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::A => Side::A,
            SideArg::B => Side::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// A report body with its manifest alongside the body's own fields.
#[derive(Serialize)]
struct Output<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifyOutput {
    #[serde(flatten)]
    verdict: ClassicalityVerdict,
    cq_residual_a: f64,
    cq_residual_b: f64,
    ppt: PptLabel,
    min_partial_transpose_eigenvalue: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BroadcastOutput {
    units: Units,
    #[serde(flatten)]
    candidate: BroadcastCandidate,
    /// Present when the candidate is a valid broadcast state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equal_information: Option<EqualInformationCheck>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PetzOutput {
    units: Units,
    position: usize,
    #[serde(flatten)]
    diagnostics: RecoveryDiagnostics,
}

#[derive(Debug, Serialize)]
struct SuiteRow {
    state_id: String,
    kind_label: String,
    #[serde(rename = "I")]
    i: f64,
    #[serde(rename = "I_cq_lower")]
    i_cq_lower: f64,
    #[serde(rename = "I_cc_lower")]
    i_cc_lower: f64,
    delta_cc_upper: f64,
    lb_residual: f64,
    mi_deficit: f64,
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Invariant(String),
    Optimizer(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Invariant(_) => 3,
            Failure::Optimizer(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(m) | Failure::Invariant(m) | Failure::Optimizer(m) => f.write_str(m),
        }
    }
}

impl From<qcorr::Error> for Failure {
    fn from(e: qcorr::Error) -> Self {
        match e.class() {
            ErrorClass::Parse => Failure::Parse(e.to_string()),
            ErrorClass::Invariant => Failure::Invariant(e.to_string()),
            ErrorClass::Optimizer => Failure::Optimizer(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Parse(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

impl Cli {
    fn config(&self, base: OptimizerConfig) -> std::result::Result<OptimizerConfig, Failure> {
        let cfg = OptimizerConfig {
            seed: self.seed.unwrap_or(base.seed),
            restarts: self.restarts.unwrap_or(base.restarts),
            max_evals: self.max_evals.unwrap_or(base.max_evals),
            tol: self.tol.unwrap_or(base.tol),
            outcome_count: self.outcomes.or(base.outcome_count),
            projective_only: self.projective_only || base.projective_only,
            ancilla_dim: self.ancilla.or(base.ancilla_dim),
        };
        cfg.validate().map_err(|e| Failure::Parse(e.to_string()))?;
        Ok(cfg)
    }

    fn manifest(&self, command: &str, inputs: &[&Path], config: serde_json::Value, seed: u64, start: Instant) -> RunManifest {
        RunManifest {
            command: command.into(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            wall_time_s: (!self.no_timing).then(|| start.elapsed().as_secs_f64()),
        }
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, manifest: &RunManifest, body: &T) -> Outcome {
        let mut text = serde_json::to_string_pretty(&Output { manifest, body }).expect("report serialization cannot fail");
        text.push('\n');
        self.emit(&text)
    }
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("config serialization cannot fail")
}

fn measures(cli: &Cli, path: &Path) -> Outcome {
    let start = Instant::now();
    let rho = DensityMatrix::read(path)?;
    let cfg = cli.config(OptimizerConfig::default())?;
    let report = CorrelationReport::compute(&rho, &cfg, cli.side.into())?;
    let holds = report.chain_holds();
    let report = report.in_units(cli.units.into());
    let manifest = cli.manifest("measures", &[path], to_value(&cfg), cfg.seed, start);
    cli.emit_json(&manifest, &report)?;
    if !holds {
        return Err(Failure::Invariant("ordering chain I >= I_cq >= I_cc >= 0 violated".into()));
    }
    Ok(())
}

fn classify_cmd(cli: &Cli, path: &Path) -> Outcome {
    let start = Instant::now();
    let rho = DensityMatrix::read(path)?;
    let tol = cli.tol.unwrap_or(qcorr::tol::CLASSICAL);
    if !(tol > 0.0) {
        return Err(Failure::Parse("tol must be positive".into()));
    }
    let verdict = classify::is_cc(&rho, tol)?;
    let out = ClassifyOutput {
        cq_residual_a: classify::is_cq(&rho, tol, Side::A)?.residual,
        cq_residual_b: classify::is_cq(&rho, tol, Side::B)?.residual,
        ppt: classify::ppt_label(&rho)?,
        min_partial_transpose_eigenvalue: classify::min_partial_transpose_eigenvalue(&rho)?,
        verdict,
    };
    let manifest = cli.manifest("classify", &[path], serde_json::json!({ "tol": tol }), 0, start);
    cli.emit_json(&manifest, &out)
}

fn broadcast_cmd(cli: &Cli, path: &Path) -> Outcome {
    let start = Instant::now();
    let rho = DensityMatrix::read(path)?;
    let cfg = cli.config(OptimizerConfig::broadcast_default())?;
    let mut candidate = broadcast::broadcast_search(&rho, &cfg)?;
    let equal_information = if candidate.valid {
        let mut check = broadcast::equal_information_check(&candidate.sigma, &rho)?;
        check.mi_deficit *= Units::from(cli.units).from_bits();
        Some(check)
    } else {
        None
    };
    let f = Units::from(cli.units).from_bits();
    candidate.mi_deficit *= f;
    candidate.copy_mutual_information.0 *= f;
    candidate.copy_mutual_information.1 *= f;
    let out = BroadcastOutput {
        units: cli.units.into(),
        candidate,
        equal_information,
    };
    let manifest = cli.manifest("broadcast", &[path], to_value(&cfg), cfg.seed, start);
    cli.emit_json(&manifest, &out)
}

fn petz(cli: &Cli, state: &Path, channel: &Path, position: usize) -> Outcome {
    let start = Instant::now();
    let rho = DensityMatrix::read(state)?;
    let ch = KrausChannel::read(channel)?;
    let mut diagnostics = recovery_diagnostics(&rho, &ch, position)?;
    let f = Units::from(cli.units).from_bits();
    diagnostics.mutual_information_before *= f;
    diagnostics.mutual_information_after *= f;
    let out = PetzOutput {
        units: cli.units.into(),
        position,
        diagnostics,
    };
    let manifest = cli.manifest(
        "petz",
        &[state, channel],
        serde_json::json!({ "position": position }),
        0,
        start,
    );
    cli.emit_json(&manifest, &out)
}

fn suite(cli: &Cli, dir: &Path) -> Outcome {
    let entries = corpus::read(dir)?;
    let cfg = cli.config(OptimizerConfig::default())?;
    let bcfg = cli.config(OptimizerConfig::broadcast_default())?;
    let units = Units::from(cli.units);
    let f = units.from_bits();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut violations = Vec::new();
    for e in &entries {
        log::info!("suite: {}", e.id);
        let report = CorrelationReport::compute(&e.state, &cfg, cli.side.into())?;
        if !report.chain_holds() {
            violations.push(e.id.clone());
        }
        let candidate = broadcast::broadcast_search(&e.state, &bcfg)?;
        wtr.serialize(SuiteRow {
            state_id: e.id.clone(),
            kind_label: e.label.to_string(),
            i: report.mutual_information * f,
            i_cq_lower: report.i_cq_lower * f,
            i_cc_lower: report.i_cc_lower * f,
            delta_cc_upper: report.delta_cc_upper * f,
            lb_residual: candidate.residual(),
            mi_deficit: candidate.mi_deficit * f,
            seed: cfg.seed,
        })?;
    }
    let bytes = wtr.into_inner().map_err(|e| Failure::Parse(e.to_string()))?;
    cli.emit(&String::from_utf8(bytes).expect("csv output is utf-8"))?;
    if !violations.is_empty() {
        return Err(Failure::Invariant(format!("ordering chain violated for {}", violations.join(", "))));
    }
    Ok(())
}

fn gen_corpus(cli: &Cli, dir: &Path, per_label: usize) -> Outcome {
    let seed = cli.seed.unwrap_or(OptimizerConfig::default().seed);
    let entries = corpus::generate(per_label, seed);
    corpus::write(dir, &entries, seed)?;
    log::info!("wrote {} states to {}", entries.len(), dir.display());
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Measures { state } => measures(cli, state),
        Command::Classify { state } => classify_cmd(cli, state),
        Command::Broadcast { state } => broadcast_cmd(cli, state),
        Command::Petz {
            state,
            channel,
            position,
        } => petz(cli, state, channel, *position),
        Command::Suite { corpus } => suite(cli, corpus),
        Command::GenCorpus { dir, per_label } => gen_corpus(cli, dir, *per_label),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcorr: {e}");
            ExitCode::from(e.code())
        }
    }
}
