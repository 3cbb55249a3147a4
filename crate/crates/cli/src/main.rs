//! Command-line front end for the history and temporal-correlation library.
//!
//! Exit codes: 0 success, 2 input error, 3 optimizer did not converge,
//! 4 impossible post-selection.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use histcorr::bell::{
    self, chained_bell, monogamy_sum, optimize_settings, presets, s_lgi, CorrelatorSpec,
    EvaluationMode, MonogamySpec, Objective, OptimizerConfig,
};
use histcorr::histories::{chain_operator_sum, is_consistent_family, weight};
use histcorr::linalg::DEFAULT_TOL;
use histcorr::scenarios::{self, Artifact, ScenarioResult};
use histcorr::twostate::{maximally_mixed, mixed_sequence_distribution, sequence_distribution};
use histcorr::{BridgingSet, ComplexMatrix, Error, HistoryState, Ket, MeasurementSetting};

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_POSTSELECTION: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "histcorr",
    version,
    about = "Entangled histories and temporal Bell functionals"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Comparison tolerance for consistency checks.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for the settings optimizer.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON input document for the command.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Independent,
    Chained,
}

impl From<Mode> for EvaluationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Independent => EvaluationMode::IndependentEnsembles,
            Mode::Chained => EvaluationMode::ChainedSingleSystem,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LgiPreset {
    Tsirelson,
    PaperQuoted,
    Classical,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MonogamyPreset {
    Paper,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ChainedPreset {
    Tsirelson,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    SLgi,
    Monogamy,
    Chained,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a named scenario.
    Scenario {
        name: String,
        /// Number of time slots (temporal-ghz only).
        #[arg(long)]
        slots: Option<usize>,
    },
    /// Evaluate the two-time CHSH functional.
    Lgi {
        #[arg(long, value_enum)]
        preset: Option<LgiPreset>,
    },
    /// Evaluate the chained sum of n two-time blocks.
    Chained {
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(long, value_enum)]
        preset: Option<ChainedPreset>,
    },
    /// Evaluate S_AB + S_BC over three times.
    Monogamy {
        #[arg(long, value_enum)]
        preset: Option<MonogamyPreset>,
        #[arg(long, value_enum, default_value_t = Mode::Independent)]
        mode: Mode,
    },
    /// Search Bloch-angle settings that maximize a functional.
    Optimize {
        #[arg(long, value_enum, default_value_t = ObjectiveArg::SLgi)]
        objective: ObjectiveArg,
        #[arg(short = 'n', default_value_t = 1)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Independent)]
        mode: Mode,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
    },
    /// Weight and chain operator of a history read from --input.
    Weight,
    /// Outcome distribution of a pre/post-selected experiment read from --input.
    Abl,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ImpossiblePostselection { .. } => EXIT_POSTSELECTION,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Initial state: `"maximally_mixed"`, a ket, or a density matrix.
#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum StateDoc {
    Named(String),
    Ket(Ket),
    Density(ComplexMatrix),
}

impl StateDoc {
    fn density(&self) -> Result<ComplexMatrix, Failure> {
        match self {
            StateDoc::Named(n) if n == "maximally_mixed" => Ok(maximally_mixed(2)),
            StateDoc::Named(n) => Err(Failure::input(format!(
                "unknown state {n:?}; use \"maximally_mixed\", a ket or a density matrix"
            ))),
            StateDoc::Ket(k) => Ok(k.density()),
            StateDoc::Density(m) => Ok(m.clone()),
        }
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct BellInput {
    initial: Option<StateDoc>,
    unitary: Option<ComplexMatrix>,
    alice: Option<[MeasurementSetting; 2]>,
    bob: Option<[MeasurementSetting; 2]>,
    carol: Option<[MeasurementSetting; 2]>,
    /// Setting pairs A_0 … A_n for chained runs.
    settings: Option<Vec<[MeasurementSetting; 2]>>,
    mode: Option<EvaluationMode>,
    n: Option<usize>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct WeightInput {
    history: HistoryState,
    bridging: Option<BridgingSet>,
    family: Option<Vec<HistoryState>>,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct AblInput {
    pre: Option<Ket>,
    rho: Option<StateDoc>,
    post: Option<Ket>,
    slots: Vec<Option<MeasurementSetting>>,
    #[serde(default)]
    unitaries: Vec<ComplexMatrix>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: cannot read: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn optional_input<T: for<'de> Deserialize<'de>>(
    path: &Option<PathBuf>,
) -> Result<Option<T>, Failure> {
    path.as_deref().map(read_json).transpose()
}

fn required_input<T: for<'de> Deserialize<'de>>(
    path: &Option<PathBuf>,
    what: &str,
) -> Result<T, Failure> {
    optional_input(path)?.ok_or_else(|| Failure::input(format!("{what} needs --input <file>")))
}

/// Report body plus a format-specific CSV rendering.
struct Output {
    doc: ScenarioResult,
    csv: String,
    exit: u8,
}

impl Output {
    fn new(doc: ScenarioResult, csv: String) -> Self {
        Output { doc, csv, exit: 0 }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Scenario { name, slots } => {
            if !scenarios::NAMES.contains(&name.as_str()) {
                return Err(Failure::input(format!(
                    "unknown scenario {name:?}; valid names: {}",
                    scenarios::NAMES.join(", ")
                )));
            }
            let r = scenarios::by_name(name, *slots)?;
            let csv = r.to_csv();
            Ok(Output::new(r, csv))
        }
        Command::Lgi { preset } => {
            let input: Option<BellInput> = optional_input(&cli.input)?;
            let spec = match (input, preset) {
                (Some(inp), None) => {
                    let initial = inp
                        .initial
                        .as_ref()
                        .map(StateDoc::density)
                        .transpose()?
                        .unwrap_or(maximally_mixed(2));
                    let mut spec = CorrelatorSpec::new(
                        initial,
                        inp.alice
                            .ok_or_else(|| Failure::input("lgi input needs \"alice\""))?,
                        inp.bob
                            .ok_or_else(|| Failure::input("lgi input needs \"bob\""))?,
                    );
                    if let Some(u) = inp.unitary {
                        spec.interval_unitaries = vec![u];
                    }
                    if let Some(m) = inp.mode {
                        spec.mode = m;
                    }
                    spec
                }
                (None, p) => {
                    let rho = maximally_mixed(2);
                    match p.unwrap_or(LgiPreset::Tsirelson) {
                        LgiPreset::Tsirelson => presets::tsirelson(rho),
                        LgiPreset::PaperQuoted => presets::paper_quoted(rho),
                        LgiPreset::Classical => {
                            let z = MeasurementSetting::z();
                            CorrelatorSpec::new(rho, [z.clone(), z.clone()], [z.clone(), z])
                        }
                    }
                }
                (Some(_), Some(_)) => {
                    return Err(Failure::input("use either --preset or --input, not both"))
                }
            };
            let report = s_lgi(&spec)?;
            let csv = report.to_csv();
            let mut doc = ScenarioResult::new("lgi");
            doc.put("report", Artifact::Bell(report));
            Ok(Output::new(doc, csv))
        }
        Command::Chained { n, preset } => {
            let input: Option<BellInput> = optional_input(&cli.input)?;
            let (n, settings, rho, u) = match (input, preset) {
                (Some(inp), None) => {
                    let rho = inp
                        .initial
                        .as_ref()
                        .map(StateDoc::density)
                        .transpose()?
                        .unwrap_or(maximally_mixed(2));
                    let u = inp.unitary.unwrap_or(ComplexMatrix::identity(rho.rows()));
                    let settings = match (inp.settings, inp.alice, inp.bob) {
                        (Some(s), _, _) => s,
                        (None, Some(a), Some(b)) => vec![a, b],
                        _ => {
                            return Err(Failure::input(
                                "chained input needs \"settings\" or \"alice\" and \"bob\"",
                            ))
                        }
                    };
                    (inp.n.unwrap_or(*n), settings, rho, u)
                }
                (None, _) => (
                    *n,
                    presets::chained_loop(),
                    maximally_mixed(2),
                    ComplexMatrix::identity(2),
                ),
                (Some(_), Some(_)) => {
                    return Err(Failure::input("use either --preset or --input, not both"))
                }
            };
            let report = chained_bell(n, &settings, &rho, &u)?;
            let csv = report.to_csv();
            let mut doc = ScenarioResult::new("chained");
            doc.put("report", Artifact::Chained(report));
            Ok(Output::new(doc, csv))
        }
        Command::Monogamy { preset, mode } => {
            let input: Option<BellInput> = optional_input(&cli.input)?;
            let spec = match (input, preset) {
                (Some(inp), None) => {
                    let rho = inp
                        .initial
                        .as_ref()
                        .map(StateDoc::density)
                        .transpose()?
                        .unwrap_or(maximally_mixed(2));
                    let missing =
                        || Failure::input("monogamy input needs \"alice\", \"bob\" and \"carol\"");
                    let mut spec = MonogamySpec::trivial(
                        rho,
                        inp.alice.ok_or_else(missing)?,
                        inp.bob.ok_or_else(missing)?,
                        inp.carol.ok_or_else(missing)?,
                        inp.mode.unwrap_or((*mode).into()),
                    );
                    if let Some(u) = inp.unitary {
                        spec.unitaries = [u.clone(), u];
                    }
                    spec
                }
                (None, _) => presets::monogamy(maximally_mixed(2), (*mode).into()),
                (Some(_), Some(_)) => {
                    return Err(Failure::input("use either --preset or --input, not both"))
                }
            };
            let report = monogamy_sum(&spec)?;
            let csv = report.to_csv();
            let mut doc = ScenarioResult::new("monogamy");
            doc.put("report", Artifact::Monogamy(report));
            Ok(Output::new(doc, csv))
        }
        Command::Optimize {
            objective,
            n,
            mode,
            restarts,
        } => {
            let input: Option<BellInput> = optional_input(&cli.input)?;
            let rho = match input.as_ref().and_then(|i| i.initial.as_ref()) {
                Some(s) => s.density()?,
                None => maximally_mixed(2),
            };
            let u = input
                .and_then(|i| i.unitary)
                .unwrap_or(ComplexMatrix::identity(rho.rows()));
            let objective = match objective {
                ObjectiveArg::SLgi => Objective::SLgi,
                ObjectiveArg::Monogamy => Objective::MonogamySum((*mode).into()),
                ObjectiveArg::Chained => Objective::ChainedBell(*n),
            };
            let cfg = OptimizerConfig {
                seed: cli.seed,
                restarts: *restarts,
                ..OptimizerConfig::default()
            };
            let result = optimize_settings(objective, &rho, &u, &cfg)?;
            let exit = if result.converged {
                0
            } else {
                EXIT_NOT_CONVERGED
            };
            let csv = result.trace_csv();
            let mut doc = ScenarioResult::new("optimize");
            if !result.converged {
                doc.notes
                    .push("evaluation budget exhausted before the tolerance was met".into());
            }
            doc.put("value", Artifact::Scalar(result.value));
            doc.put("quantum_bound", Artifact::Scalar(bell::QUANTUM_BOUND));
            doc.put("result", Artifact::Optimization(result));
            Ok(Output { doc, csv, exit })
        }
        Command::Weight => {
            let inp: WeightInput = required_input(&cli.input, "weight")?;
            let b = match inp.bridging {
                Some(b) => b,
                None => BridgingSet::trivial(inp.history.grid())?,
            };
            let mut doc = ScenarioResult::new("weight");
            doc.put("weight", Artifact::Scalar(weight(&inp.history, &b)?));
            doc.put(
                "chain_operator",
                Artifact::Matrix(chain_operator_sum(&inp.history, &b)?),
            );
            if let Some(family) = inp.family {
                doc.put(
                    "consistency",
                    Artifact::Consistency(is_consistent_family(&family, &b, cli.tol)?),
                );
            }
            let csv = doc.to_csv();
            Ok(Output::new(doc, csv))
        }
        Command::Abl => {
            let inp: AblInput = required_input(&cli.input, "abl")?;
            let dist = match (&inp.pre, &inp.rho) {
                (Some(pre), None) => {
                    let exp = if inp.unitaries.is_empty() {
                        histcorr::TwoTimeExperiment::trivial(
                            pre.clone(),
                            inp.post.clone(),
                            inp.slots.clone(),
                        )?
                    } else {
                        histcorr::TwoTimeExperiment::new(
                            pre.clone(),
                            inp.post.clone(),
                            inp.slots.clone(),
                            inp.unitaries.clone(),
                        )?
                    };
                    sequence_distribution(&exp)?
                }
                (None, Some(rho)) => mixed_sequence_distribution(
                    &rho.density()?,
                    &inp.slots,
                    &inp.unitaries,
                    inp.post.as_ref(),
                )?,
                _ => {
                    return Err(Failure::input(
                        "abl input needs exactly one of \"pre\" or \"rho\"",
                    ))
                }
            };
            let csv = dist.to_csv();
            let mut doc = ScenarioResult::new("abl");
            doc.put("distribution", Artifact::Distribution(dist));
            Ok(Output::new(doc, csv))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => out.doc.to_json() + "\n",
                Format::Csv => out.csv,
                Format::Pretty => out.doc.pretty(),
            };
            let written = match &cli.out {
                Some(path) => {
                    fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            if out.exit != 0 {
                eprintln!("warning: optimizer did not converge");
            }
            ExitCode::from(out.exit)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
