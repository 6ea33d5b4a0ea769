use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use goalbench_core::canonical::to_canonical_string;
use goalbench_core::layout::{export_dot, export_svg, layout_goal_graph, LayoutOptions};
use goalbench_core::model::{parse_document, validate, GoalGraph, ModelError, ValidationReport};
use goalbench_core::propagation::Assignment;

use crate::api::{self, ApiError, MonteCarloRequest, ScenarioRequest, WhatIfRequest, DEFAULT_RUNS, DEFAULT_SEED};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "goalbench", version, about = "Analyse quantified goal models")]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Usage profile (defaults to the model's default profile).
    #[arg(long)]
    pub profile: Option<String>,

    /// Task assignment on top of As-Is, e.g. `T1=ToBe` or `T2=3.5`.
    #[arg(long = "set", value_name = "TASK=VALUE", value_parser = api::parse_assignment)]
    pub set: Vec<(String, Assignment)>,
}

impl ScenarioArgs {
    fn request(&self) -> ScenarioRequest {
        ScenarioRequest {
            profile: self.profile.clone(),
            assignments: self.set.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutFormat {
    Dot,
    Svg,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model and list every rule violation.
    Validate { model: PathBuf },
    /// Propagate a scenario to every node.
    Propagate {
        model: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Compare two scenarios node by node.
    Whatif {
        model: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Profile of the changed scenario (defaults to the base profile).
        #[arg(long)]
        to_profile: Option<String>,
        /// Assignments of the changed scenario, applied over the base ones.
        #[arg(long = "to-set", value_name = "TASK=VALUE", value_parser = api::parse_assignment)]
        to_set: Vec<(String, Assignment)>,
    },
    /// As-Is versus To-Be levels of everything a functional task feeds.
    Benefit {
        model: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Range of a task's level or states keeping downstream objectives met.
    Tolerance {
        model: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long)]
        objective: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Stakeholder utilities of a scenario and their disagreement.
    Utility {
        model: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Root-goal weight, e.g. `G4=2`; unlisted roots weigh 0 once any is given.
        #[arg(long = "weight", value_name = "GOAL=WEIGHT", value_parser = parse_weight)]
        weights: Vec<(String, f64)>,
        /// Standard deviation above which stakeholders are in conflict.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Sample estimate uncertainty and summarise the propagated levels.
    Montecarlo {
        model: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Report similar goals within and across models.
    Dedupe {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Draw the goal graph.
    Layout {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = LayoutFormat::Svg)]
        format: LayoutFormat,
        #[arg(long, default_value_t = 40.0)]
        node_gap: f64,
        #[arg(long, default_value_t = 120.0)]
        layer_gap: f64,
    },
    /// Serve the model over HTTP.
    Serve {
        model: PathBuf,
        #[arg(long, env = "GOALBENCH_BIND", default_value = DEFAULT_BIND)]
        bind: SocketAddr,
    },
}

fn parse_weight(pair: &str) -> Result<(String, f64), String> {
    let (goal, w) = pair
        .split_once('=')
        .ok_or_else(|| format!("`{pair}` is not of the form GOAL=WEIGHT"))?;
    let w: f64 = w.trim().parse().map_err(|_| format!("`{w}` is not a number"))?;
    Ok((goal.trim().to_string(), w))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("{path}: model has validation errors")]
    Invalid { path: PathBuf, report: ValidationReport },
    #[error(transparent)]
    Request(#[from] ApiError),
    #[error("server: {0}")]
    Server(std::io::Error),
}

impl CliError {
    /// 1 for model problems, 2 for bad invocations and unreadable files.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model { .. } | CliError::Invalid { .. } => 1,
            CliError::Io { .. } | CliError::Request(_) | CliError::Server(_) => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse(path: &Path) -> Result<GoalGraph, CliError> {
    parse_document(&read(path)?).map_err(|source| CliError::Model {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse and validate; any ERROR finding stops the command.
pub fn load(path: &Path) -> Result<GoalGraph, CliError> {
    let graph = parse(path)?;
    let report = validate(&graph);
    if report.has_errors() {
        return Err(CliError::Invalid {
            path: path.to_path_buf(),
            report,
        });
    }
    Ok(graph)
}

/// Report text and exit code of a finished command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub code: u8,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

/// Run every command except `serve`.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let out = match command {
        Command::Validate { model } => {
            let report = validate(&parse(model)?);
            let code = if report.has_errors() { 1 } else { 0 };
            return Ok(Outcome {
                text: to_canonical_string(&report),
                code,
            });
        }
        Command::Propagate { model, scenario } => api::propagate_scenario(&load(model)?, &scenario.request())?,
        Command::Whatif {
            model,
            scenario,
            to_profile,
            to_set,
        } => {
            let base = scenario.request();
            let mut changed = base.clone();
            if let Some(p) = to_profile {
                changed.profile = Some(p.clone());
            }
            changed.assignments.extend(to_set.iter().cloned());
            api::whatif(&load(model)?, &WhatIfRequest { base, changed })?
        }
        Command::Benefit { model, task, profile } => api::benefit(&load(model)?, task, profile.as_deref())?,
        Command::Tolerance {
            model,
            task,
            objective,
            scenario,
        } => api::tolerance(&load(model)?, &scenario.request(), task, objective)?,
        Command::Utility {
            model,
            scenario,
            weights,
            threshold,
        } => {
            let weights: BTreeMap<String, f64> = weights.iter().cloned().collect();
            let weights = (!weights.is_empty()).then_some(&weights);
            api::utility(&load(model)?, &scenario.request(), weights, *threshold)?
        }
        Command::Montecarlo {
            model,
            scenario,
            runs,
            seed,
        } => api::montecarlo(
            &load(model)?,
            &MonteCarloRequest {
                profile: scenario.profile.clone(),
                assignments: scenario.set.iter().cloned().collect(),
                runs: Some(*runs),
                seed: Some(*seed),
            },
        )?,
        Command::Dedupe { models, threshold } => {
            let graphs = models.iter().map(|m| load(m)).collect::<Result<Vec<_>, _>>()?;
            api::duplicates(&graphs, *threshold)?
        }
        Command::Layout {
            model,
            format,
            node_gap,
            layer_gap,
        } => {
            let graph = load(model)?;
            let options = LayoutOptions {
                node_gap: *node_gap,
                layer_gap: *layer_gap,
                ..LayoutOptions::default()
            };
            let layout = layout_goal_graph(&graph, &options).map_err(ApiError::from)?;
            match format {
                LayoutFormat::Dot => export_dot(&layout),
                LayoutFormat::Svg => export_svg(&layout),
                LayoutFormat::Json => to_canonical_string(&layout),
            }
        }
        Command::Serve { .. } => unreachable!("serve is handled by run"),
    };
    Ok(Outcome::ok(out))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Serve { model, bind } => load(model).and_then(|graph| {
            crate::server::serve_blocking(graph, *bind).map_err(CliError::Server)?;
            Ok(Outcome::ok(String::new()))
        }),
        command => execute(command),
    };
    match result {
        Ok(outcome) => match emit(cli.output.as_deref(), &outcome.text) {
            Ok(()) => outcome.code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(CliError::Invalid { path, report }) => {
            eprintln!("error: {}: model has {} validation error(s)", path.display(), report.errors().count());
            // the report is the command's output, so it goes where output goes
            let _ = emit(cli.output.as_deref(), &to_canonical_string(&report));
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
