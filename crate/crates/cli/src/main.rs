//! `causalkit`: shell access to causal models.
//!
//! Exit codes: 0 on success, 1 when the input is well formed but rejected
//! (an invalid model, zero-probability evidence), 2 for unreadable input, 3
//! when an exact query exceeds the live-event cap.

mod elicit;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use causalkit::effectual::{expand_synergy, validate_synergy, SynergySpec};
use causalkit::inference::{
    estimate_query, joint_distribution_with, joint_with_elimination_with, query_with, InferenceConfig, InferenceError,
    Query,
};
use causalkit::model::{import_dgraph, DiscreteBayesNet, ModelDoc, NodeKind};
use causalkit::{CausalModel, EventId};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "causalkit", version, about = "Causal models of processes and simple events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file; prints OK or one violation per line.
    Validate { model: PathBuf },
    /// Probability of the targets given evidence.
    Query {
        model: PathBuf,
        /// Target events (repeat or comma-separate).
        #[arg(long = "target", value_delimiter = ',', required = true)]
        targets: Vec<String>,
        /// Evidence events that occurred.
        #[arg(long = "true", value_delimiter = ',')]
        evidence_true: Vec<String>,
        /// Evidence events that did not occur.
        #[arg(long = "false", value_delimiter = ',')]
        evidence_false: Vec<String>,
        /// Estimate from N forward samples instead of computing exactly.
        #[arg(long, value_name = "N")]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = InferenceConfig::default().max_live_events)]
        max_live: usize,
        /// Full-precision JSON output.
        #[arg(long)]
        json: bool,
    },
    /// Convert a binary Bayes net into a causal model.
    ImportDgraph {
        net: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Turn-based entry of one process's causal table, reading answers from stdin.
    Elicit {
        model: PathBuf,
        #[arg(long)]
        process: String,
        /// Session file; defaults to `<model>.<process>.session.json`.
        #[arg(long)]
        session: Option<PathBuf>,
        /// Subset order as comma-separated ids, one argument per subset.
        #[arg(long, num_args = 1..)]
        order: Option<Vec<String>>,
        /// Where to write the updated model; defaults to overwriting the input.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the explicit table of a compressed effectual spec.
    ExpandEffectual { spec: PathBuf },
    /// Print a joint distribution, optionally marginalized onto `--keep`.
    Dump {
        model: PathBuf,
        #[arg(long, value_delimiter = ',')]
        keep: Vec<String>,
        #[arg(long, default_value_t = InferenceConfig::default().max_live_events)]
        max_live: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<std::result::Result<CausalModel, causalkit::model::ModelError>> {
    let text = read(path)?;
    let doc = ModelDoc::from_json(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    let reserved = doc.events.iter().any(|e| e.id.is_reserved());
    Ok(CausalModel::from_doc_with(&doc, reserved))
}

/// Loads a model that must be valid; violations become exit 1.
fn valid_model(path: &Path) -> Result<std::result::Result<CausalModel, ExitCode>> {
    Ok(load_model(path)?.map_err(|e| {
        eprintln!("{e}");
        ExitCode::from(1)
    }))
}

fn ids(v: &[String]) -> Vec<EventId> {
    v.iter().map(|s| EventId::from(s.as_str())).collect()
}

fn inference_exit(e: &InferenceError) -> ExitCode {
    ExitCode::from(match e {
        InferenceError::ModelTooLarge { .. } => 3,
        InferenceError::ZeroEvidence | InferenceError::NoAcceptedSamples => 1,
        _ => 2,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Validate { model } => {
            let text = read(&model)?;
            let doc = ModelDoc::from_json(&text).with_context(|| format!("cannot parse {}", model.display()))?;
            let violations = causalkit::model::validate_model(&doc);
            if violations.is_empty() {
                writeln!(out, "OK")?;
                return Ok(ExitCode::SUCCESS);
            }
            for v in violations {
                writeln!(out, "{v}")?;
            }
            Ok(ExitCode::from(1))
        }
        Command::Query {
            model,
            targets,
            evidence_true,
            evidence_false,
            sample,
            seed,
            max_live,
            json,
        } => {
            let m = match valid_model(&model)? {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let q = Query {
                targets: ids(&targets),
                evidence_true: ids(&evidence_true),
                evidence_false: ids(&evidence_false),
            };
            let result = match sample {
                None => query_with(&m, &q, &InferenceConfig {
                    max_live_events: max_live,
                    ..InferenceConfig::default()
                })
                .map(|p| (p, None)),
                Some(n) => estimate_query(&m, &q, n, seed).map(|e| (e.estimate, Some(e))),
            };
            let (p, est) = match result {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(inference_exit(&e));
                }
            };
            if json {
                let body = match est {
                    None => json!({ "probability": p }),
                    Some(e) => json!({
                        "probability": p,
                        "std_error": e.std_error,
                        "accepted": e.accepted,
                        "drawn": e.drawn,
                    }),
                };
                writeln!(out, "{body}")?;
            } else {
                writeln!(out, "{p:.6}")?;
                if let Some(e) = est {
                    writeln!(out, "std error {:.6} ({} of {} samples accepted)", e.std_error, e.accepted, e.drawn)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportDgraph { net, output } => {
            let text = read(&net)?;
            let net: DiscreteBayesNet =
                serde_json::from_str(&text).with_context(|| format!("cannot parse {}", net.display()))?;
            let m = match import_dgraph(&net) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            fs::write(&output, m.to_json()).with_context(|| format!("cannot write {}", output.display()))?;
            let processes = m.processes().count();
            let simple = m.events().iter().filter(|e| e.kind == NodeKind::Simple).count();
            let edges: usize = m.processes().map(|p| m.effects_of(p).len() + m.triggers_of(p).len()).sum();
            writeln!(out, "processes {processes}\nsimple events {simple}\nedges {edges}")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Elicit {
            model,
            process,
            session,
            order,
            output,
        } => {
            let m = match valid_model(&model)? {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let session = session.unwrap_or_else(|| {
                let mut name = model.as_os_str().to_owned();
                name.push(format!(".{process}.session.json"));
                PathBuf::from(name)
            });
            let stdin = io::stdin();
            let opts = elicit::Options {
                model_path: &model,
                output: output.as_deref().unwrap_or(&model),
                session_path: &session,
                process: process.as_str().into(),
                order,
            };
            elicit::run(&m, &opts, &mut stdin.lock() as &mut dyn BufRead, &mut out)
        }
        Command::ExpandEffectual { spec } => {
            let text = read(&spec)?;
            let spec: SynergySpec =
                serde_json::from_str(&text).with_context(|| format!("cannot parse {}", spec.display()))?;
            let violations = validate_synergy(&spec);
            if !violations.is_empty() {
                for v in violations {
                    eprintln!("{v}");
                }
                return Ok(ExitCode::from(1));
            }
            let rows = expand_synergy(&spec)?;
            let mut lines: Vec<String> = rows
                .iter()
                .map(|r| format!("{}\t{}", causalkit::event::format_subset(&r.subset), r.p))
                .collect();
            lines.sort();
            for l in lines {
                writeln!(out, "{l}")?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dump { model, keep, max_live } => {
            let m = match valid_model(&model)? {
                Ok(m) => m,
                Err(code) => return Ok(code),
            };
            let config = InferenceConfig {
                max_live_events: max_live,
                ..InferenceConfig::default()
            };
            let result = if keep.is_empty() {
                joint_distribution_with(&m, &config)
            } else {
                joint_with_elimination_with(&m, &ids(&keep), &config)
            };
            match result {
                Ok((jd, _)) => {
                    write!(out, "{}", jd.dump())?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(inference_exit(&e))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
