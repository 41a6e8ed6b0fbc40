//! Terminal fallback for the elicitation flow.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use causalkit::elicitation::{ElicitationError, ElicitationSession, MarginalSequence};
use causalkit::{CausalModel, EventId, NodeKind};

pub struct Options<'a> {
    pub model_path: &'a Path,
    pub output: &'a Path,
    pub session_path: &'a Path,
    pub process: EventId,
    pub order: Option<Vec<String>>,
}

fn open_session(m: &CausalModel, opts: &Options) -> Result<std::result::Result<ElicitationSession, ElicitationError>> {
    if opts.session_path.exists() {
        let text = fs::read_to_string(opts.session_path)
            .with_context(|| format!("cannot read {}", opts.session_path.display()))?;
        let s = ElicitationSession::from_json(&text)?;
        if s.process() != &opts.process {
            bail!(
                "{} belongs to process `{}`, not `{}`",
                opts.session_path.display(),
                s.process(),
                opts.process
            );
        }
        if !s.is_completed() {
            return Ok(Ok(s));
        }
    }
    let Some(p) = m.index_of(&opts.process).filter(|&p| m.kind(p) == NodeKind::Process) else {
        bail!("`{}` is not a process of {}", opts.process, opts.model_path.display());
    };
    let effects: Vec<EventId> = m.effects_of(p).iter().map(|&e| m.id(e).clone()).collect();
    Ok(match &opts.order {
        None => ElicitationSession::standard(opts.process.clone(), &effects),
        Some(order) => {
            let refs: Vec<&str> = order.iter().map(String::as_str).collect();
            MarginalSequence::parse(effects.clone(), &refs)
                .and_then(|seq| ElicitationSession::start(opts.process.clone(), &effects, seq))
        }
    })
}

fn save(s: &ElicitationSession, path: &Path) -> Result<()> {
    fs::write(path, s.to_json()).with_context(|| format!("cannot write {}", path.display()))
}

/// Prompts for each subset in turn. Answers are a value, `default`,
/// `head|given value`, or `quit`; end of input counts as `quit`.
pub fn run(m: &CausalModel, opts: &Options, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<ExitCode> {
    let mut s = match open_session(m, opts)? {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let mut line = String::new();
    while !s.is_finished() {
        let range = s.next_range()?;
        let label = s.sequence().label(s.position());
        write!(out, "pr({label}) in [{:.6}, {:.6}]> ", range.lo, range.hi)?;
        out.flush()?;
        line.clear();
        let answer = if input.read_line(&mut line)? == 0 { "quit" } else { line.trim() };
        if answer.is_empty() {
            continue;
        }
        if answer == "quit" {
            save(&s, opts.session_path)?;
            writeln!(out, "\nsession saved to {}", opts.session_path.display())?;
            return Ok(ExitCode::SUCCESS);
        }
        match s.apply_text(answer) {
            Ok(()) => save(&s, opts.session_path)?,
            Err(ElicitationError::OutOfRange { value, range }) => {
                writeln!(out, "{value} is out of range; legal range [{:.6}, {:.6}]", range.lo, range.hi)?;
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    let rows = match s.complete() {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let updated = m.with_causal_table(&opts.process, rows.clone())?;
    fs::write(opts.output, updated.to_json()).with_context(|| format!("cannot write {}", opts.output.display()))?;
    save(&s, opts.session_path)?;
    writeln!(out, "causal table for {}:", opts.process)?;
    for r in rows {
        writeln!(out, "{}\t{}", causalkit::event::format_subset(&r.subset), r.p)?;
    }
    writeln!(out, "model written to {}", opts.output.display())?;
    Ok(ExitCode::SUCCESS)
}
