//! Command-line front end. [`run`] returns the exit code and the report so
//! it can be tested without a process.
//!
//! Exit codes: 0 proved / countermodel found / conditions hold / corpus
//! green, 1 the opposite definite answer, 2 resource limit (or, for
//! `countermodel`, an open branch whose model could not be certified),
//! 3 usage or input error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::corpus;
use crate::engine::{self, Limits, OpenBranch, Verdict};
use crate::formula::Formula;
use crate::rulesets::{CutPolicy, Logic, LogicPreset};
use crate::semantics::{Condition, PriestModel};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "condtab", version, about = "Prefixed tableaux for conditional logics (Ck, CK, Vc, VC, VCS)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a closed tableau for PREMISES |- GOAL.
    Prove(QueryArgs),
    /// Like prove, but report the countermodel of an open branch.
    Countermodel(QueryArgs),
    /// Check a model file against frame conditions.
    CheckModel(CheckArgs),
    /// Replay the built-in tableaux and prove their sequents.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[arg(long, default_value_t = Limits::default().max_nodes)]
    max_nodes: usize,
    #[arg(long, default_value_t = Limits::default().max_indices)]
    max_indices: u32,
    #[arg(long, default_value_t = Limits::default().max_depth)]
    max_depth: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits { max_nodes: self.max_nodes, max_indices: self.max_indices, max_depth: self.max_depth }
    }
}

#[derive(Args, Debug)]
struct QueryArgs {
    /// ck, ck+cut, CK, vc, VC or VCS (case matters: ck is not CK).
    #[arg(long, default_value = "ck", value_parser = parse_logic)]
    logic: Logic,
    #[arg(long = "premise", value_parser = parse_formula)]
    premises: Vec<Formula>,
    #[arg(long, value_parser = parse_formula)]
    goal: Formula,
    #[command(flatten)]
    limits: LimitArgs,
    /// off, analytic, or hints=F1;F2
    #[arg(long, value_parser = parse_cut)]
    cut: Option<CutPolicy>,
    /// Use eaPrime in place of box and ea.
    #[arg(long)]
    ea_prime: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Model file, text or JSON.
    #[arg(long)]
    model: PathBuf,
    /// Formulas the conditions quantify over, separated by `;`.
    /// Defaults to the model's accessibility keys and true.
    #[arg(long)]
    vocab: Option<String>,
    /// Check this logic's conditions instead of (1)-(6).
    #[arg(long, value_parser = parse_logic)]
    logic: Option<Logic>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long, default_value = "VCS", value_parser = parse_logic)]
    logic: Logic,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_logic(s: &str) -> Result<Logic, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_formula(s: &str) -> Result<Formula, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_cut(s: &str) -> Result<CutPolicy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_YES,
                _ => EXIT_USAGE,
            };
            return (code, e.to_string());
        }
    };
    match cli.command {
        Command::Prove(q) => prove(&q, false),
        Command::Countermodel(q) => prove(&q, true),
        Command::CheckModel(c) => check_model(&c),
        Command::Corpus(c) => run_corpus(&c),
    }
}

fn preset(q: &QueryArgs) -> LogicPreset {
    let mut preset = LogicPreset::new(q.logic);
    if let Some(cut) = &q.cut {
        preset = preset.with_cut_policy(cut.clone());
    }
    if q.ea_prime {
        preset = preset.with_ea_prime();
    }
    preset
}

fn open_json(open: &OpenBranch) -> serde_json::Value {
    json!({
        "saturated": open.saturated,
        "certified": open.certified,
        "branch": open.branch.items(),
        "countermodel": open.countermodel.to_json(),
        "unsatisfied": open.unsatisfied,
        "conditions": open.conditions,
    })
}

fn open_text(open: &OpenBranch, out: &mut String) {
    let _ = writeln!(out, "open branch:");
    for item in open.branch.items() {
        let _ = writeln!(out, "  {item}");
    }
    let _ = writeln!(out, "countermodel (index i is world i):");
    for line in open.countermodel.to_string().lines() {
        let _ = writeln!(out, "  {line}");
    }
    if let Some(bad) = &open.unsatisfied {
        let _ = writeln!(out, "not certified: the model fails {bad}");
    }
    if let Some(c) = open.conditions.first_violation() {
        let _ = writeln!(out, "not certified: {c}");
    }
}

fn prove(q: &QueryArgs, countermodel_mode: bool) -> (i32, String) {
    let preset = preset(q);
    let verdict = engine::prove(&q.premises, &q.goal, &preset, q.limits.limits());
    let stats = *verdict.stats();
    let code = match (&verdict, countermodel_mode) {
        (Verdict::Closed { .. }, false) => EXIT_YES,
        (Verdict::Closed { .. }, true) => EXIT_NO,
        (Verdict::Open { .. }, false) => EXIT_NO,
        (Verdict::Open { open, .. }, true) => {
            if open.certified {
                EXIT_YES
            } else {
                EXIT_LIMIT
            }
        }
        (Verdict::ResourceOut { .. }, _) => EXIT_LIMIT,
    };
    let logic = preset.logic.name();
    let report = match q.format {
        Format::Json => {
            let value = match &verdict {
                Verdict::Closed { proof, .. } => {
                    json!({"verdict": "closed", "logic": logic, "stats": stats, "proof": proof.to_json()})
                }
                Verdict::Open { open, .. } => {
                    json!({"verdict": "open", "logic": logic, "stats": stats, "open": open_json(open)})
                }
                Verdict::ResourceOut { limit, .. } => {
                    json!({"verdict": "resource_out", "logic": logic, "stats": stats, "limit": limit})
                }
            };
            serde_json::to_string_pretty(&value).expect("json") + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            match &verdict {
                Verdict::Closed { proof, .. } => {
                    let _ =
                        writeln!(out, "closed ({logic}): {} nodes, {} leaves", proof.node_count(), proof.leaf_count());
                    if !countermodel_mode {
                        out.push_str(&proof.to_string());
                    }
                }
                Verdict::Open { open, .. } => {
                    let status = if open.certified { "certified" } else { "uncertified" };
                    let _ = writeln!(out, "open ({logic}): saturated branch, {status} countermodel");
                    open_text(open, &mut out);
                }
                Verdict::ResourceOut { limit, .. } => {
                    let _ = writeln!(
                        out,
                        "unknown ({logic}): {limit} reached after {} nodes, {} rule applications",
                        stats.nodes, stats.rule_applications
                    );
                }
            }
            out
        }
    };
    (code, report)
}

fn check_model(c: &CheckArgs) -> (i32, String) {
    let text = match std::fs::read_to_string(&c.model) {
        Ok(t) => t,
        Err(e) => return (EXIT_USAGE, format!("cannot read {}: {e}\n", c.model.display())),
    };
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text)
            .map_err(|e| e.to_string())
            .and_then(|v| PriestModel::from_json(&v).map_err(|e| e.to_string()))
    } else {
        text.parse::<PriestModel>().map_err(|e| e.to_string())
    };
    let model = match parsed {
        Ok(m) => m,
        Err(e) => return (EXIT_USAGE, format!("{}: {e}\n", c.model.display())),
    };
    let vocab = match &c.vocab {
        None => model.default_vocab(),
        Some(list) => {
            match list.split(';').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<Formula>, _>>()
            {
                Ok(v) => v,
                Err(e) => return (EXIT_USAGE, format!("bad --vocab: {e}\n")),
            }
        }
    };
    let conditions = c.logic.map_or(Condition::TABLE.to_vec(), |l| l.conditions());
    let report = model.check(&vocab, &conditions);
    let code = if report.all_hold() { EXIT_YES } else { EXIT_NO };
    let out = match c.format {
        Format::Json => {
            serde_json::to_string_pretty(&json!({"all_hold": report.all_hold(), "report": report})).expect("json")
                + "\n"
        }
        Format::Text => report.to_string(),
    };
    (code, out)
}

fn run_corpus(c: &CorpusArgs) -> (i32, String) {
    let preset = LogicPreset::new(c.logic);
    let mut green = true;
    let mut rows = Vec::new();
    let mut out = String::new();
    for e in corpus::entries() {
        if !e.logic.is_included_in(c.logic) {
            let _ = writeln!(out, "{:<4} skipped (needs {})", e.name, e.logic);
            rows.push(json!({"name": e.name, "skipped": true}));
            continue;
        }
        let hand = e
            .proof()
            .map_err(|err| err.to_string())
            .and_then(|p| engine::replay(&p, &preset).map(|_| p.node_count()).map_err(|err| err.to_string()));
        let verdict = engine::prove(&e.premises, &e.goal, &preset, c.limits.limits());
        let machine = match &verdict {
            Verdict::Closed { proof, .. } => {
                engine::replay(proof, &preset).map(|_| proof.node_count()).map_err(|err| err.to_string())
            }
            Verdict::Open { .. } => Err("open".to_string()),
            Verdict::ResourceOut { limit, .. } => Err(format!("{limit} reached")),
        };
        let ok = hand.is_ok() && machine.is_ok();
        green &= ok;
        let show = |r: &Result<usize, String>| match r {
            Ok(n) => format!("ok ({n} nodes)"),
            Err(e) => format!("FAILED: {e}"),
        };
        let _ = writeln!(
            out,
            "{:<4} {:<28} hand tableau {:<16} prover {}",
            e.name,
            e.sequent(),
            show(&hand),
            show(&machine)
        );
        rows.push(json!({
            "name": e.name,
            "sequent": e.sequent(),
            "hand": hand.as_ref().map_err(|e| e.clone()).err(),
            "prover": machine.as_ref().map_err(|e| e.clone()).err(),
            "ok": ok,
        }));
    }
    let code = if green { EXIT_YES } else { EXIT_NO };
    match c.format {
        Format::Json => (
            code,
            serde_json::to_string_pretty(&json!({"logic": c.logic.name(), "green": green, "entries": rows}))
                .expect("json")
                + "\n",
        ),
        Format::Text => (code, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String) {
        run(std::iter::once("condtab").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_three() {
        assert_eq!(call(&["prove"]).0, EXIT_USAGE);
        assert_eq!(call(&["prove", "--goal", "p &"]).0, EXIT_USAGE);
        assert_eq!(call(&["prove", "--goal", "p", "--logic", "S5"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    }

    #[test]
    fn prove_exit_codes() {
        assert_eq!(call(&["prove", "--logic", "vc", "--goal", "[p]p"]).0, EXIT_YES);
        assert_eq!(call(&["prove", "--logic", "ck", "--goal", "[p]p"]).0, EXIT_NO);
        assert_eq!(call(&["prove", "--goal", "(p -> q) -> (q -> r) -> p -> r", "--max-nodes", "3"]).0, EXIT_LIMIT);
    }

    #[test]
    fn countermodel_exit_codes() {
        assert_eq!(call(&["countermodel", "--logic", "ck", "--goal", "[p]p"]).0, EXIT_YES);
        assert_eq!(call(&["countermodel", "--logic", "vc", "--goal", "[p]p"]).0, EXIT_NO);
    }
}
