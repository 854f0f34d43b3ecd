//! The `ctxlab` command line.
//!
//! Exit codes: 0 success or true, 1 a negative answer (contextual, not
//! isomorphic, not found, a failing suite), 2 usage, input or typing errors,
//! 3 an enumeration guard was exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fraction::ncf;
use crate::gen;
use crate::json::{
    lp_to_json, model_to_json, read_json, read_model, scenario_from_json, scenario_to_json, simulation_from_json,
    simulation_to_json, to_canonical_string,
};
use crate::model::ops::{choice, mix, tensor};
use crate::model::{is_isomorphic, EmpiricalModel};
use crate::protocols::mp_model;
use crate::props::{run_suite, SUITES};
use crate::rational::{format as format_prob, parse as parse_prob};
use crate::scenario::names::{assignment_to_string, parse_assignment};
use crate::scenario::Scenario;
use crate::simulate::{
    check_simulation, extract_term, find_simulation, refute_by_fraction, term_to_simulation, SearchOutcome,
};
use crate::terms::{eval, normalize, parse, typecheck, Env, TypingContext};

#[derive(Parser, Debug)]
#[command(name = "ctxlab", version, about = "Exact workbench for empirical models, contextual fractions and simulations")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a scenario or model file.
    Validate { file: PathBuf },
    /// Contextual fraction of a model.
    Cf {
        model: PathBuf,
        /// Also emit the noncontextual and contextual parts.
        #[arg(long)]
        decompose: bool,
        /// Also emit the dual functional.
        #[arg(long)]
        certificate: bool,
    },
    /// Apply a free operation.
    #[command(subcommand)]
    Op(Op),
    /// Type, evaluate or normalize a term.
    #[command(subcommand)]
    Term(TermCommand),
    /// Measurement protocols.
    #[command(subcommand)]
    Mp(Mp),
    /// Simulations between models.
    #[command(subcommand)]
    Sim(Sim),
    /// Emit a library model.
    Gen {
        /// pr, correlated, mix-demo, deterministic, or coin(k).
        name: String,
        /// For `deterministic`: `x1=0,x2=1,…`.
        #[arg(long)]
        assign: Option<String>,
        /// For `deterministic`: scenario file (PR's scenario by default).
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Run a randomized property suite.
    Props {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: u64,
        /// Replay a single case.
        #[arg(long)]
        case: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum Op {
    Tensor { a: PathBuf, b: PathBuf },
    Choice { a: PathBuf, b: PathBuf },
    Mix {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        lambda: String,
    },
    /// `f*e`, with `--map "p:x1,q:y1"` and optional `--facets "{p,q},{q}"`.
    Pullback {
        model: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long)]
        facets: Option<String>,
    },
    /// `e/h`, with `--family "x1:{0>1,1>0}"`.
    Coarse {
        model: PathBuf,
        #[arg(long)]
        family: String,
    },
    /// `e[x?y]`, with `--x x1 --branches "0:y1,1:y2"`.
    Cond {
        model: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        branches: String,
    },
    /// Decide isomorphism.
    Iso { a: PathBuf, b: PathBuf },
}

#[derive(Clone, Copy)]
enum TermAction {
    Check,
    Eval,
    Normalize,
}

#[derive(Subcommand, Debug)]
enum TermCommand {
    /// Type a term.
    Check(TermInput),
    /// Evaluate a term.
    Eval(TermInput),
    /// Normalize a term.
    Normalize(TermInput),
}

#[derive(Args, Debug)]
struct TermInput {
    /// Term text, or `@path` to read it from a file.
    term: String,
    /// `v=path.json`, repeatable.
    #[arg(long = "bind")]
    binds: Vec<String>,
    /// JSON object mapping variables to model paths.
    #[arg(long)]
    bindings: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Mp {
    /// The depth-bounded protocol model `MP(e)`.
    Expand {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Sim {
    /// Verify a simulation file.
    Check { sim: PathBuf },
    /// Search for a simulation `d ⇝ e`.
    Find {
        d: PathBuf,
        e: PathBuf,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        ancilla_budget: usize,
    },
    /// Refute `d ⇝ e` by comparing noncontextual fractions.
    Refute { d: PathBuf, e: PathBuf },
    /// The term witnessed by a simulation file.
    ExtractTerm { sim: PathBuf },
    /// Compile a term in one variable into a simulation from a model.
    Compile {
        term: String,
        model: PathBuf,
        #[arg(long, default_value = "v")]
        var: String,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::GuardExceeded { .. } => 3,
        _ => 2,
    }
}

struct Output<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

impl Output<'_> {
    fn value(&mut self, v: &Value) -> Result<()> {
        self.out.write_all(to_canonical_string(v).as_bytes())?;
        Ok(())
    }

    /// Text on a line, or `v` under `--json`.
    fn either(&mut self, text: &str, v: Value) -> Result<()> {
        if self.json {
            self.value(&v)
        } else {
            writeln!(self.out, "{text}")?;
            Ok(())
        }
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let mut o = Output { out, json: cli.json };
    match &cli.command {
        Command::Validate { file } => validate(&mut o, file),
        Command::Cf { model, decompose, certificate } => {
            let e = read_model(model)?;
            let lp = ncf(&e)?;
            let text = format!(
                "NCF = {}\nCF = {}",
                format_prob(&lp.optimum),
                format_prob(&(crate::rational::one() - &lp.optimum))
            );
            if cli.json || *decompose || *certificate {
                o.value(&lp_to_json(&lp, *decompose, *certificate))?;
            } else {
                o.either(&text, Value::Null)?;
            }
            Ok(0)
        }
        Command::Op(op) => run_op(&mut o, op),
        Command::Term(t) => run_term(&mut o, t),
        Command::Mp(Mp::Expand { model, depth }) => {
            let e = read_model(model)?;
            o.value(&model_to_json(&mp_model(&e, *depth)?))?;
            Ok(0)
        }
        Command::Sim(s) => run_sim(&mut o, s),
        Command::Gen { name, assign, scenario } => {
            let model = gen_model(name, assign.as_deref(), scenario.as_deref())?;
            o.value(&model_to_json(&model))?;
            Ok(0)
        }
        Command::Props { suite, seed, cases, case } => {
            let report = run_suite(suite, *seed, *cases, *case)?;
            let v = report.to_json();
            if cli.json || !report.passed() {
                o.value(&v)?;
            } else {
                writeln!(o.out, "{suite}: {} checks over {} cases passed (seed {seed})", report.checks, report.cases)?;
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}

fn validate(o: &mut Output<'_>, file: &Path) -> Result<i32> {
    let v = read_json(file)?;
    let problems: Vec<String> = if v.get("distributions").is_some() {
        match crate::json::model_from_json(&v, file.parent()) {
            Ok(_) => Vec::new(),
            Err(e) => vec![e.to_string()],
        }
    } else {
        match scenario_from_json(&v) {
            Ok(_) => Vec::new(),
            Err(e) => vec![e.to_string()],
        }
    };
    let valid = problems.is_empty();
    let text = if valid { "valid".to_string() } else { format!("invalid: {}", problems.join("; ")) };
    o.either(&text, json!({ "valid": valid, "problems": problems }))?;
    Ok(if valid { 0 } else { 1 })
}

fn eval_on(model: &Path, body: &str) -> Result<EmpiricalModel> {
    let e = read_model(model)?;
    let t = parse(body)?;
    let env: Env = [("v".to_string(), e)].into_iter().collect();
    eval(&t, &env)
}

fn run_op(o: &mut Output<'_>, op: &Op) -> Result<i32> {
    let model = match op {
        Op::Tensor { a, b } => tensor(&read_model(a)?, &read_model(b)?)?,
        Op::Choice { a, b } => choice(&read_model(a)?, &read_model(b)?)?,
        Op::Mix { a, b, lambda } => mix(&read_model(a)?, &parse_prob(lambda)?, &read_model(b)?)?,
        Op::Pullback { model, map, facets } => {
            let facets = facets.as_ref().map_or(String::new(), |f| format!(";{f}"));
            eval_on(model, &format!("pull[{map}{facets}] v"))?
        }
        Op::Coarse { model, family } => eval_on(model, &format!("v/[{family}]"))?,
        Op::Cond { model, x, branches } => eval_on(model, &format!("v[{x}?({branches})]"))?,
        Op::Iso { a, b } => {
            let (a, b) = (read_model(a)?, read_model(b)?);
            return Ok(match is_isomorphic(&a, &b) {
                Some(w) => {
                    let f: serde_json::Map<String, Value> =
                        w.f.iter().map(|(x, y)| (x.to_string(), Value::String(y.to_string()))).collect();
                    let h: serde_json::Map<String, Value> = w
                        .h
                        .iter()
                        .map(|(x, m)| {
                            let t: serde_json::Map<String, Value> =
                                m.entries().iter().map(|(p, q)| (p.to_string(), Value::String(q.to_string()))).collect();
                            (x.to_string(), Value::Object(t))
                        })
                        .collect();
                    o.either("isomorphic", json!({ "isomorphic": true, "f": f, "h": h }))?;
                    0
                }
                None => {
                    o.either("not isomorphic", json!({ "isomorphic": false }))?;
                    1
                }
            });
        }
    };
    o.value(&model_to_json(&model))?;
    Ok(0)
}

fn load_env(input: &TermInput) -> Result<Env> {
    let mut env = Env::new();
    if let Some(path) = &input.bindings {
        let v = read_json(path)?;
        let map = v
            .as_object()
            .ok_or_else(|| Error::invalid("bindings file must map variables to model paths"))?;
        for (var, p) in map {
            let p = p.as_str().ok_or_else(|| Error::invalid(format!("binding for `{var}` must be a path")))?;
            let full = path.parent().map_or_else(|| PathBuf::from(p), |d| d.join(p));
            env.insert(var.clone(), read_model(&full)?);
        }
    }
    for b in &input.binds {
        let (var, p) = b
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("binding `{b}` is not `var=path`")))?;
        env.insert(var.to_string(), read_model(Path::new(p))?);
    }
    Ok(env)
}

fn term_text(src: &str) -> Result<String> {
    match src.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)?),
        None => Ok(src.to_string()),
    }
}

fn run_term(o: &mut Output<'_>, action: &TermCommand) -> Result<i32> {
    let (kind, input) = match action {
        TermCommand::Check(i) => (TermAction::Check, i),
        TermCommand::Eval(i) => (TermAction::Eval, i),
        TermCommand::Normalize(i) => (TermAction::Normalize, i),
    };
    let t = parse(&term_text(&input.term)?)?;
    let env = load_env(input)?;
    let ctx = TypingContext::from_env(&env);
    match kind {
        TermAction::Check => {
            let s = typecheck(&ctx, &t)?;
            let text = format!("well-typed: {} measurements, {} facets", s.measurements().len(), s.facets().len());
            o.either(&text, json!({ "well_typed": true, "scenario": scenario_to_json(&s) }))?;
        }
        TermAction::Eval => o.value(&model_to_json(&eval(&t, &env)?))?,
        TermAction::Normalize => {
            let n = normalize(&ctx, &t)?;
            o.either(&n.to_string(), json!({ "normal_form": n.to_string() }))?;
        }
    }
    Ok(0)
}

fn run_sim(o: &mut Output<'_>, s: &Sim) -> Result<i32> {
    match s {
        Sim::Check { sim } => {
            let sim = simulation_from_json(&read_json(sim)?, sim.parent())?;
            let report = check_simulation(&sim)?;
            o.either(&report.to_string(), json!({ "verified": report.is_verified(), "report": report.to_string() }))?;
            Ok(if report.is_verified() { 0 } else { 1 })
        }
        Sim::Find { d, e, depth, ancilla_budget } => {
            let (d, e) = (read_model(d)?, read_model(e)?);
            match find_simulation(&d, &e, *depth, *ancilla_budget)? {
                SearchOutcome::Found(sim) => {
                    o.value(&simulation_to_json(&sim))?;
                    Ok(0)
                }
                SearchOutcome::NotFound { depth, budget } => {
                    let text = format!("not found within depth {depth} and ancilla budget {budget} (larger bounds may still succeed)");
                    o.either(&text, json!({ "found": false, "depth": depth, "ancilla_budget": budget }))?;
                    Ok(1)
                }
            }
        }
        Sim::Refute { d, e } => {
            let (d, e) = (read_model(d)?, read_model(e)?);
            let refuted = refute_by_fraction(&d, &e)?;
            let (nd, ne) = (ncf(&d)?.optimum, ncf(&e)?.optimum);
            let text = if refuted {
                format!("refuted: NCF(d) = {} > NCF(e) = {}", format_prob(&nd), format_prob(&ne))
            } else {
                format!("not refuted: NCF(d) = {} <= NCF(e) = {}", format_prob(&nd), format_prob(&ne))
            };
            o.either(
                &text,
                json!({ "refuted": refuted, "ncf_source": format_prob(&nd), "ncf_target": format_prob(&ne) }),
            )?;
            Ok(if refuted { 0 } else { 1 })
        }
        Sim::ExtractTerm { sim } => {
            let sim = simulation_from_json(&read_json(sim)?, sim.parent())?;
            let t = extract_term(&sim)?;
            o.either(&t.to_string(), json!({ "term": t.to_string() }))?;
            Ok(0)
        }
        Sim::Compile { term, model, var } => {
            let t = parse(&term_text(term)?)?;
            let d = read_model(model)?;
            o.value(&simulation_to_json(&term_to_simulation(&t, var, &d)?))?;
            Ok(0)
        }
    }
}

fn gen_model(name: &str, assign: Option<&str>, scenario: Option<&Path>) -> Result<EmpiricalModel> {
    if let Some(k) = name.strip_prefix("coin(").and_then(|r| r.strip_suffix(')')) {
        let k: usize = k.trim().parse().map_err(|_| Error::invalid(format!("bad coin size in `{name}`")))?;
        return gen::uniform_coin(k);
    }
    match name {
        "pr" => Ok(gen::pr()),
        "correlated" => Ok(gen::correlated_box()),
        "mix-demo" => Ok(gen::mix_demo()),
        "deterministic" => {
            let s = match scenario {
                Some(p) => scenario_from_json(&read_json(p)?)?,
                None => Scenario::pr(),
            };
            let a = parse_assignment(assign.ok_or_else(|| Error::invalid("`deterministic` needs --assign"))?)?;
            EmpiricalModel::deterministic(s, &a)
                .map_err(|e| Error::invalid(format!("assignment {}: {e}", assignment_to_string(&a))))
        }
        _ => Err(Error::invalid(format!(
            "unknown model `{name}`; known: pr, correlated, mix-demo, deterministic, coin(k); suites for props: {}",
            SUITES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = match Cli::try_parse_from(std::iter::once("ctxlab").chain(args.iter().copied())) {
            Ok(c) => c,
            Err(_) => return (2, String::new()),
        };
        let mut buf = Vec::new();
        let code = match run(&cli, &mut buf) {
            Ok(c) => c,
            Err(e) => exit_code(&e),
        };
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn gen_and_cf() {
        let dir = tempfile::tempdir().unwrap();
        let (code, text) = run_args(&["gen", "pr"]);
        assert_eq!(code, 0);
        let path = dir.path().join("pr.json");
        fs::write(&path, &text).unwrap();
        let (code, text) = run_args(&["cf", path.to_str().unwrap()]);
        assert_eq!((code, text.as_str()), (0, "NCF = 0\nCF = 1\n"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["gen", "nope"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["props", "nope"]).0, 2);
    }

    #[test]
    fn coin_sizes() {
        assert_eq!(gen_model("coin(3)", None, None).unwrap(), gen::uniform_coin(3).unwrap());
        assert!(gen_model("coin(x)", None, None).is_err());
    }
}
