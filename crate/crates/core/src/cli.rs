//! The `padel` command line.
//!
//! Exit codes: 0 success or valid, 1 semantic failure (invalid state, false
//! verdict, counterexample, failing schema), 2 usage or syntax error, 3 budget
//! exceeded.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::axioms::{verify, SchemaId, SchemaReport, SuiteConfig};
use crate::checker::{CheckError, Checker, Truth};
use crate::dot::write_dot;
use crate::histories::{HistoryId, Universe, UniverseConfig, UniverseError, DEFAULT_BUDGET};
use crate::parser::{parse_action, parse_formula, parse_model, ModelFile, ParseError};
use crate::semantics::{Mutation, Semantics};
use crate::state::{forest_of, State};
use crate::syntax::{AgentId, Formula};

#[derive(Debug, Parser)]
#[command(name = "padel", version, about = "Model checker for mobile structured agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a model and print the agent forest of each initial state.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Apply one action at the last state of a history.
    Step {
        model: PathBuf,
        /// Action label, e.g. `(enter@A, accept@C, E)`.
        #[arg(long)]
        action: String,
        /// History path such as `s0/0/1`; defaults to the first initial state.
        #[arg(long)]
        history: Option<String>,
        #[command(flatten)]
        universe: UniverseArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Generate the bounded universe and optionally write DOT graphs.
    Explore {
        model: PathBuf,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Directory for `state_<id>.dot` and `transitions.dot`.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Evaluate a formula at a history, or check it at every history.
    Check {
        model: PathBuf,
        /// Formula text or the name of a formula declared in the model.
        /// Without it every declared formula is checked.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        history: Option<String>,
        /// Refuse to answer when a box would need histories past the depth.
        #[arg(long)]
        strict_depth: bool,
        #[command(flatten)]
        universe: UniverseArgs,
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Verify the axiom catalog on the model's universe.
    Axioms {
        model: PathBuf,
        /// Comma-separated schema names; defaults to the whole catalog.
        #[arg(long, value_delimiter = ',')]
        schemas: Vec<SchemaId>,
        #[command(flatten)]
        universe: UniverseArgs,
        #[arg(long)]
        timing: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct UniverseArgs {
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    /// Run under a deliberately broken rule (testing aid).
    #[arg(long)]
    pub mutation: Option<Mutation>,
}

impl UniverseArgs {
    fn semantics(&self) -> Semantics {
        self.mutation.map_or_else(Semantics::standard, Semantics::mutated)
    }

    fn config(&self, depth: usize) -> UniverseConfig {
        UniverseConfig::new(depth).budget(self.budget).semantics(self.semantics())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Semantic(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<UniverseError> for CliError {
    fn from(e: UniverseError) -> Self {
        match e {
            UniverseError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            UniverseError::Transition(_) => CliError::Semantic(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        CliError::Semantic(e.to_string())
    }
}

/// Runs the CLI on the process's streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the CLI with explicit output streams and returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<bool, CliError> {
    match command {
        Command::Validate { model, format } => validate(&model, format, out),
        Command::Step {
            model,
            action,
            history,
            universe,
            format,
        } => step(&model, &action, history.as_deref(), &universe, format, out),
        Command::Explore {
            model,
            universe,
            dot,
            format,
        } => explore(&model, &universe, dot.as_deref(), format, out),
        Command::Check {
            model,
            formula,
            history,
            strict_depth,
            universe,
            timing,
            format,
        } => {
            let opts = CheckOpts {
                history,
                strict: strict_depth,
                timing,
                format,
            };
            check(&model, formula.as_deref(), &opts, &universe, out)
        }
        Command::Axioms {
            model,
            schemas,
            universe,
            timing,
            format,
        } => axioms(&model, &schemas, &universe, timing, format, out),
    }
}

fn load(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| {
        let msg = format!("{}:{e}", path.display());
        match e {
            ParseError::StateInvalidity { .. } => CliError::Semantic(msg),
            _ => CliError::Usage(msg),
        }
    })
}

fn io(e: std::io::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    writeln!(out, "{text}").map_err(io)
}

/// Assignment in declared agent order.
fn state_text(agents: &[AgentId], s: &State) -> String {
    agents.iter().map(|a| format!("{a} = {};", s.get(a))).collect::<Vec<_>>().join(" ")
}

fn state_map(agents: &[AgentId], s: &State) -> BTreeMap<String, String> {
    agents.iter().map(|a| (a.to_string(), s.get(a).to_string())).collect()
}

fn validate(path: &Path, format: Format, out: &mut dyn Write) -> Result<bool, CliError> {
    let model = load(path)?;
    if format == Format::Json {
        let states: Vec<_> = model
            .initial_states
            .iter()
            .map(|(name, s)| {
                let forest = forest_of(s);
                json!({
                    "name": name,
                    "assignment": state_map(&model.agents, s),
                    "roots": forest.roots.iter().map(AgentId::to_string).collect::<Vec<_>>(),
                    "parent": forest.parent.iter().map(|(c, p)| (c.to_string(), p.to_string())).collect::<BTreeMap<_, _>>(),
                })
            })
            .collect();
        let formulas: Vec<_> = model.formulas.iter().map(|(n, f)| json!({"name": n, "formula": f.to_string()})).collect();
        emit_json(out, &json!({"valid": true, "initial_states": states, "formulas": formulas}))?;
    } else {
        for (name, s) in &model.initial_states {
            writeln!(out, "{name}:").map_err(io)?;
            for line in forest_of(s).render(s).lines() {
                writeln!(out, "  {line}").map_err(io)?;
            }
        }
        writeln!(out, "valid: {} agents, {} initial states", model.agents.len(), model.initial_states.len()).map_err(io)?;
    }
    Ok(true)
}

fn path_depth(path: &str) -> usize {
    path.split('/').count().saturating_sub(1)
}

fn resolve(u: &Universe, path: &str) -> Result<HistoryId, CliError> {
    u.resolve(path).map_err(|e| CliError::Usage(e.to_string()))
}

fn step(
    path: &Path,
    action: &str,
    history: Option<&str>,
    args: &UniverseArgs,
    format: Format,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let model = load(path)?;
    let alpha = parse_action(action, &model.agent_set()).map_err(|e| CliError::Usage(format!("--action: {e}")))?;
    let first = model.initial_states.first().map(|(n, _)| n.clone()).unwrap_or_default();
    let hpath = history.map_or(first, str::to_string);
    let u = Universe::generate(&model, args.config(path_depth(&hpath)))?;
    let h = resolve(&u, &hpath)?;
    let s = u.last(h);
    let result = u.semantics().step(s, &alpha);
    let ok = result.is_ok();
    if format == Format::Json {
        let value = match &result {
            Ok(st) => json!({
                "history": hpath,
                "action": alpha.to_string(),
                "executable": true,
                "state": state_map(&model.agents, &st.state),
                "ambiguous": st.ambiguity.as_ref().map(|a| {
                    a.post_states.iter().map(|t| state_map(&model.agents, t)).collect::<Vec<_>>()
                }),
            }),
            Err(e) => json!({
                "history": hpath,
                "action": alpha.to_string(),
                "executable": false,
                "error": e.to_string(),
            }),
        };
        emit_json(out, &value)?;
    } else {
        writeln!(out, "history: {hpath}").map_err(io)?;
        writeln!(out, "action: {alpha}").map_err(io)?;
        match &result {
            Ok(st) => {
                writeln!(out, "state: {}", state_text(&model.agents, &st.state)).map_err(io)?;
                for line in forest_of(&st.state).render(&st.state).lines() {
                    writeln!(out, "  {line}").map_err(io)?;
                }
                if let Some(a) = &st.ambiguity {
                    writeln!(out, "warning: {} distinct post-states; applied the first", a.post_states.len())
                        .map_err(io)?;
                    for t in &a.post_states[1..] {
                        writeln!(out, "  also: {}", state_text(&model.agents, t)).map_err(io)?;
                    }
                }
            }
            Err(e) => {
                writeln!(out, "{e}").map_err(io)?;
                let enabled: Vec<_> = u.children(h).iter().filter_map(|&g| u.last_action(g)).collect();
                if enabled.is_empty() {
                    writeln!(out, "no action is enabled").map_err(io)?;
                }
                for (i, b) in enabled.iter().enumerate() {
                    writeln!(out, "  enabled #{i}: {b}").map_err(io)?;
                }
            }
        }
    }
    Ok(ok)
}

fn explore(
    path: &Path,
    args: &UniverseArgs,
    dot: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let model = load(path)?;
    let u = Universe::generate(&model, args.config(args.depth))?;
    if let Some(dir) = dot {
        write_dot(&u, dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    }
    let action = |h| u.last_action(h).map(ToString::to_string);
    if format == Format::Json {
        let states: Vec<_> = u
            .states()
            .iter()
            .enumerate()
            .map(|(id, s)| json!({"id": id, "assignment": state_map(&model.agents, s)}))
            .collect();
        let histories: Vec<_> = u
            .ids()
            .map(|h| json!({"path": u.path(h), "length": u.size(h), "action": action(h), "state": u.state_id(h)}))
            .collect();
        let ambiguities: Vec<_> = u
            .ambiguities()
            .iter()
            .map(|(h, a)| json!({"history": u.path(*h), "action": a.action.to_string(), "post_states": a.post_states.len()}))
            .collect();
        emit_json(
            out,
            &json!({
                "depth": u.depth(),
                "counts_per_length": u.counts_per_length(),
                "states": states,
                "histories": histories,
                "ambiguities": ambiguities,
            }),
        )?;
    } else {
        writeln!(out, "depth {}: {} histories, per length {:?}", u.depth(), u.len(), u.counts_per_length()).map_err(io)?;
        writeln!(out, "{} distinct states", u.states().len()).map_err(io)?;
        for (id, s) in u.states().iter().enumerate() {
            writeln!(out, "  s{id}: {}", state_text(&model.agents, s)).map_err(io)?;
        }
        writeln!(out, "histories:").map_err(io)?;
        for h in u.ids() {
            match action(h) {
                Some(a) => writeln!(out, "  {} {a} -> s{}", u.path(h), u.state_id(h)),
                None => writeln!(out, "  {} s{}", u.path(h), u.state_id(h)),
            }
            .map_err(io)?;
        }
        for (h, a) in u.ambiguities() {
            writeln!(out, "warning: {} at {} has {} distinct post-states", a.action, u.path(*h), a.post_states.len())
                .map_err(io)?;
        }
    }
    Ok(true)
}

struct CheckOpts {
    history: Option<String>,
    strict: bool,
    timing: bool,
    format: Format,
}

fn check(
    path: &Path,
    formula: Option<&str>,
    opts: &CheckOpts,
    args: &UniverseArgs,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let model = load(path)?;
    let targets: Vec<(String, Formula)> = match formula {
        Some(text) => match model.formula(text) {
            Some(f) => vec![(text.to_string(), f.clone())],
            None => {
                let f = parse_formula(text, &model.agent_set()).map_err(|e| CliError::Usage(format!("--formula: {e}")))?;
                vec![(f.to_string(), f)]
            }
        },
        None if model.formulas.is_empty() => {
            return Err(CliError::Usage("no --formula given and the model declares none".into()))
        }
        None => model.formulas.clone(),
    };
    let u = Universe::generate(&model, args.config(args.depth))?;
    let checker = if opts.strict {
        Checker::strict(&u)
    } else {
        Checker::new(&u)
    };
    let history = opts.history.as_deref().map(|p| resolve(&u, p)).transpose()?;
    let mut all_ok = true;
    let mut records = vec![];
    for (name, phi) in &targets {
        let start = Instant::now();
        let mut record = json!({"name": name, "formula": phi.to_string()});
        let ok = match history {
            Some(h) => {
                let truth = checker.truth(h, phi)?;
                if truth == Truth::Unknown {
                    return Err(CheckError::DepthInsufficient {
                        formula: phi.to_string(),
                        history: u.path(h),
                    }
                    .into());
                }
                record["history"] = json!(u.path(h));
                record["verdict"] = json!(truth == Truth::True);
                truth == Truth::True
            }
            None => {
                let v = checker.valid_in_universe(phi)?;
                record["valid"] = json!(v.valid);
                record["checked"] = json!(v.checked);
                record["counterexample"] = json!(v.counterexample.map(|h| u.path(h)));
                v.valid
            }
        };
        if opts.timing {
            record["elapsed_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
        }
        all_ok &= ok;
        records.push(record);
    }
    if opts.format == Format::Json {
        emit_json(out, &json!({"depth": u.depth(), "results": records}))?;
        return Ok(all_ok);
    }
    for r in &records {
        let head = if r["name"] == r["formula"] {
            r["formula"].as_str().unwrap_or_default().to_string()
        } else {
            format!("{}: {}", r["name"].as_str().unwrap_or_default(), r["formula"].as_str().unwrap_or_default())
        };
        writeln!(out, "{head}").map_err(io)?;
        let verdict = if let Some(h) = r.get("history") {
            format!("  at {}: {}", h.as_str().unwrap_or_default(), r["verdict"])
        } else if r["valid"] == json!(true) {
            format!("  valid ({} histories)", r["checked"])
        } else {
            format!("  invalid: counterexample {}", r["counterexample"].as_str().unwrap_or_default())
        };
        write!(out, "{verdict}").map_err(io)?;
        if let Some(ms) = r.get("elapsed_ms").and_then(|v| v.as_f64()) {
            write!(out, " [{ms:.1} ms]").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    Ok(all_ok)
}

fn axioms(
    path: &Path,
    schemas: &[SchemaId],
    args: &UniverseArgs,
    timing: bool,
    format: Format,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let model = load(path)?;
    let u = Universe::generate(&model, args.config(args.depth))?;
    let selected = if schemas.is_empty() { SchemaId::ALL } else { schemas };
    let reports = verify(&u, selected, &SuiteConfig::default())?;
    let passed = reports.iter().filter(|r| r.passed()).count();
    if format == Format::Json {
        let rows: Vec<_> = reports
            .iter()
            .map(|r| {
                let mut v = serde_json::to_value(r).unwrap_or_default();
                v["passed"] = json!(r.passed());
                if timing {
                    v["elapsed_ms"] = json!(r.elapsed.as_secs_f64() * 1e3);
                }
                v
            })
            .collect();
        emit_json(
            out,
            &json!({"depth": u.depth(), "histories": u.len(), "passed": passed, "total": reports.len(), "schemas": rows}),
        )?;
    } else {
        writeln!(out, "depth {}, {} histories", u.depth(), u.len()).map_err(io)?;
        writeln!(out, "{:<16} {:<6} {:>9} {:>10} {:>8}", "schema", "result", "instances", "checks", "failures")
            .map_err(io)?;
        for r in &reports {
            write_row(out, r, timing)?;
        }
        writeln!(out, "{passed}/{} schemas pass", reports.len()).map_err(io)?;
    }
    Ok(passed == reports.len())
}

fn write_row(out: &mut dyn Write, r: &SchemaReport, timing: bool) -> Result<(), CliError> {
    let status = if r.passed() { "PASS" } else { "FAIL" };
    write!(out, "{:<16} {status:<6} {:>9} {:>10} {:>8}", r.schema.name(), r.instances, r.checks, r.failure_count)
        .map_err(io)?;
    if timing {
        write!(out, " {:>9.1} ms", r.elapsed.as_secs_f64() * 1e3).map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for f in &r.failures {
        let binds: Vec<_> = f.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "    at {} [{}]: {}", f.path, binds.join(", "), f.formula).map_err(io)?;
    }
    Ok(())
}
