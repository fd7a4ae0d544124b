//! Command-line front end. Exit codes: 0 plan found or valid, 1 no plan
//! or invalid, 2 usage or input error.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::eval::Evaluator;
use crate::formula::{Term, Time};
use crate::model::{load, load_problem, ModelError, Problem, Value};
use crate::plan::{format_plan, format_time, parse_plan, PlanFormat};
use crate::search::{plan_with, Mode, Outcome, SearchConfig, SearchError};
use crate::timeline::{StateKind, Timeline};
use crate::trace::{write_record, NdjsonWriter, SearchHook, Silent, SteerCommand, Steer, TraceEvent};
use crate::validate::{validate, Verdict};
use crate::Decimal;

#[derive(Debug, Parser)]
#[command(name = "chronoplan", version, about = "Temporal planner guided by control rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a plan and print it.
    Plan(PlanArgs),
    /// Replay a plan and report the first violation.
    Validate(ValidateArgs),
    /// Run the search behind an NDJSON trace and steering socket.
    Serve(ServeArgs),
    /// Print shortest-path costs of a distance feature.
    Dist(DistArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Overrides the `mode` option of the domain and problem.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Maximum number of expansion attempts.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Maximum plan length.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_parser = ["sparse", "dense"])]
    pub state: Option<String>,
    /// Leave an operator out of the search; may be repeated.
    #[arg(long = "exclude", value_name = "OPERATOR")]
    pub exclude: Vec<String>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum, default_value_t = PlanFormat::Timed)]
    pub format: PlanFormat,
    /// Internal time units per printed unit; defaults to the domain's scale.
    #[arg(long)]
    pub scale: Option<i64>,
    /// Shift added per distinct start timepoint; defaults to the `epsilon` option or 0.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Write NDJSON trace events to a file, or `-` for standard output.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<String>,
    pub domain: PathBuf,
    pub problem: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = PlanFormat::Timed)]
    pub format: PlanFormat,
    #[arg(long)]
    pub scale: Option<i64>,
    #[arg(long)]
    pub epsilon: Option<String>,
    pub domain: PathBuf,
    pub problem: PathBuf,
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub search: SearchArgs,
    /// TCP port on 127.0.0.1; 0 picks a free one.
    #[arg(long, default_value_t = 0)]
    pub port: u16,
    /// Use standard input and output instead of a socket.
    #[arg(long)]
    pub stdio: bool,
    pub domain: PathBuf,
    pub problem: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    pub domain: PathBuf,
    pub problem: PathBuf,
    #[arg(long)]
    pub feature: String,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: Option<String>,
    /// Leading link arguments before origin and destination, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub args: Vec<String>,
    /// Timepoint of the initial state to read links from.
    #[arg(long, default_value_t = 0)]
    pub at: i64,
}

/// Input problems reported with exit code 2.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ModelError) -> Failure {
    let p = path.display();
    match &e {
        ModelError::At { .. } | ModelError::Parse(_) => {
            Failure(e.to_string().lines().map(|l| format!("{p}:{l}")).collect::<Vec<_>>().join("\n"))
        }
        _ => Failure(format!("{p}: {e}")),
    }
}

/// Load a domain and problem from files.
pub fn load_files(domain: &Path, problem: &Path) -> Result<Problem, String> {
    load_pair(domain, problem).map_err(|f| f.0)
}

fn load_pair(domain: &Path, problem: &Path) -> Result<Problem, Failure> {
    let d = load(&read(domain)?).map_err(|e| located(domain, e))?;
    load_problem(Arc::new(d), &read(problem)?).map_err(|e| located(problem, e))
}

fn config(problem: &Problem, a: &SearchArgs) -> Result<SearchConfig, Failure> {
    let mut c = SearchConfig::for_problem(problem)?;
    if let Some(m) = a.mode {
        c.mode = m;
    }
    if let Some(b) = a.budget {
        c.node_budget = b;
    }
    if a.depth.is_some() {
        c.depth_bound = a.depth;
    }
    match a.state.as_deref() {
        Some("dense") => c.state = StateKind::Dense,
        Some(_) => c.state = StateKind::Sparse,
        None => {}
    }
    c.exclude = a.exclude.clone();
    Ok(c)
}

fn epsilon(problem: &Problem, flag: &Option<String>) -> Result<Decimal, Failure> {
    let text = flag.as_deref().or(problem.option("epsilon")).unwrap_or("0");
    text.parse::<Decimal>()
        .map_err(|e| Failure(format!("epsilon: {e}")))
}

/// Run the command line and return the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let r = match cli.command {
        Command::Plan(a) => cmd_plan(&a, out, err),
        Command::Validate(a) => cmd_validate(&a, out),
        Command::Serve(a) => cmd_serve(&a, err),
        Command::Dist(a) => cmd_dist(&a, out),
    };
    match r {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "{msg}");
            2
        }
    }
}

fn finish(problem: &Problem, a: &PlanArgs, r: Result<Outcome, SearchError>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match r {
        Ok(Outcome::Found { plan, .. }) => {
            let scale = a.scale.unwrap_or(problem.scale());
            let text = format_plan(&plan, a.format, scale, epsilon(problem, &a.epsilon)?)?;
            write!(out, "{text}")?;
            Ok(0)
        }
        Ok(Outcome::NoPlan { explored }) => {
            writeln!(err, "no plan ({explored} expansions)")?;
            Ok(1)
        }
        Err(e @ (SearchError::BudgetExceeded { .. } | SearchError::Aborted { .. })) => {
            writeln!(err, "no plan: {e}")?;
            Ok(1)
        }
        Err(e) => Err(Failure(e.to_string())),
    }
}

fn cmd_plan(a: &PlanArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let problem = load_pair(&a.domain, &a.problem)?;
    let c = config(&problem, &a.search)?;
    if let Some(s) = a.scale {
        if s < 1 {
            return Err(Failure("scale must be at least 1".into()));
        }
    }
    epsilon(&problem, &a.epsilon)?;
    match a.trace.as_deref() {
        None => {
            let r = plan_with(&problem, c, Silent).map(|(o, _)| o);
            finish(&problem, a, r, out, err)
        }
        Some("-") => {
            let mut buf = vec![];
            let r = plan_with(&problem, c, NdjsonWriter::new(&mut buf)).map(|(o, _)| o);
            out.write_all(&buf)?;
            finish(&problem, a, r, out, err)
        }
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| Failure(format!("{path}: {e}")))?;
            let r = plan_with(&problem, c, NdjsonWriter::new(io::BufWriter::new(f)));
            let r = match r {
                Ok((o, w)) => {
                    if let Some(e) = w.error {
                        return Err(Failure(format!("{path}: {e}")));
                    }
                    w.into_inner().flush()?;
                    Ok(o)
                }
                Err(e) => Err(e),
            };
            finish(&problem, a, r, out, err)
        }
    }
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let problem = load_pair(&a.domain, &a.problem)?;
    let scale = a.scale.unwrap_or(problem.scale());
    let text = read(&a.plan)?;
    let plan = parse_plan(&text, a.format, scale, epsilon(&problem, &a.epsilon)?)
        .map_err(|e| Failure(format!("{}: {e}", a.plan.display())))?;
    match validate(&problem, &plan)? {
        Verdict::Valid { makespan } => {
            writeln!(out, "valid, makespan {}", format_time(makespan, scale))?;
            Ok(0)
        }
        Verdict::Invalid(v) => {
            writeln!(out, "invalid: {v}")?;
            Ok(1)
        }
    }
}

/// Steering state shared between the search and the command reader.
pub struct Steering<W: Write> {
    out: W,
    commands: mpsc::Receiver<SteerCommand>,
    paused: bool,
    /// Expansions allowed before pausing again.
    steps: u32,
    closed: bool,
}

impl<W: Write> Steering<W> {
    pub fn new(out: W, commands: mpsc::Receiver<SteerCommand>) -> Self {
        Steering {
            out,
            commands,
            paused: false,
            steps: 0,
            closed: false,
        }
    }

    fn apply(&mut self, c: SteerCommand) -> Option<Steer> {
        match c {
            SteerCommand::Pause => self.paused = true,
            SteerCommand::Resume => self.paused = false,
            SteerCommand::Step => self.steps += 1,
            SteerCommand::ForceBacktrack { target } => return Some(Steer::Backtrack(target)),
        }
        None
    }
}

impl<W: Write> SearchHook for Steering<W> {
    fn event(&mut self, e: &TraceEvent) {
        let _ = write_record(&mut self.out, e).and_then(|_| self.out.flush());
    }

    fn wants_delta(&self) -> bool {
        true
    }

    fn checkpoint(&mut self) -> Steer {
        while let Ok(c) = self.commands.try_recv() {
            if let Some(s) = self.apply(c) {
                return s;
            }
        }
        while self.paused && !self.closed {
            if self.steps > 0 {
                self.steps -= 1;
                return Steer::Continue;
            }
            match self.commands.recv() {
                Ok(c) => {
                    if let Some(s) = self.apply(c) {
                        return s;
                    }
                }
                Err(_) => self.closed = true,
            }
        }
        Steer::Continue
    }
}

/// Run a search that writes NDJSON events to `out` and takes steering
/// commands from `input`, one JSON object per line. Malformed commands are
/// ignored. Returns the outcome after writing a final `done` record.
pub fn serve_stream<R, W>(problem: &Problem, config: SearchConfig, input: R, out: W) -> Result<Outcome, SearchError>
where
    R: BufRead + Send + 'static,
    W: Write,
{
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in input.lines() {
            let Ok(line) = line else { break };
            if let Ok(c) = crate::trace::parse_command(&line) {
                if tx.send(c).is_err() {
                    break;
                }
            }
        }
    });
    let (o, mut hook) = plan_with(problem, config, Steering::new(out, rx))?;
    let done = match &o {
        Outcome::Found { plan, explored, .. } => serde_json::json!({
            "type": "done", "found": true, "explored": explored,
            "plan": plan.steps.iter().map(|s| format!("{}: {}", s.start, s.text())).collect::<Vec<_>>(),
        }),
        Outcome::NoPlan { explored } => serde_json::json!({"type": "done", "found": false, "explored": explored}),
    };
    let _ = write_record(&mut hook.out, &done).and_then(|_| hook.out.flush());
    Ok(o)
}

fn cmd_serve(a: &ServeArgs, err: &mut dyn Write) -> Result<i32, Failure> {
    let problem = load_pair(&a.domain, &a.problem)?;
    let c = config(&problem, &a.search)?;
    let outcome = if a.stdio {
        serve_stream(&problem, c, BufReader::new(io::stdin()), io::stdout().lock())
    } else {
        let listener = TcpListener::bind(("127.0.0.1", a.port))?;
        writeln!(err, "listening on {}", listener.local_addr()?)?;
        err.flush()?;
        let (stream, _) = listener.accept()?;
        let reader = BufReader::new(stream.try_clone()?);
        let closer = stream.try_clone()?;
        let r = serve_stream(&problem, c, reader, stream);
        // The command reader thread holds a clone; close so the client sees EOF.
        let _ = closer.shutdown(std::net::Shutdown::Both);
        r
    };
    match outcome {
        Ok(Outcome::Found { .. }) => Ok(0),
        Ok(Outcome::NoPlan { .. }) | Err(SearchError::BudgetExceeded { .. } | SearchError::Aborted { .. }) => Ok(1),
        Err(e) => Err(Failure(e.to_string())),
    }
}

fn cmd_dist(a: &DistArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let problem = load_pair(&a.domain, &a.problem)?;
    let d = &problem.domain;
    let feature = d
        .dist
        .iter()
        .position(|f| f.name == a.feature)
        .ok_or_else(|| Failure(format!("unknown distance feature `{}`", a.feature)))?;
    let f = &d.dist[feature];
    if a.args.len() != f.extra {
        return Err(Failure(format!("`{}` takes {} leading link arguments", f.name, f.extra)));
    }
    let obj = |name: &str| -> Result<Term, Failure> {
        problem
            .sorts
            .object(name)
            .map(|o| Term::Const(Value::Obj(o)))
            .ok_or_else(|| Failure(format!("unknown object `{name}`")))
    };
    let mut lead = vec![];
    for x in &a.args {
        lead.push(obj(x)?);
    }
    let from = obj(&a.from)?;
    let targets: Vec<String> = match &a.to {
        Some(t) => vec![t.clone()],
        None => problem
            .sorts
            .members(f.node_sort)
            .iter()
            .map(|&o| problem.sorts.object_name(o).to_string())
            .collect(),
    };
    let tl = Timeline::new(&problem, StateKind::Sparse);
    let ev = Evaluator::new(&problem, &tl);
    for t in targets {
        let mut args = lead.clone();
        args.push(from.clone());
        args.push(obj(&t)?);
        let term = Term::Dist {
            feature,
            args,
            at: Time::Abs(a.at),
        };
        let v = ev.term(&term, &mut Default::default())?;
        let cost = v.map(|v| problem.format_value(v)).unwrap_or_else(|| "unknown".into());
        writeln!(out, "{} {} {}", a.from, t, cost)?;
    }
    Ok(0)
}
