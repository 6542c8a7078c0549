//! Command line front end behind the `inertia` binary.
//!
//! Exit codes: 0 success, 1 a check failed (output still written),
//! 2 bad input or usage, 3 numeric failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit;
use crate::belief::{Belief, Event};
use crate::cps::{self, EpsilonCps, HtFile, Ladder, LadderFile};
use crate::error::{Error, Result};
use crate::io::{self, csv_table, format_sig, ModelFile};
use crate::model::{events_of_size, update_family, UpdateRule};
use crate::persuasion::{self, PersuasionEnv, PersuasionSolution, Regime};
use crate::report::AuditReport;
use crate::signal::{self, SignalModel};

#[derive(Debug, Parser)]
#[command(name = "inertia", version, about = "Inertial belief updating toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior of a model after one event.
    Update {
        #[arg(long)]
        model: PathBuf,
        /// Comma separated state labels, e.g. `s1,s2`.
        #[arg(long)]
        event: String,
        #[command(flatten)]
        output: Output,
    },
    /// Posteriors over a list of events; all nonempty events by default.
    Family {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "event")]
        events: Vec<String>,
        /// Every event with exactly this many states.
        #[arg(long, conflicts_with = "events")]
        size: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Run every axiom check on a family file.
    Audit {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Extract a ladder from a family, or evaluate a ladder.
    Cps {
        #[arg(long, required_unless_present = "ladder", conflicts_with = "ladder")]
        family: Option<PathBuf>,
        #[arg(long)]
        ladder: Option<PathBuf>,
        /// Overrides the ladder file's threshold.
        #[arg(long, requires = "ladder")]
        epsilon: Option<f64>,
        #[arg(long = "event", requires = "ladder")]
        events: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Build a hypothesis-testing model equivalent to a thresholded ladder.
    Ht {
        #[arg(long)]
        ladder: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Distorted posteriors over payoff states after each message.
    Signal {
        #[arg(long)]
        model: PathBuf,
        /// Only this message label.
        #[arg(long)]
        message: Option<String>,
        /// Also confirm each posterior minimizes the signal distance.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Optimal signal for a sender facing a distorted receiver.
    Persuade {
        #[arg(long)]
        env: PathBuf,
        /// Number of messages allowed to induce the sender's action.
        #[arg(long, conflicts_with_all = ["resolution", "regime"])]
        k: Option<usize>,
        /// Solve by exhaustive grid at this step instead.
        #[arg(long, conflicts_with = "regime")]
        resolution: Option<f64>,
        /// linear, concave, convex or grid.
        #[arg(long)]
        regime: Option<Regime>,
        #[command(flatten)]
        output: Output,
    },
}

/// Rendered command output plus whether every check passed.
struct Rendered {
    body: String,
    ok: bool,
}

impl Rendered {
    fn ok(body: String) -> Self {
        Self { body, ok: true }
    }
}

/// Parse `argv` (program name first), execute, and return the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (result, target) = execute(cli.command);
    match result.and_then(|r| emit(&r.body, target.as_deref(), out).map(|_| r.ok)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.kind());
            if e.is_input_error() {
                2
            } else {
                3
            }
        }
    }
}

fn emit(body: &str, target: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match target {
        Some(p) => fs::write(p, body).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(body.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn execute(cmd: Command) -> (Result<Rendered>, Option<PathBuf>) {
    match cmd {
        Command::Update { model, event, output } => (update(&model, &event, output.format), output.out),
        Command::Family { model, events, size, output } => {
            (family(&model, &events, size, output.format), output.out)
        }
        Command::Audit { family, output } => (audit_cmd(&family, output.format), output.out),
        Command::Cps { family, ladder, epsilon, events, output } => {
            let r = match (family, ladder) {
                (Some(f), _) => extract(&f, output.format),
                (None, Some(l)) => evaluate(&l, epsilon, &events, output.format),
                (None, None) => Err(Error::InvalidParameter("need --family or --ladder".into())),
            };
            (r, output.out)
        }
        Command::Ht { ladder, epsilon, output } => (ht(&ladder, epsilon, output.format), output.out),
        Command::Signal { model, message, check, output } => {
            (signal_cmd(&model, message.as_deref(), check, output.format), output.out)
        }
        Command::Persuade { env, k, resolution, regime, output } => {
            (persuade(&env, k, resolution, regime, output.format), output.out)
        }
    }
}

fn load_model(path: &Path) -> Result<io::LoadedModel> {
    io::read_json::<ModelFile>(path)?.into_model()
}

#[derive(Serialize)]
struct PosteriorOut<'a> {
    event: Vec<String>,
    posterior: &'a Belief,
}

fn update(path: &Path, event: &str, format: Format) -> Result<Rendered> {
    let m = load_model(path)?;
    let e = m.space().parse_event(event)?;
    let post = m.update(e)?;
    let labels = m.space().labels();
    Ok(Rendered::ok(match format {
        Format::Json => io::to_json(&PosteriorOut { event: m.space().event_labels(e), posterior: &post }),
        Format::Csv => csv_table(labels, &[io::belief_row(&post)]),
        Format::Text => {
            let cells: Vec<String> =
                labels.iter().zip(post.probs()).map(|(l, p)| format!("{l}={}", format_sig(*p))).collect();
            format!("{} -> {}\n", m.space().format_event(e), cells.join(" "))
        }
    }))
}

fn parse_events(rule: &dyn UpdateRule, texts: &[String]) -> Result<Vec<Event>> {
    texts.iter().map(|t| rule.space().parse_event(t)).collect()
}

fn render_family(fam: &crate::family::UpdateFamily, format: Format) -> String {
    match format {
        Format::Json => io::to_json(&fam.to_file()),
        Format::Csv => io::family_csv(fam),
        Format::Text => io::family_text(fam),
    }
}

fn family(path: &Path, events: &[String], size: Option<usize>, format: Format) -> Result<Rendered> {
    let m = load_model(path)?;
    let n = m.space().len();
    let evs = match size {
        Some(k) if k == 0 || k > n => {
            return Err(Error::InvalidParameter(format!("--size {k} outside 1..={n}")))
        }
        Some(k) => events_of_size(n, k),
        None if events.is_empty() => Event::all_nonempty(n).collect(),
        None => parse_events(&m, events)?,
    };
    Ok(Rendered::ok(render_family(&update_family(&m, &evs)?, format)))
}

fn report_table(reports: &[AuditReport], format: Format) -> String {
    match format {
        Format::Json => io::to_json(&reports),
        Format::Csv => {
            let header = ["axiom", "passed", "violations", "first_violation"].map(String::from);
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.axiom.clone(),
                        r.passed.to_string(),
                        r.violations.len().to_string(),
                        r.violations.first().map(|v| v.message.clone()).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_table(&header, &rows)
        }
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                let status = if r.passed { "PASS" } else { "FAIL" };
                s.push_str(&format!("{status} {}\n", r.axiom));
                for v in &r.violations {
                    s.push_str(&format!("  - {}", v.message));
                    if !v.events.is_empty() {
                        s.push_str(&format!(" at {}", v.events.join(" ")));
                    }
                    if !v.states.is_empty() {
                        s.push_str(&format!(" on {}", v.states.join(" ")));
                    }
                    if !v.values.is_empty() {
                        let vals: Vec<String> = v.values.iter().map(|&x| format_sig(x)).collect();
                        s.push_str(&format!(" [{}]", vals.join(", ")));
                    }
                    s.push('\n');
                }
                for n in &r.notes {
                    s.push_str(&format!("  note: {n}\n"));
                }
            }
            s
        }
    }
}

fn audit_cmd(path: &Path, format: Format) -> Result<Rendered> {
    let fam = io::read_family(path)?;
    let reports = audit::run_all(&fam);
    let ok = reports.iter().all(|r| r.passed);
    Ok(Rendered { body: report_table(&reports, format), ok })
}

fn ladder_table(file: &LadderFile, format: Format) -> String {
    match format {
        Format::Json => io::to_json(file),
        Format::Csv | Format::Text => {
            let header: Vec<String> =
                std::iter::once("level".to_string()).chain(file.states.iter().cloned()).collect();
            let rows: Vec<Vec<String>> = file
                .levels
                .iter()
                .enumerate()
                .map(|(k, b)| std::iter::once(k.to_string()).chain(io::belief_row(b)).collect())
                .collect();
            csv_table(&header, &rows)
        }
    }
}

fn extract(path: &Path, format: Format) -> Result<Rendered> {
    let fam = io::read_family(path)?;
    let report = cps::check_cps(&fam);
    if !report.passed {
        return Ok(Rendered { body: report_table(&[report], format), ok: false });
    }
    let ladder = cps::ladder_from_family(&fam)?;
    Ok(Rendered::ok(ladder_table(&ladder.to_file(None), format)))
}

fn load_ladder(path: &Path, epsilon: Option<f64>) -> Result<(Ladder, f64)> {
    let mut file: LadderFile = io::read_json(path)?;
    if epsilon.is_some() {
        file.epsilon = epsilon;
    }
    Ladder::from_file(file)
}

fn evaluate(path: &Path, epsilon: Option<f64>, events: &[String], format: Format) -> Result<Rendered> {
    let (ladder, eps) = load_ladder(path, epsilon)?;
    let rule = EpsilonCps { ladder, epsilon: eps };
    let evs = if events.is_empty() {
        Event::all_nonempty(rule.space().len())
            .filter(|&e| rule.ladder.level_for(eps, e).is_some())
            .collect()
    } else {
        parse_events(&rule, events)?
    };
    Ok(Rendered::ok(render_family(&update_family(&rule, &evs)?, format)))
}

#[derive(Serialize)]
struct HtOut {
    model: HtFile,
    atom_levels: Vec<usize>,
    ratio: f64,
    events_checked: usize,
    unreachable: Vec<String>,
}

fn ht(path: &Path, epsilon: Option<f64>, format: Format) -> Result<Rendered> {
    let (ladder, eps) = load_ladder(path, epsilon)?;
    let c = cps::ht_from_ecps(&ladder, eps)?;
    let space = ladder.space();
    let out = HtOut {
        model: c.model.to_file(),
        atom_levels: c.atom_levels,
        ratio: c.ratio,
        events_checked: c.events_checked,
        unreachable: c.unreachable.iter().map(|&e| space.format_event(e)).collect(),
    };
    Ok(Rendered::ok(match format {
        Format::Json => io::to_json(&out),
        Format::Csv => {
            let header: Vec<String> = ["atom", "level", "weight"]
                .map(String::from)
                .into_iter()
                .chain(out.model.states.iter().cloned())
                .collect();
            let rows: Vec<Vec<String>> = out
                .model
                .atoms
                .iter()
                .zip(&out.atom_levels)
                .enumerate()
                .map(|(i, (a, lvl))| {
                    [i.to_string(), lvl.to_string(), format_sig(a.weight)]
                        .into_iter()
                        .chain(io::belief_row(&a.belief))
                        .collect()
                })
                .collect();
            csv_table(&header, &rows)
        }
        Format::Text => {
            let mut s = format!(
                "threshold {}\nverified on {} events\n",
                format_sig(out.model.epsilon),
                out.events_checked
            );
            for (i, (a, lvl)) in out.model.atoms.iter().zip(&out.atom_levels).enumerate() {
                let cells: Vec<String> = io::belief_row(&a.belief);
                s.push_str(&format!(
                    "atom {i} (level {lvl}, weight {}): {}\n",
                    format_sig(a.weight),
                    cells.join(" ")
                ));
            }
            if !out.unreachable.is_empty() {
                s.push_str(&format!("unreachable: {}\n", out.unreachable.join(" ")));
            }
            s
        }
    }))
}

#[derive(Serialize)]
struct SignalOut<'a> {
    message: &'a str,
    posterior: Belief,
}

#[derive(Serialize)]
struct SignalReport<'a> {
    posteriors: &'a [SignalOut<'a>],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<AuditReport>,
}

fn signal_cmd(path: &Path, message: Option<&str>, check: bool, format: Format) -> Result<Rendered> {
    let m: SignalModel = io::read_json(path)?;
    m.validate()?;
    let idx: Vec<usize> = match message {
        Some(label) => vec![m.message_index(label)?],
        None => (0..m.message_count()).collect(),
    };
    let rows = idx
        .iter()
        .map(|&k| Ok(SignalOut { message: &m.message_labels[k], posterior: signal::grether_posterior(&m, k)? }))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<AuditReport> =
        if check { idx.iter().map(|&k| signal::grether_distance_check(&m, k)).collect() } else { Vec::new() };
    let ok = checks.iter().all(|r| r.passed);
    let body = match format {
        Format::Json => io::to_json(&SignalReport { posteriors: &rows, checks }),
        Format::Csv | Format::Text => {
            let header: Vec<String> =
                std::iter::once("message".to_string()).chain(m.omega_labels.iter().cloned()).collect();
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| std::iter::once(r.message.to_string()).chain(io::belief_row(&r.posterior)).collect())
                .collect();
            let mut s = csv_table(&header, &table);
            if format == Format::Text && !checks.is_empty() {
                s.push_str(&report_table(&checks, Format::Text));
            }
            s
        }
    };
    Ok(Rendered { body, ok })
}

fn persuade(
    path: &Path,
    k: Option<usize>,
    resolution: Option<f64>,
    regime: Option<Regime>,
    format: Format,
) -> Result<Rendered> {
    let env: PersuasionEnv = io::read_json(path)?;
    env.validate()?;
    let sol = match (k, resolution) {
        (Some(k), _) => persuasion::optimize_rich(&env, k)?,
        (None, Some(r)) => persuasion::grid_oracle(&env, r)?,
        (None, None) => persuasion::optimize_binary_with(&env, regime)?,
    };
    Ok(Rendered::ok(render_solution(&sol, format)))
}

fn render_solution(sol: &PersuasionSolution, format: Format) -> String {
    let n = sol.signal.pi.first().map_or(0, Vec::len);
    let state_names: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
    match format {
        Format::Json => io::to_json(sol),
        Format::Csv => {
            let header: Vec<String> = ["message", "action"]
                .map(String::from)
                .into_iter()
                .chain(state_names)
                .collect();
            let rows: Vec<Vec<String>> = sol
                .signal
                .pi
                .iter()
                .zip(&sol.receiver_actions)
                .enumerate()
                .map(|(m, (row, act))| {
                    [format!("m{}", m + 1), action_name(*act).to_string()]
                        .into_iter()
                        .chain(row.iter().map(|&x| format_sig(x)))
                        .collect()
                })
                .collect();
            csv_table(&header, &rows)
        }
        Format::Text => {
            let mut s = format!("regime {}\nvalue {}\n", regime_name(sol.regime), format_sig(sol.sender_value));
            if let Some(v) = sol.relaxed_value {
                s.push_str(&format!("relaxed value {}\n", format_sig(v)));
            }
            for (m, (row, act)) in sol.signal.pi.iter().zip(&sol.receiver_actions).enumerate() {
                let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
                s.push_str(&format!("m{} -> {}: {}\n", m + 1, action_name(*act), cells.join(" ")));
            }
            for note in &sol.notes {
                s.push_str(&format!("note: {note}\n"));
            }
            s
        }
    }
}

fn action_name(a: persuasion::Action) -> &'static str {
    match a {
        persuasion::Action::A => "a",
        persuasion::Action::B => "b",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::LinearGreedy => "linear_greedy",
        Regime::ConcaveVertex => "concave_vertex",
        Regime::ConvexInterior => "convex_interior",
        Regime::GridFallback => "grid_fallback",
    }
}
