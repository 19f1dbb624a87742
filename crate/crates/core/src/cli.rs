//! Command-line front end. Exit codes: 0 ok, 1 property violation, 2
//! malformed input or usage.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::amalgam::{amalgamate_frames, canonical_sequences, psi_amalgamate, verify_amalgam_unique, BarrierKind, OrderIso};
use crate::condition::{amalgamate_conditions, check_clauses, extension_gap, Condition, SystemMode};
use crate::error::{Error, Result};
use crate::io::{self, OrderFile};
use crate::order::{check_admissible, Point, Universe};
use crate::sim::{full_schedule, run_schedule, DensitySchedule};
use crate::space::{
    cardinal_sequence, cb_derive, cb_derive_exhaustive, cover_reduction, separate, verify_levels, Subbase, CAP_ENV,
    DEFAULT_TOPOLOGY_CAP,
};
use crate::symsys::{check_system, gap_search, verify_gap_witness, SymSystem};
use crate::{dot, io::DEFAULT_THRESHOLD_TOP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BarrierFlag {
    #[value(name = "b3")]
    Recursive,
    #[value(name = "B3")]
    Canonical,
}

impl From<BarrierFlag> for BarrierKind {
    fn from(f: BarrierFlag) -> Self {
        match f {
            BarrierFlag::Recursive => BarrierKind::Recursive,
            BarrierFlag::Canonical => BarrierKind::Canonical,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "scattered-forge", version, about = "Admissible posets, their amalgams and side conditions")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an order file for admissibility.
    Check {
        file: PathBuf,
        /// Override the fan-out threshold of the universe.
        #[arg(long)]
        fanout: Option<u32>,
    },
    /// Cantor-Bendixson analysis: levels, ranks and the cardinal sequence.
    Cb {
        file: PathBuf,
        /// Decide isolation against the materialized topology.
        #[arg(long)]
        exhaustive: bool,
        /// Largest domain whose topology may be materialized.
        #[arg(long, env = CAP_ENV, default_value_t = DEFAULT_TOPOLOGY_CAP)]
        cap: usize,
    },
    /// A clopen set containing X and missing Y.
    Separate { file: PathBuf, x: Point, y: Point },
    /// Barrier cover of C(X) minus a basic set.
    Cover {
        file: PathBuf,
        x: Point,
        #[arg(long = "pos", num_args = 0..)]
        positives: Vec<Point>,
        #[arg(long = "neg", num_args = 0..)]
        negatives: Vec<Point>,
    },
    /// Amalgamate two orders along an isomorphism.
    Amalgamate { first: PathBuf, second: PathBuf, iso: PathBuf },
    /// Amalgamate two orders with their barrier maps.
    B3 {
        first: PathBuf,
        second: PathBuf,
        iso: PathBuf,
        #[arg(long, value_enum, default_value = "b3")]
        barrier: BarrierFlag,
        /// Only report the barrier of this pair.
        #[arg(long, num_args = 2)]
        pair: Option<Vec<Point>>,
    },
    /// Check a symmetric system.
    SymsysCheck { file: PathBuf },
    /// Search the gap interval around ordinal I for node CODE.
    GapSearch {
        file: PathBuf,
        #[arg(long)]
        node: u32,
        #[arg(long)]
        ordinal: u32,
    },
    /// Validate a condition.
    CondValidate { file: PathBuf },
    /// Amalgamate two conditions.
    CondAmalgamate {
        first: PathBuf,
        second: PathBuf,
        iso: PathBuf,
        /// Ordinal isomorphism for the union of the two systems.
        #[arg(long, conflicts_with = "into")]
        sys_iso: Option<PathBuf>,
        /// Code of the node of the second system that holds the first.
        #[arg(long)]
        into: Option<u32>,
        #[arg(long, value_enum, default_value = "B3")]
        barrier: BarrierFlag,
    },
    /// Does the first condition extend the second?
    CondExtend { stronger: PathBuf, weaker: PathBuf },
    /// Grow a chain of conditions meeting a density schedule.
    Simulate {
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(long)]
        fanout: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
    /// Hasse diagram of an order in DOT syntax.
    ExportDot { file: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Cb { .. } => "cb",
            Command::Separate { .. } => "separate",
            Command::Cover { .. } => "cover",
            Command::Amalgamate { .. } => "amalgamate",
            Command::B3 { .. } => "b3",
            Command::SymsysCheck { .. } => "symsys-check",
            Command::GapSearch { .. } => "gap-search",
            Command::CondValidate { .. } => "cond-validate",
            Command::CondAmalgamate { .. } => "cond-amalgamate",
            Command::CondExtend { .. } => "cond-extend",
            Command::Simulate { .. } => "simulate",
            Command::ExportDot { .. } => "export-dot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violation,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: Status,
    pub witnesses: Vec<String>,
    /// Milliseconds per phase.
    pub timings: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
    #[serde(skip)]
    text: String,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Violation => 1,
            Status::Error => 2,
        }
    }
}

struct Session {
    report: RunReport,
    clock: Instant,
}

impl Session {
    fn new(command: &str) -> Self {
        Session {
            report: RunReport {
                command: command.into(),
                status: Status::Ok,
                witnesses: Vec::new(),
                timings: BTreeMap::new(),
                result: Value::Null,
                text: String::new(),
            },
            clock: Instant::now(),
        }
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        let ms = now.duration_since(self.clock).as_secs_f64() * 1e3;
        self.report.timings.insert(phase.into(), ms);
        self.clock = now;
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.report.text.push_str(s.as_ref());
        self.report.text.push('\n');
    }

    fn violation(&mut self, witness: impl ToString) {
        self.report.status = Status::Violation;
        self.report.witnesses.push(witness.to_string());
    }

    fn fail(&mut self, e: &Error) {
        self.report.status = if e.is_violation() { Status::Violation } else { Status::Error };
        self.report.witnesses.push(e.to_string());
    }
}

fn set_text(set: &BTreeSet<Point>) -> String {
    let items: Vec<String> = set.iter().map(Point::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn load_order(path: &Path) -> Result<OrderFile> {
    io::load(path)
}

fn run_command(cmd: &Command, format: Format, s: &mut Session) -> Result<()> {
    match cmd {
        Command::Check { file, fanout } => {
            let f = load_order(file)?;
            let mut frame = f.frame();
            if let Some(m) = fanout {
                let u = frame.order.universe();
                frame.order = frame.order.with_universe(Universe::new(u.width, u.height_bound, *m)?)?;
            }
            s.lap("load");
            match check_admissible(&frame.order, &frame.barriers) {
                Ok(()) => s.line(format!("admissible: {} points", frame.order.len())),
                Err(e) if e.is_violation() => s.violation(e),
                Err(e) => return Err(e),
            }
            s.lap("check");
        }
        Command::Cb { file, exhaustive, cap } => {
            let f = load_order(file)?;
            s.lap("load");
            let analysis = if *exhaustive {
                cb_derive_exhaustive(&f.order, Subbase::DownSets, *cap)?
            } else {
                cb_derive(&f.order)
            };
            let seq = cardinal_sequence(&f.order);
            s.lap("derive");
            s.line(format!("{:?}", seq.sizes).replace(' ', ""));
            for (k, level) in analysis.levels.iter().enumerate() {
                s.line(format!("level {k}: {}", set_text(level)));
            }
            s.report.result = json!({ "sequence": seq.sizes, "analysis": analysis });
            if let Err(v) = verify_levels(&f.order) {
                s.line(format!("levels differ from heights: {v}"));
            }
            if !seq.scattered {
                s.violation(format!("{} points survive derivation", analysis.residue.len()));
            }
        }
        Command::Separate { file, x, y } => {
            let f = load_order(file)?;
            let sep = separate(&f.order, *x, *y)?;
            s.lap("separate");
            s.line(format!("{:?}: {}", sep.witness, set_text(&sep.set)));
            s.report.result = serde_json::to_value(&sep)?;
        }
        Command::Cover {
            file,
            x,
            positives,
            negatives,
        } => {
            let f = load_order(file)?;
            let frame = f.frame();
            let pos = positives.iter().copied().collect();
            let neg = negatives.iter().copied().collect();
            let w = cover_reduction(&frame.order, &frame.barriers, *x, &pos, &neg)?;
            s.lap("cover");
            s.line(set_text(&w));
            s.report.result = serde_json::to_value(&w)?;
        }
        Command::Amalgamate { first, second, iso } => {
            let (a, b) = (load_order(first)?, load_order(second)?);
            let psi: OrderIso = io::load(iso)?;
            s.lap("load");
            let am = psi_amalgamate(&a.order, &b.order, &psi)?;
            s.lap("amalgamate");
            verify_amalgam_unique(&a.order, &b.order, &psi, &am)?;
            s.lap("verify");
            if format == Format::Dot {
                s.line(dot::export_dot(&am).trim_end());
            } else {
                s.line(io::to_string(&OrderFile { order: am.clone(), barriers: None }));
            }
            s.report.result = serde_json::to_value(&am)?;
        }
        Command::B3 {
            first,
            second,
            iso,
            barrier,
            pair,
        } => {
            let (a, b) = (load_order(first)?, load_order(second)?);
            let psi: OrderIso = io::load(iso)?;
            s.lap("load");
            let (f1, f2) = (a.frame(), b.frame());
            let frame = amalgamate_frames(&f1, &f2, &psi, (*barrier).into())?;
            s.lap("amalgamate");
            let name = match barrier {
                BarrierFlag::Recursive => "b3",
                BarrierFlag::Canonical => "B3",
            };
            match pair.as_deref() {
                Some(&[x, y]) => {
                    let set = frame
                        .barriers
                        .get(x, y)
                        .ok_or_else(|| Error::InvalidPair(format!("{{{x}, {y}}} is not a pair of the amalgam")))?;
                    s.line(format!("{name}({{{x}, {y}}}) = {}", set_text(set)));
                    let mut result = json!({ "pair": [x, y], "set": set });
                    if let Ok(seq) = canonical_sequences(&f1, &f2, &psi, x, y) {
                        result["left"] = json!(seq.left);
                        result["right"] = json!(seq.right);
                    }
                    s.report.result = result;
                }
                _ => {
                    for (k, v) in frame.barriers.iter() {
                        s.line(format!("{name}({{{}, {}}}) = {}", k.low(), k.high(), set_text(v)));
                    }
                    s.report.result = serde_json::to_value(&frame.barriers)?;
                }
            }
        }
        Command::SymsysCheck { file } => {
            let sys: SymSystem = io::load(file)?;
            s.lap("load");
            match check_system(&sys) {
                Ok(()) => s.line(format!("symmetric system: {} nodes", sys.len())),
                Err(v) => s.violation(v),
            }
            s.lap("check");
        }
        Command::GapSearch { file, node, ordinal } => {
            let sys: SymSystem = io::load(file)?;
            match gap_search(&sys, *node, *ordinal)? {
                Some(w) => {
                    verify_gap_witness(&sys, *node, &w)?;
                    s.line(format!("alpha = {}, beta = {:?}", w.alpha, w.beta));
                    s.report.result = serde_json::to_value(w)?;
                }
                None => s.violation(format!("no gap witness for {ordinal} in node {node}")),
            }
            s.lap("search");
        }
        Command::CondValidate { file } => {
            let q: Condition = io::load(file)?;
            s.lap("load");
            match check_clauses(&q) {
                Ok(()) => s.line("valid condition"),
                Err(f) if f.error.is_violation() => s.violation(format!("clause ({}): {}", f.clause, f.error)),
                Err(f) => return Err(f.error),
            }
            s.lap("validate");
        }
        Command::CondAmalgamate {
            first,
            second,
            iso,
            sys_iso,
            into,
            barrier,
        } => {
            let q1: Condition = io::load(first)?;
            let q2: Condition = io::load(second)?;
            let psi: OrderIso = io::load(iso)?;
            let mode = match (sys_iso, into) {
                (_, Some(code)) => SystemMode::Into(*code),
                (Some(p), None) => SystemMode::Union(io::ordinal_iso_from_str(&std::fs::read_to_string(p)?)?),
                (None, None) => SystemMode::Union(Default::default()),
            };
            s.lap("load");
            let q3 = amalgamate_conditions(&q1, &q2, &psi, &mode, (*barrier).into())?;
            s.lap("amalgamate");
            s.line(io::to_string(&q3));
            s.report.result = serde_json::to_value(&q3)?;
        }
        Command::CondExtend { stronger, weaker } => {
            let q: Condition = io::load(stronger)?;
            let p: Condition = io::load(weaker)?;
            match extension_gap(&q, &p) {
                None => s.line("extends"),
                Some(part) => s.violation(format!("does not extend: {part} not included")),
            }
        }
        Command::Simulate {
            width,
            height,
            fanout,
            seed,
            schedule,
        } => {
            let u = Universe::new(*width, *height, *fanout)?;
            let sched: DensitySchedule = match schedule {
                Some(p) => io::load(p)?,
                None => full_schedule(u)?,
            };
            let start = Condition::empty(sched.universe, DEFAULT_THRESHOLD_TOP);
            let run = run_schedule(&start, &sched, *seed)?;
            s.lap("simulate");
            let ord = &run.result.order;
            let seq = cardinal_sequence(ord);
            let admissible = check_admissible(ord, &run.result.barriers);
            let levels = verify_levels(ord);
            s.lap("analyse");
            s.line(format!("chain length {}, {} points", run.chain.len(), ord.len()));
            s.line(format!("cardinal sequence {:?}", seq.sizes).replace(", ", ","));
            s.line(format!("rolled back relation insertions: {}", run.rollbacks));
            if let Err(e) = &admissible {
                s.violation(format!("not admissible: {e}"));
            }
            if let Err(v) = &levels {
                s.violation(format!("levels: {v}"));
            }
            if format == Format::Dot {
                s.report.text.clear();
                s.line(dot::export_dot(ord).trim_end());
            }
            s.report.result = json!({
                "condition": run.result,
                "chainLength": run.chain.len(),
                "sequence": seq.sizes,
                "admissible": admissible.is_ok(),
                "levels": levels.is_ok(),
                "rollbacks": run.rollbacks,
            });
        }
        Command::ExportDot { file } => {
            let f = load_order(file)?;
            s.line(dot::export_dot(&f.order).trim_end());
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and writes its
/// output. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return if code == 0 { 0 } else { 2 };
        }
    };
    let mut s = Session::new(cli.command.name());
    if let Err(e) = run_command(&cli.command, cli.format, &mut s) {
        s.fail(&e);
    }
    let report = s.report;
    let _ = match cli.format {
        Format::Json => writeln!(out, "{}", io::to_string(&report)),
        _ => {
            let mut text = report.text.clone();
            for w in &report.witnesses {
                let _ = writeln!(text, "{}: {w}", if report.status == Status::Error { "error" } else { "violation" });
            }
            write!(out, "{text}")
        }
    };
    report.exit_code()
}
