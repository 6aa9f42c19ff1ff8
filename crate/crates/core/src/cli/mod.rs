//! Command-line front end: file loading, subcommands and their output.
//!
//! Every subcommand is a library function returning a report value; the
//! binary only prints [`Report::render`] of that value and exits with
//! [`Report::exit_code`].

pub mod file;
pub mod fuzz;
pub mod suite;

use std::collections::HashSet;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::closure::{self, ClosureError, ElemSet, Params};
use crate::formula::{self, free_vars, FormulaError};
use crate::measure::{Event, EventAlgebra};
use crate::rational::format_fraction;
use crate::randvar::{glue, RandElem, RandError, Randomization};
use file::LoadError;
use suite::Verdicts;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    /// One JSON object per invocation.
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "randdcl", version, about = "Definable closure in randomizations of DLO and finite structures")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Event of a formula whose free variables name elements.
    Eval { file: PathBuf, formula: String },
    /// Atoms of the algebra of events definable over the parameters.
    Dclb { file: PathBuf, params: Vec<String> },
    /// Elements of the definable closure of the parameters.
    Dcl { file: PathBuf, params: Vec<String> },
    /// Closure of the parameters under ell (DLO only).
    Lcl { file: PathBuf, params: Vec<String> },
    /// Whether an element is definable over the parameters, by every decider.
    Isdef { file: PathBuf, elem: String, params: Vec<String> },
    /// Event on which an element is pointwise definable.
    Pointwise { file: PathBuf, elem: String, params: Vec<String> },
    /// d_K between two elements, or d_B between two events.
    Dist { file: PathBuf, x: String, y: String },
    /// The element agreeing with A on EVENT and with B elsewhere.
    Glue { file: PathBuf, a: String, b: String, event: String },
    /// A witness for VAR in a formula.
    Witness { file: PathBuf, formula: String, var: String },
    /// Run the invariant suite on a file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every cross-check on generated instances.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Rand(#[from] RandError),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Load(e) => e.exit_code(),
            _ => 2,
        }
    }
}

impl From<crate::measure::MeasureError> for CliError {
    fn from(e: crate::measure::MeasureError) -> Self {
        CliError::Rand(e.into())
    }
}

/// An event with its measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EventReport {
    pub atoms: Vec<String>,
    pub mu: String,
}

impl EventReport {
    pub fn new(r: &Randomization, e: &Event) -> Self {
        let names = r.partition().names();
        EventReport {
            atoms: e.members().iter().map(|&i| names[i].clone()).collect(),
            mu: format_fraction(&r.mu(e)),
        }
    }

    fn set(&self) -> String {
        format!("{{{}}}", self.atoms.join(","))
    }
}

/// An element, labelled when it has a name or a short description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledElem {
    pub label: Option<String>,
    pub values: Vec<String>,
}

impl LabeledElem {
    fn new(label: Option<String>, e: &RandElem) -> Self {
        LabeledElem {
            label,
            values: e.values().iter().map(format_fraction).collect(),
        }
    }

    fn tuple(&self) -> String {
        format!("({})", self.values.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefinabilityReport {
    pub definable: bool,
    pub agree: bool,
    pub deciders: Vec<(String, bool)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub passed: bool,
    pub report: suite::Report,
}

/// Result of one subcommand.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Report {
    Event(EventReport),
    Algebra { atoms: Vec<EventReport> },
    Elements { elements: Vec<LabeledElem> },
    Definability(DefinabilityReport),
    Pointwise { event: EventReport, pointwise: bool },
    Distance { metric: String, value: String },
    Element(LabeledElem),
    Check(CheckSummary),
    Fuzz(suite::FuzzSummary),
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("1 {word}")
    } else {
        format!("{n} {word}s")
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => serde_json::to_string(self).expect("reports serialize"),
            Format::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        match self {
            Report::Event(e) => format!("{}, mu = {}", e.set(), e.mu),
            Report::Algebra { atoms } => {
                let list: Vec<String> = atoms.iter().map(|a| format!("{} (mu = {})", a.set(), a.mu)).collect();
                format!("{}: {}", plural(atoms.len(), "atom"), list.join(", "))
            }
            Report::Elements { elements } => {
                let list: Vec<String> = elements
                    .iter()
                    .map(|e| match &e.label {
                        Some(l) if is_plain_name(l) => l.clone(),
                        Some(l) => format!("{l}={}", e.tuple()),
                        None => e.tuple(),
                    })
                    .collect();
                if list.is_empty() {
                    "0 elements".to_owned()
                } else {
                    format!("{}: {}", plural(list.len(), "element"), list.join(", "))
                }
            }
            Report::Definability(d) => {
                let all: Vec<String> = d.deciders.iter().map(|(n, v)| format!("{n}={v}")).collect();
                if d.agree {
                    format!("definable: {} (all deciders agree: {})", d.definable, all.join(", "))
                } else {
                    format!("deciders disagree: {}", all.join(", "))
                }
            }
            Report::Pointwise { event, pointwise } => {
                format!("pointwise definable: {pointwise}; on {}, mu = {}", event.set(), event.mu)
            }
            Report::Distance { metric, value } => format!("{metric} = {value}"),
            Report::Element(e) => e.tuple(),
            Report::Check(c) => {
                let mut lines: Vec<String> = c
                    .report
                    .checks
                    .iter()
                    .map(|(name, t)| {
                        let tag = if t.passed == t.total { "PASS" } else { "FAIL" };
                        format!("{tag} {name} ({}/{})", t.passed, t.total)
                    })
                    .collect();
                lines.extend(c.report.failures.iter().map(|f| format!("  {f}")));
                let ok = c.report.checks.values().filter(|t| t.passed == t.total).count();
                lines.push(format!("{ok}/{} checks passed", c.report.checks.len()));
                lines.join("\n")
            }
            Report::Fuzz(f) => {
                let mut lines: Vec<String> = f.report.failures.iter().map(|x| format!("  {x}")).collect();
                lines.push(format!("{}/{} instances passed all cross-checks", f.passed, f.count));
                lines.join("\n")
            }
        }
    }

    /// 0 on success or a true verdict, 1 on a false verdict, 3 when the
    /// deciders or the invariant suite disagree with each other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Report::Definability(d) if !d.agree => 3,
            Report::Definability(d) => i32::from(!d.definable),
            Report::Pointwise { pointwise, .. } => i32::from(!pointwise),
            Report::Check(c) if !c.passed => 3,
            Report::Fuzz(f) if f.passed != f.count => 3,
            _ => 0,
        }
    }
}

fn is_plain_name(s: &str) -> bool {
    !s.contains('(')
}

fn params(r: &Randomization, names: &[String]) -> Result<Params, CliError> {
    Ok(Params::from_names(r, names)?)
}

fn element<'a>(r: &'a Randomization, name: &str) -> Result<&'a RandElem, CliError> {
    Ok(r.element(name)?)
}

/// An event argument: `{w1,w2}` by atom names, or a formula over element names.
pub fn parse_event(r: &Randomization, text: &str) -> Result<Event, CliError> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let mut members = Vec::new();
        for name in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let i = r
                .partition()
                .index_of(name)
                .ok_or_else(|| CliError::Input(format!("unknown atom `{name}`")))?;
            members.push(i);
        }
        return Ok(Event::new(r.atoms(), members)?);
    }
    let f = formula::parse(t, r.theory().signature())?;
    Ok(r.eval_named(&f)?)
}

pub fn eval(r: &Randomization, text: &str) -> Result<Report, CliError> {
    let f = formula::parse(text, r.theory().signature())?;
    Ok(Report::Event(EventReport::new(r, &r.eval_named(&f)?)))
}

fn algebra(r: &Randomization, alg: &EventAlgebra) -> Report {
    Report::Algebra {
        atoms: alg.atoms().iter().map(|a| EventReport::new(r, a)).collect(),
    }
}

pub fn dclb(r: &Randomization, names: &[String]) -> Result<Report, CliError> {
    Ok(algebra(r, &closure::dcl_b(r, &params(r, names)?)?))
}

/// Orders and labels a closure: the parameters first, then `max` and `min`
/// of parameter pairs, then constants of a finite theory, then other named
/// elements of the file, then the rest by value.
pub fn label_elements(r: &Randomization, params: &Params, set: &ElemSet) -> Vec<LabeledElem> {
    let mut out = Vec::new();
    let mut taken: HashSet<&RandElem> = HashSet::new();
    fn push<'s>(
        set: &'s ElemSet,
        label: String,
        e: &RandElem,
        out: &mut Vec<LabeledElem>,
        taken: &mut HashSet<&'s RandElem>,
    ) {
        if let Some(found) = set.get(e) {
            if taken.insert(found) {
                out.push(LabeledElem::new(Some(label), e));
            }
        }
    }
    for (n, e) in params.names().iter().zip(params.elems()) {
        push(set, n.clone(), e, &mut out, &mut taken);
    }
    if r.theory().is_dlo() {
        let (names, elems) = (params.names(), params.elems());
        for i in 0..elems.len() {
            for j in i + 1..elems.len() {
                let pair = format!("{},{}", names[i], names[j]);
                let mx = r.max_elem(&elems[i], &elems[j]).expect("dlo");
                push(set, format!("max({pair})"), &mx, &mut out, &mut taken);
                let mn = r.min_elem(&elems[i], &elems[j]).expect("dlo");
                push(set, format!("min({pair})"), &mn, &mut out, &mut taken);
            }
        }
    } else {
        for k in 0..r.theory().domain_size().unwrap_or(0) {
            let c = RandElem::constant(r.theory().constant(k), r.atoms());
            push(set, format!("c{k}"), &c, &mut out, &mut taken);
        }
    }
    for (n, e) in r.elements() {
        push(set, n.clone(), e, &mut out, &mut taken);
    }
    for e in set {
        if !taken.contains(&e) {
            out.push(LabeledElem::new(None, e));
        }
    }
    out
}

pub fn dcl(r: &Randomization, names: &[String]) -> Result<Report, CliError> {
    let p = params(r, names)?;
    let set = closure::dcl_enumerate(r, &p)?;
    Ok(Report::Elements {
        elements: label_elements(r, &p, &set),
    })
}

pub fn lcl(r: &Randomization, names: &[String]) -> Result<Report, CliError> {
    let p = params(r, names)?;
    let set = closure::lcl(r, &p)?;
    Ok(Report::Elements {
        elements: label_elements(r, &p, &set),
    })
}

pub fn isdef(r: &Randomization, elem: &str, names: &[String]) -> Result<Report, CliError> {
    let p = params(r, names)?;
    let b = element(r, elem)?;
    let dcl = closure::dcl_enumerate(r, &p)?;
    let v = Verdicts::compute(r, b, &p, &dcl)?;
    Ok(Report::Definability(DefinabilityReport {
        definable: v.algebra,
        agree: v.agree(),
        deciders: v.named().into_iter().map(|(n, x)| (n.to_owned(), x)).collect(),
    }))
}

pub fn pointwise(r: &Randomization, elem: &str, names: &[String]) -> Result<Report, CliError> {
    let p = params(r, names)?;
    let e = closure::pointwise_definable_event(r, element(r, elem)?, &p)?;
    Ok(Report::Pointwise {
        pointwise: e.is_top(),
        event: EventReport::new(r, &e),
    })
}

pub fn dist(r: &Randomization, x: &str, y: &str) -> Result<Report, CliError> {
    if let (Ok(a), Ok(b)) = (r.element(x), r.element(y)) {
        return Ok(Report::Distance {
            metric: "d_K".to_owned(),
            value: format_fraction(&r.d_k(a, b)?),
        });
    }
    let (e, f) = (parse_event(r, x)?, parse_event(r, y)?);
    Ok(Report::Distance {
        metric: "d_B".to_owned(),
        value: format_fraction(&r.partition().d_b(&e, &f)?),
    })
}

pub fn glue_cmd(r: &Randomization, a: &str, b: &str, event: &str) -> Result<Report, CliError> {
    let e = parse_event(r, event)?;
    let g = glue(element(r, a)?, element(r, b)?, &e)?;
    Ok(Report::Element(LabeledElem::new(None, &g)))
}

pub fn witness(r: &Randomization, text: &str, var: &str) -> Result<Report, CliError> {
    let f = formula::parse(text, r.theory().signature())?;
    let mut binding = crate::randvar::Binding::new();
    for v in free_vars(&f) {
        if v != var {
            let e = r.element(&v)?;
            binding.insert(v, e);
        }
    }
    let w = r.witness(&f, var, &binding)?;
    Ok(Report::Element(LabeledElem::new(None, &w)))
}

pub fn check(r: &Randomization, seed: u64) -> Report {
    let report = suite::check_randomization(r, seed);
    Report::Check(CheckSummary {
        passed: report.passed(),
        report,
    })
}

pub fn fuzz_cmd(seed: u64, count: usize) -> Report {
    Report::Fuzz(suite::fuzz(seed, count))
}

/// Runs one parsed command.
pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Eval { file, formula } => eval(&file::load(file)?, formula),
        Command::Dclb { file, params } => dclb(&file::load(file)?, params),
        Command::Dcl { file, params } => dcl(&file::load(file)?, params),
        Command::Lcl { file, params } => lcl(&file::load(file)?, params),
        Command::Isdef { file, elem, params } => isdef(&file::load(file)?, elem, params),
        Command::Pointwise { file, elem, params } => pointwise(&file::load(file)?, elem, params),
        Command::Dist { file, x, y } => dist(&file::load(file)?, x, y),
        Command::Glue { file, a, b, event } => glue_cmd(&file::load(file)?, a, b, event),
        Command::Witness { file, formula, var } => witness(&file::load(file)?, formula, var),
        Command::Check { file, seed } => Ok(check(&file::load(file)?, *seed)),
        Command::Fuzz { count, seed } => Ok(fuzz_cmd(*seed, *count)),
    }
}
