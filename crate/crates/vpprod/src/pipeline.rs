//! Program and property in, product and Horn clauses out, verdict from a solver portfolio.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::chc::{
    copies_with_entries, encode_baseline, encode_nwa, encode_vpg, portfolio, Baseline, ChcError, ChcSystem, EncodeOptions,
    NwaInfo, PortfolioResult, SolverSpec, Status,
};
use crate::concurrency::{wn_shuffle_soundness_report, Direction, IndependenceSpec};
use crate::frontend::{parse, to_vpg, HyperProperty, Program, System};
use crate::oracle::{wn_shuffle_words, DEFAULT_CAP};
use crate::reductions::{evaluate, letter_resolver, Evaluation, Mode, NodeStats, Product, ReductionExpr};
use crate::vpl::{vpg_to_vpa, Sym, Vpg};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Product(Mode),
    Baseline(Baseline),
}

impl FromStr for RunMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.strip_prefix("baseline:") {
            Some(v) => v.parse().map(RunMode::Baseline),
            None => s.parse().map(RunMode::Product),
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunMode::Product(m) => write!(f, "{m}"),
            RunMode::Baseline(b) => write!(f, "baseline:{b}"),
        }
    }
}

/// Entry procedure per component, from `--entry` flags.
#[derive(Clone, Debug, Default)]
pub struct Entries {
    per: BTreeMap<usize, String>,
    default: Option<String>,
}

impl Entries {
    /// Parses `P2=proc`, `2=proc`, or a bare `proc` applying to every unlisted component.
    pub fn add(&mut self, text: &str) -> Result<(), PipelineError> {
        match text.split_once('=') {
            None => self.default = Some(text.trim().to_string()),
            Some((c, p)) => {
                let c = c.trim();
                let idx = c.strip_prefix('P').unwrap_or(c).parse::<usize>().ok().filter(|&i| i >= 1).ok_or_else(|| {
                    PipelineError::new(Stage::Config, format!("bad component `{c}` in entry `{text}`"))
                })?;
                self.per.insert(idx, p.trim().to_string());
            }
        }
        Ok(())
    }

    /// Entry names for components `1..=k`; unlisted ones fall back to the bare entry, then to
    /// the first procedure of `p`.
    pub fn resolve(&self, p: &Program, k: usize) -> Result<Vec<String>, PipelineError> {
        if let Some(&bad) = self.per.keys().find(|&&i| i > k) {
            return Err(PipelineError::new(Stage::Config, format!("entry for component {bad}, but there are {k} components")));
        }
        let first = p.procs.first().map(|q| q.name.clone());
        (1..=k)
            .map(|i| {
                let e = self.per.get(&i).cloned().or_else(|| self.default.clone()).or_else(|| first.clone());
                let e = e.ok_or_else(|| PipelineError::new(Stage::Parse, "program has no procedures"))?;
                if p.proc(&e).is_none() {
                    return Err(PipelineError::new(Stage::Config, format!("no procedure `{e}`")));
                }
                Ok(e)
            })
            .collect()
    }

    /// Number of components named explicitly.
    pub fn max_index(&self) -> usize {
        self.per.keys().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: String,
    pub entries: Entries,
    pub property: HyperProperty,
    /// Ignored by baselines; all-ones lockstep over every component when `None`.
    pub reduction: Option<String>,
    pub mode: RunMode,
    /// An empty list stops after encoding.
    pub solvers: Vec<SolverSpec>,
    pub timeout: Duration,
    pub emit_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: impl Into<String>, property: HyperProperty, mode: RunMode) -> Self {
        RunConfig {
            source: source.into(),
            entries: Entries::default(),
            property,
            reduction: None,
            mode,
            solvers: crate::chc::default_solvers(),
            timeout: Duration::from_secs(600),
            emit_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Parse,
    Property,
    Reduction,
    Encode,
    Solve,
    Io,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Property => "property",
            Stage::Reduction => "reduction",
            Stage::Encode => "encode",
            Stage::Solve => "solve",
            Stage::Io => "io",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{} error: {msg}", stage.name())]
pub struct PipelineError {
    pub stage: Stage,
    pub msg: String,
}

impl PipelineError {
    pub fn new(stage: Stage, msg: impl Into<String>) -> Self {
        PipelineError { stage, msg: msg.into() }
    }
}

fn encode_err(e: ChcError) -> PipelineError {
    let stage = match e {
        ChcError::Property(_) => Stage::Property,
        _ => Stage::Encode,
    };
    PipelineError::new(stage, e.to_string())
}

fn at<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::new(stage, e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Verified,
    Refuted,
    Unknown,
}

impl Verdict {
    pub fn of(s: &Status) -> Verdict {
        match s {
            Status::Sat => Verdict::Verified,
            Status::Unsat => Verdict::Refuted,
            _ => Verdict::Unknown,
        }
    }

    /// 0 verified, 1 refuted, 2 unknown or timeout.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Refuted => 1,
            Verdict::Unknown => 2,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Sizes {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonterminals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub productions: Option<usize>,
    pub clauses: usize,
    pub predicates: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductRecord {
    #[serde(flatten)]
    pub stats: NodeStats,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Artifacts {
    pub product: Option<PathBuf>,
    pub smtlib: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub verdict: Verdict,
    pub mode: String,
    pub reduction: Option<String>,
    pub entries: Vec<String>,
    pub sizes: Sizes,
    /// Caller-state splitting done by the automaton encoding.
    pub splits: Option<NwaInfo>,
    /// One record per greedy product built.
    pub products: Vec<ProductRecord>,
    pub solver: Option<PortfolioResult>,
    pub wall_ms: u128,
    pub artifacts: Artifacts,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a run produces before solving.
pub struct Encoded {
    pub system: Option<System>,
    pub product: Option<Product>,
    pub chc: ChcSystem,
    pub sizes: Sizes,
    pub splits: Option<NwaInfo>,
    pub products: Vec<ProductRecord>,
    pub reduction: Option<String>,
    pub entries: Vec<String>,
}

pub fn default_reduction(k: usize) -> String {
    if k == 1 {
        return "P1".into();
    }
    let ones = vec!["1"; k].join(",");
    let leaves: Vec<String> = (1..=k).map(|i| format!("P{i}")).collect();
    format!("({ones})-lockstep({})", leaves.join(", "))
}

/// Product of the components of `sys`, named `P1`, `P2`, … in `reduction`. Excluded names are
/// letters or procedures.
pub fn product(sys: &System, reduction: &str, mode: Mode) -> Result<Evaluation, PipelineError> {
    let expr = ReductionExpr::parse(reduction).map_err(at(Stage::Reduction))?;
    let inputs: BTreeMap<String, Vpg> = sys.components.iter().map(|c| (format!("P{}", c.index), c.grammar.clone())).collect();
    let letters = letter_resolver(&sys.alphabet);
    let resolve = |n: &str| letters(n).or_else(|| sys.proc_letters(n));
    evaluate(&expr, &inputs, mode, &resolve).map_err(at(Stage::Reduction))
}

/// Parses, builds the product and encodes it; no files are written.
pub fn encode(cfg: &RunConfig) -> Result<Encoded, PipelineError> {
    let program = parse(&cfg.source).map_err(at(Stage::Parse))?;
    let entries = cfg.entries.resolve(&program, cfg.property.k)?;
    if let RunMode::Baseline(b) = cfg.mode {
        let chc = encode_baseline(&program, &entries, &cfg.property, b).map_err(encode_err)?;
        return Ok(Encoded {
            system: None,
            product: None,
            sizes: Sizes {
                clauses: chc.num_clauses(),
                predicates: chc.num_preds(),
                ..Default::default()
            },
            chc,
            splits: None,
            products: Vec::new(),
            reduction: None,
            entries,
        });
    }
    let RunMode::Product(mode) = cfg.mode else { unreachable!() };
    let sys = copies_with_entries(&program, &entries).map_err(at(Stage::Parse))?;
    let text = cfg.reduction.clone().unwrap_or_else(|| default_reduction(cfg.property.k));
    let ev = product(&sys, &text, mode)?;
    let products: Vec<ProductRecord> = ev
        .stats
        .iter()
        .map(|s| ProductRecord {
            within_bound: s.product.within_bound(),
            stats: s.clone(),
        })
        .collect();
    let opts = EncodeOptions::default();
    let (chc, mut sizes, splits) = match &ev.product {
        Product::Automaton(a) => {
            let (chc, info) = encode_nwa(&sys, a, &cfg.property, &opts).map_err(encode_err)?;
            let sizes = Sizes {
                states: Some(a.num_states()),
                transitions: Some(a.num_transitions()),
                ..Default::default()
            };
            (chc, sizes, Some(info))
        }
        Product::Grammar(g) => {
            let chc = encode_vpg(&sys, g, &cfg.property, &opts).map_err(encode_err)?;
            let sizes = Sizes {
                nonterminals: Some(g.num_nts()),
                productions: Some(g.num_prods()),
                ..Default::default()
            };
            (chc, sizes, None)
        }
    };
    sizes.clauses = chc.num_clauses();
    sizes.predicates = chc.num_preds();
    Ok(Encoded {
        system: Some(sys),
        product: Some(ev.product),
        chc,
        sizes,
        splits,
        products,
        reduction: Some(text),
        entries,
    })
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|e| PipelineError::new(Stage::Io, format!("{}: {e}", path.display())))
}

/// The whole pipeline. Artifacts go to `emit_dir` when set (`product.txt`, `problem.smt2`,
/// `report.json`), otherwise the SMT-LIB file lives in a temporary directory.
pub fn run(cfg: &RunConfig) -> Result<Report, PipelineError> {
    let start = Instant::now();
    let enc = encode(cfg)?;
    let tmp;
    let dir: &Path = match &cfg.emit_dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(|e| PipelineError::new(Stage::Io, format!("{}: {e}", d.display())))?;
            d
        }
        None => {
            tmp = tempfile::tempdir().map_err(at(Stage::Io))?;
            tmp.path()
        }
    };
    let mut artifacts = Artifacts::default();
    if let (Some(p), Some(_)) = (&enc.product, &cfg.emit_dir) {
        let f = dir.join("product.txt");
        write(&f, &p.dump())?;
        artifacts.product = Some(f);
    }
    let smt = dir.join("problem.smt2");
    write(&smt, &enc.chc.to_smtlib())?;
    if cfg.emit_dir.is_some() {
        artifacts.smtlib = Some(smt.clone());
        artifacts.report = Some(dir.join("report.json"));
    }
    let solver = if cfg.solvers.is_empty() {
        None
    } else {
        Some(portfolio(&smt, &cfg.solvers, cfg.timeout).map_err(at(Stage::Solve))?)
    };
    let verdict = solver.as_ref().map_or(Verdict::Unknown, |r| Verdict::of(&r.status));
    let report = Report {
        schema: REPORT_SCHEMA,
        verdict,
        mode: cfg.mode.to_string(),
        reduction: enc.reduction,
        entries: enc.entries,
        sizes: enc.sizes,
        splits: enc.splits,
        products: enc.products,
        solver,
        wall_ms: start.elapsed().as_millis(),
        artifacts,
    };
    if let Some(f) = &report.artifacts.report {
        write(f, &report.to_json())?;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentIndependence {
    pub component: usize,
    pub entry: String,
    pub tail_independent: bool,
    pub head_independent: bool,
    pub tail_witness: Option<Vec<String>>,
    pub head_witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub schema: u32,
    pub sound: bool,
    pub direction: Direction,
    pub components: Vec<ComponentIndependence>,
}

impl IndependenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn letters(sys: &System, w: &[Sym]) -> Vec<String> {
    w.iter().map(|&s| sys.alphabet.name(s).to_string()).collect()
}

fn system_for(source: &str, entries: &Entries, k: usize) -> Result<System, PipelineError> {
    let p = parse(source).map_err(at(Stage::Parse))?;
    let names = entries.resolve(&p, k)?;
    copies_with_entries(&p, &names).map_err(at(Stage::Parse))
}

/// Independence verdicts for `k` components; with `k == 1` letters carry no copy suffix.
pub fn check_independence(source: &str, deps: &str, entries: &Entries, k: usize) -> Result<IndependenceReport, PipelineError> {
    let sys = if k <= 1 {
        let p = parse(source).map_err(at(Stage::Parse))?;
        let name = entries.resolve(&p, 1)?.remove(0);
        to_vpg(&p, &name).map_err(at(Stage::Parse))?
    } else {
        system_for(source, entries, k)?
    };
    let spec = IndependenceSpec::parse(deps, &sys.alphabet).map_err(at(Stage::Config))?;
    let parts: Vec<_> = sys.components.iter().map(|c| vpg_to_vpa(&c.grammar)).collect();
    let r = wn_shuffle_soundness_report(&parts, &spec).map_err(at(Stage::Config))?;
    let components = r
        .components
        .iter()
        .zip(&sys.components)
        .map(|(v, c)| ComponentIndependence {
            component: c.index,
            entry: c.entry.clone(),
            tail_independent: v.tail_witness.is_none(),
            head_independent: v.head_witness.is_none(),
            tail_witness: v.tail_witness.as_ref().map(|w| letters(&sys, w)),
            head_witness: v.head_witness.as_ref().map(|w| letters(&sys, w)),
        })
        .collect();
    Ok(IndependenceReport {
        schema: REPORT_SCHEMA,
        sound: r.sound,
        direction: r.direction,
        components,
    })
}

/// What to enumerate: a product under a reduction, or the plain well-nested shuffle.
#[derive(Clone, Debug)]
pub enum Language {
    Product { reduction: Option<String>, mode: Mode },
    Shuffle,
}

/// Words of length at most `max_len` over `k` copies, as letter names.
pub fn enumerate_words(
    source: &str,
    entries: &Entries,
    k: usize,
    lang: &Language,
    max_len: usize,
) -> Result<Vec<Vec<String>>, PipelineError> {
    if k == 0 {
        return Err(PipelineError::new(Stage::Config, "at least one copy is needed"));
    }
    let sys = system_for(source, entries, k)?;
    let words = match lang {
        Language::Shuffle => {
            let langs: Vec<_> = sys.components.iter().map(|c| c.grammar.enumerate(max_len)).collect();
            let groups: Vec<_> = sys.components.iter().map(|c| [c.index].into_iter().collect()).collect();
            wn_shuffle_words(&sys.alphabet, &langs, &groups, max_len, DEFAULT_CAP).map_err(at(Stage::Config))?
        }
        Language::Product { reduction, mode } => {
            let text = reduction.clone().unwrap_or_else(|| default_reduction(k));
            product(&sys, &text, *mode)?.product.enumerate(max_len)
        }
    };
    Ok(words.iter().map(|w| letters(&sys, w)).collect())
}

/// Textual dump of the product over `k` copies.
pub fn dump_product(source: &str, entries: &Entries, k: usize, reduction: Option<&str>, mode: Mode) -> Result<String, PipelineError> {
    let sys = system_for(source, entries, k)?;
    let text = reduction.map_or_else(|| default_reduction(k), str::to_string);
    Ok(product(&sys, &text, mode)?.product.dump())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::fixtures;

    fn cfg(prop: &str, mode: &str) -> RunConfig {
        let mut c = RunConfig::new(fixtures::DIV, HyperProperty::parse(prop).unwrap(), mode.parse().unwrap());
        c.solvers.clear();
        c
    }

    #[test]
    fn modes_parse() {
        assert_eq!("aut".parse::<RunMode>(), Ok(RunMode::Product(Mode::Aut)));
        assert_eq!("baseline:seq".parse::<RunMode>(), Ok(RunMode::Baseline(Baseline::SeqComposition)));
        assert!("baseline:nope".parse::<RunMode>().is_err());
        for m in ["aut", "vpg", "direct", "generic", "baseline:seq", "baseline:direct-nocopies", "baseline:direct-copies"] {
            assert_eq!(m.parse::<RunMode>().unwrap().to_string(), m);
        }
        assert_eq!(default_reduction(3), "(1,1,1)-lockstep(P1, P2, P3)");
        assert_eq!(default_reduction(1), "P1");
    }

    #[test]
    fn entries() {
        let mut c = cfg(fixtures::MONOTONICITY, "direct");
        c.entries.add("P2=div").unwrap();
        c.entries.add("1=div").unwrap();
        assert!(c.entries.add("Q=div").is_err());
        let e = encode(&c).unwrap();
        assert_eq!(e.entries, ["div", "div"]);
        c.entries.add("P3=div").unwrap();
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Config));
        let mut c = cfg(fixtures::MONOTONICITY, "direct");
        c.entries.add("nope").unwrap();
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Config));
    }

    #[test]
    fn stage_tags() {
        let mut c = cfg(fixtures::MONOTONICITY, "direct");
        c.reduction = Some("(1,1)-lockstep(P1,".into());
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Reduction));
        c.reduction = Some("(1,1)-lockstep(P1, P1)".into());
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Reduction));
        c.reduction = None;
        c.property = HyperProperty::parse("copies: 2\npost: (<= q_1 q_9)").unwrap();
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Property));
        c.source = "proc".into();
        assert_eq!(encode(&c).err().map(|e| e.stage), Some(Stage::Parse));
    }

    #[test]
    fn artifacts_are_deterministic() {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut outs = Vec::new();
        for d in &dirs {
            let mut c = cfg(fixtures::SCALING, "aut");
            c.reduction = Some("(2,1)-lockstep(P1, P2)".into());
            c.emit_dir = Some(d.path().to_path_buf());
            let r = run(&c).unwrap();
            assert_eq!(r.verdict, Verdict::Unknown);
            assert!(r.products.iter().all(|p| p.within_bound));
            assert!(r.sizes.states.is_some() && r.splits.is_some());
            let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("report.json")).unwrap()).unwrap();
            assert_eq!(json["schema"], 1);
            assert_eq!(json["verdict"], "unknown");
            outs.push((
                std::fs::read(d.path().join("product.txt")).unwrap(),
                std::fs::read(d.path().join("problem.smt2")).unwrap(),
            ));
        }
        assert_eq!(outs[0], outs[1]);
    }

    #[test]
    fn exclude_by_procedure_name() {
        let e = Entries::default();
        let by_proc = enumerate_words(fixtures::FGH, &e, 2, &Language::Product {
            reduction: Some("(1,1)-lockstep(P1, P2, exclude=[h_1, h_2])".into()),
            mode: Mode::Aut,
        }, 20).unwrap();
        let plain = enumerate_words(fixtures::FGH, &e, 2, &Language::Product {
            reduction: Some("(1,1)-lockstep(P1, P2)".into()),
            mode: Mode::Aut,
        }, 20).unwrap();
        assert!(!by_proc.is_empty());
        assert_ne!(by_proc, plain);
        let shuffle = enumerate_words(fixtures::FGH, &e, 2, &Language::Shuffle, 20).unwrap();
        assert!(by_proc.iter().all(|w| shuffle.contains(w)));
        let lang = Language::Product { reduction: Some("(1,1)-lockstep(P1, P2, exclude=[nope])".into()), mode: Mode::Aut };
        assert_eq!(enumerate_words(fixtures::FGH, &e, 2, &lang, 6).err().map(|e| e.stage), Some(Stage::Reduction));
    }

    #[test]
    fn baseline_reports_clause_counts() {
        let e = encode(&cfg(fixtures::SCALING, "baseline:seq")).unwrap();
        assert!(e.product.is_none() && e.reduction.is_none());
        assert_eq!(e.sizes.clauses, e.chc.num_clauses());
    }
}
