//! `typlab`: typicality analyses on finite structures, (Q,<) and Cantor space.
//!
//! Every command prints one JSON report on stdout. Exit status is 0 on
//! success, 1 when `axioms` or `search` found a violation, 2 on any error.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use typicality::axioms::{check_axiom, check_majority_filter_closure, search_counterexample, Axiom, Bounds, Verdict};
use typicality::cantor::{
    approx_eq, capture_check, code_family, join, measure_of, member, project, schnorr_test_level, split,
    tailset_closure, CylinderFamily, EPStream, Word,
};
use typicality::dlo::{
    classify_property_dlo, dlo_enumeration_config, enumerate_dlo_properties, typical_elements_dlo, ParamConfig,
};
use typicality::engine::{classify_element, find_witness, typical_set, EnumerationConfig};
use typicality::family::StructureFamilySpec;
use typicality::model::{evaluate, extension, Element, FiniteStructure, Valuation};
use typicality::symmetry::{definable_closure, orbit_partition, stabilizer_group};
use typicality::syntax::parse_formula;
use typicality::{corpus, load_structure};

#[derive(Parser)]
#[command(name = "typlab", version, about = "Typicality laboratory")]
struct Cli {
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Reports are always JSON; accepted for compatibility.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StructureArg {
    /// Structure file, or `corpus:NAME` for a bundled one.
    #[arg(long, short = 's')]
    structure: String,
}

#[derive(Args)]
struct ParamsArg {
    /// Parameter tuple, e.g. `0,2`.
    #[arg(long, value_delimiter = ',')]
    params: Vec<Element>,
}

#[derive(Subcommand)]
enum Command {
    /// Truth value of a sentence or formula under an assignment.
    Eval {
        #[command(flatten)]
        structure: StructureArg,
        #[arg(long, short = 'f')]
        formula: String,
        /// `name=element`, repeatable.
        #[arg(long = "assign", short = 'a')]
        assign: Vec<String>,
    },
    /// Extension of a formula in one variable, with its majority verdict.
    Extension {
        #[command(flatten)]
        structure: StructureArg,
        #[arg(long, short = 'f')]
        formula: String,
        #[arg(long, default_value = "x")]
        var: String,
        #[arg(long = "assign", short = 'a')]
        assign: Vec<String>,
    },
    /// Orbits of the stabilizer of the parameters.
    Orbits {
        #[command(flatten)]
        structure: StructureArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Typical elements over the parameters, with orbit certificates.
    Typical {
        #[command(flatten)]
        structure: StructureArg,
        #[command(flatten)]
        params: ParamsArg,
    },
    /// Smallest minority formula containing a non-typical element.
    Witness {
        #[command(flatten)]
        structure: StructureArg,
        #[command(flatten)]
        params: ParamsArg,
        #[arg(long)]
        element: Element,
        #[arg(long, default_value_t = 9)]
        budget: usize,
        /// Variable pool size for the enumeration.
        #[arg(long)]
        variables: Option<usize>,
    },
    /// Check axioms T1..T6 on one structure.
    Axioms {
        #[command(flatten)]
        structure: StructureArg,
        /// Axioms to check; all of T1..T6 when omitted.
        #[arg(long = "axiom", value_delimiter = ',')]
        axioms: Vec<String>,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, default_value_t = 9)]
        budget: usize,
    },
    /// Search a structure family for the first counterexample to an axiom.
    Search {
        #[arg(long, default_value = "T5")]
        axiom: String,
        /// e.g. `graph@1..5`, `rel:E/2,P/1@1..3`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 3)]
        arity: usize,
        #[arg(long, default_value_t = 9)]
        budget: usize,
    },
    /// Intersection closure of majority sets, raw and definable.
    FilterClosure {
        #[command(flatten)]
        structure: StructureArg,
    },
    /// Typicality over (Q,<) with symbolic parameters.
    Dlo {
        /// Parameter order, e.g. `a1<a2`.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, short = 'f')]
        formula: Option<String>,
        #[arg(long)]
        typical_elements: bool,
        /// List every definable set of `x` up to the budget.
        #[arg(long)]
        enumerate: bool,
        #[arg(long, default_value_t = 9)]
        budget: usize,
    },
    /// Operations on eventually periodic streams.
    Cantor {
        #[command(subcommand)]
        op: CantorOp,
    },
    /// Levels of the explicit Schnorr test.
    Schnorr {
        #[arg(long)]
        level: usize,
        #[arg(long)]
        measure: bool,
        /// List the words of the level.
        #[arg(long)]
        words: bool,
        /// Check that `stream (+) empty` lies in every level up to `--level`.
        #[arg(long)]
        capture: Option<String>,
    },
}

#[derive(Subcommand)]
enum CantorOp {
    Join {
        a: String,
        b: String,
    },
    Split {
        x: String,
    },
    /// Code a family written as `{1,2};{};{0}`.
    Code {
        family: String,
    },
    Project {
        code: String,
        index: u64,
    },
    Approx {
        a: String,
        b: String,
    },
    Closure {
        streams: Vec<String>,
        #[arg(long, default_value_t = 3)]
        bound: usize,
    },
    Measure {
        words: Vec<String>,
    },
    Member {
        x: String,
        words: Vec<String>,
    },
}

struct Report {
    command: &'static str,
    inputs: Value,
    budgets: Value,
    results: Value,
    violations: Value,
    certificates: Value,
    exit: u8,
}

impl Report {
    fn new(command: &'static str, inputs: Value) -> Self {
        Report {
            command,
            inputs,
            budgets: json!({}),
            results: json!({}),
            violations: json!([]),
            certificates: json!({}),
            exit: 0,
        }
    }

    fn to_json(&self, elapsed_ms: f64) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": self.inputs,
            "budgets": self.budgets,
            "results": self.results,
            "violations": self.violations,
            "certificates": self.certificates,
            "timing": { "elapsed_ms": elapsed_ms },
        })
    }
}

fn load(arg: &str) -> Result<(String, FiniteStructure)> {
    if let Some(name) = arg.strip_prefix("corpus:") {
        let s = corpus::structure(name)
            .ok_or_else(|| anyhow!("no corpus structure `{name}`; have {:?}", corpus::names().collect::<Vec<_>>()))?;
        return Ok((arg.to_string(), s));
    }
    let path = Path::new(arg);
    if !path.exists() {
        // Bare corpus names such as `p3.struct` resolve to the bundled copy.
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if path.parent().is_none_or(|p| p.as_os_str().is_empty()) {
            if let Some(s) = corpus::structure(stem) {
                return Ok((format!("corpus:{stem}"), s));
            }
        }
        bail!("structure file `{arg}` not found");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
    let s = load_structure(&text).with_context(|| format!("in {arg}"))?;
    Ok((arg.to_string(), s))
}

fn valuation(assign: &[String], s: &FiniteStructure) -> Result<Valuation> {
    let mut v = Valuation::new();
    for a in assign {
        let (name, value) = a.split_once('=').ok_or_else(|| anyhow!("expected name=element, got `{a}`"))?;
        let e: Element = value.trim().parse().with_context(|| format!("element in `{a}`"))?;
        if e >= s.size() {
            bail!("element {e} outside universe of size {}", s.size());
        }
        v.set(name.trim(), e);
    }
    Ok(v)
}

fn stream(text: &str) -> Result<EPStream> {
    text.parse().map_err(|e| anyhow!("stream `{text}`: {e}"))
}

fn words(texts: &[String]) -> Result<CylinderFamily> {
    let ws = texts.iter().map(|w| w.parse::<Word>()).collect::<Result<Vec<_>, _>>()?;
    Ok(CylinderFamily::new(ws))
}

fn number_set(text: &str) -> Result<BTreeSet<u64>> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| anyhow!("expected `{{...}}`, got `{text}`"))?;
    inner
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("in `{text}`")))
        .collect()
}

fn structure_inputs(name: &str, s: &FiniteStructure) -> Value {
    json!({ "structure": name, "size": s.size() })
}

fn run(cmd: Command) -> Result<Report> {
    Ok(match cmd {
        Command::Eval { structure, formula, assign } => {
            let (name, s) = load(&structure.structure)?;
            let phi = parse_formula(&formula, s.signature())?;
            let v = valuation(&assign, &s)?;
            let value = evaluate(&s, &phi, &v)?;
            let mut r = Report::new("eval", json!({ "structure": name, "formula": phi.render(), "assign": assign }));
            r.results = json!({ "value": value });
            r
        }
        Command::Extension { structure, formula, var, assign } => {
            let (name, s) = load(&structure.structure)?;
            let phi = parse_formula(&formula, s.signature())?;
            let v = valuation(&assign, &s)?;
            let ext = extension(&s, &phi, &var, &v)?;
            let mut r = Report::new(
                "extension",
                json!({ "structure": name, "formula": phi.render(), "var": var, "assign": assign }),
            );
            r.results = json!({
                "extension": ext,
                "complement_size": s.size() - ext.len(),
                "majority": 2 * ext.len() > s.size(),
            });
            r
        }
        Command::Orbits { structure, params } => {
            let (name, s) = load(&structure.structure)?;
            let orbits = orbit_partition(&s, &params.params)?;
            let group = stabilizer_group(&s, &params.params)?;
            let mut r = Report::new("orbits", json!({ "structure": name, "params": params.params }));
            r.results = json!({
                "orbits": orbits.blocks,
                "definable_closure": definable_closure(&s, &params.params)?,
            });
            r.certificates = json!({ "group_order": group.order(), "complete": group.complete });
            r
        }
        Command::Typical { structure, params } => {
            let (name, s) = load(&structure.structure)?;
            let set = typical_set(&s, &params.params)?;
            let verdicts =
                s.universe().map(|a| classify_element(&s, a, &params.params)).collect::<Result<Vec<_>, _>>()?;
            let mut r = Report::new("typical", json!({ "structure": name, "params": params.params }));
            r.results = json!({ "typical_set": set, "size": s.size() });
            r.certificates = json!({ "elements": verdicts });
            r
        }
        Command::Witness { structure, params, element, budget, variables } => {
            let (name, s) = load(&structure.structure)?;
            let default_vars = if params.params.is_empty() { EnumerationConfig::default().variables } else { 2 };
            let config =
                EnumerationConfig { budget, variables: variables.unwrap_or(default_vars), ..Default::default() };
            let verdict = classify_element(&s, element, &params.params)?;
            let witness = find_witness(&s, element, &params.params, config)?;
            let mut r =
                Report::new("witness", json!({ "structure": name, "params": params.params, "element": element }));
            r.budgets = json!(config);
            r.results = json!({ "typical": verdict.typical, "witness": witness });
            r.certificates = json!({ "orbit": verdict.certificate });
            r
        }
        Command::Axioms { structure, axioms, arity, budget } => {
            let (name, s) = load(&structure.structure)?;
            let list: Vec<Axiom> = if axioms.is_empty() {
                Axiom::CHECKABLE.to_vec()
            } else {
                axioms.iter().map(|a| a.parse()).collect::<Result<_, _>>()?
            };
            let bounds = Bounds { arity, budget };
            let mut reports = Vec::new();
            for axiom in &list {
                if *axiom == Axiom::Filter {
                    bail!("use `filter-closure` for the filter check");
                }
                reports.push(check_axiom(*axiom, &s, bounds)?.named(&name));
            }
            let mut r = Report::new("axioms", json!({ "structure": name, "axioms": list }));
            r.budgets = json!(bounds);
            r.violations = json!(reports
                .iter()
                .flat_map(|rep| rep.violations.iter().map(move |v| json!({ "axiom": rep.axiom, "violation": v })))
                .collect::<Vec<_>>());
            r.results = json!({ "reports": reports });
            if reports.iter().any(|rep| rep.verdict == Verdict::Fails) {
                r.exit = 1;
            }
            r
        }
        Command::Search { axiom, family, arity, budget } => {
            let axiom: Axiom = axiom.parse()?;
            let spec: StructureFamilySpec = family.parse()?;
            let bounds = Bounds { arity, budget };
            let out = search_counterexample(axiom, &spec, bounds)?;
            let mut r = Report::new("search", json!({ "axiom": axiom, "family": spec.to_string() }));
            r.budgets = json!(bounds);
            r.results = json!({
                "verdict": if out.witness.is_some() { "counterexample" } else { "none up to bound" },
                "witness": out.witness,
            });
            if let Some(w) = &out.witness {
                r.violations = json!([w.violation]);
                r.exit = 1;
            }
            r.certificates = json!(out.certificate);
            r
        }
        Command::FilterClosure { structure } => {
            let (name, s) = load(&structure.structure)?;
            let rep = check_majority_filter_closure(&s)?;
            let mut r = Report::new("filter-closure", structure_inputs(&name, &s));
            r.violations = json!(rep.raw.violations.iter().chain(&rep.definable.violations).collect::<Vec<_>>());
            r.results = json!({ "raw": rep.raw, "definable": rep.definable });
            r
        }
        Command::Dlo { params, formula, typical_elements, enumerate, budget } => {
            let cfg: ParamConfig = params.parse()?;
            let mut r = Report::new("dlo", json!({ "params": cfg, "formula": formula }));
            let mut results = serde_json::Map::new();
            if let Some(text) = &formula {
                let phi = cfg.parse_formula(text)?;
                results.insert("classification".into(), json!(classify_property_dlo(&phi, &cfg)?));
            }
            if typical_elements {
                let t = typical_elements_dlo(&cfg)?;
                results.insert("typical_elements".into(), json!({ "pieces": t, "rendered": t.to_string() }));
            }
            if enumerate {
                let config = dlo_enumeration_config(budget);
                r.budgets = json!(config);
                let props = enumerate_dlo_properties(&cfg, config)?;
                let rows: Vec<Value> = props
                    .iter()
                    .map(|(set, phi)| {
                        let c = classify_property_dlo(phi, &cfg)?;
                        Ok(json!({ "extension": set.to_string(), "formula": phi.render(), "typical": c.typical }))
                    })
                    .collect::<Result<_>>()?;
                results.insert("properties".into(), json!(rows));
            }
            if results.is_empty() {
                bail!("dlo: give --formula, --typical-elements or --enumerate");
            }
            r.results = Value::Object(results);
            r
        }
        Command::Cantor { op } => cantor(op)?,
        Command::Schnorr { level, measure, words, capture } => {
            let fam = schnorr_test_level(level)?;
            let mut r = Report::new("schnorr", json!({ "level": level, "capture": capture }));
            let mut results = serde_json::Map::new();
            results.insert("word_count".into(), json!(fam.len()));
            results.insert("word_length".into(), json!(2 * level + 2));
            if measure {
                let m = measure_of(&fam);
                results.insert("measure".into(), json!(m.to_string()));
                results.insert("measure_power".into(), json!(m.power_form()));
            }
            if words {
                results.insert("words".into(), json!(fam));
            }
            if let Some(text) = &capture {
                results.insert("captured".into(), json!(capture_check(&stream(text)?, level)?));
            }
            r.results = Value::Object(results);
            r
        }
    })
}

fn cantor(op: CantorOp) -> Result<Report> {
    Ok(match op {
        CantorOp::Join { a, b } => {
            let (x, y) = (stream(&a)?, stream(&b)?);
            let c = join(&x, &y);
            let mut r = Report::new("cantor join", json!({ "a": x, "b": y }));
            r.results = json!({ "join": c, "finite_set": c.to_finite_set() });
            r
        }
        CantorOp::Split { x } => {
            let x = stream(&x)?;
            let (a, b) = split(&x);
            let mut r = Report::new("cantor split", json!({ "x": x }));
            r.results = json!({ "even": a, "odd": b });
            r
        }
        CantorOp::Code { family } => {
            let sets = family.split(';').map(number_set).collect::<Result<Vec<_>>>()?;
            let mut r = Report::new("cantor code", json!({ "family": sets }));
            r.results = json!({ "code": code_family(&sets) });
            r
        }
        CantorOp::Project { code, index } => {
            let c = number_set(&code)?;
            let mut r = Report::new("cantor project", json!({ "code": c, "index": index }));
            r.results = json!({ "projection": project(&c, index) });
            r
        }
        CantorOp::Approx { a, b } => {
            let (x, y) = (stream(&a)?, stream(&b)?);
            let mut r = Report::new("cantor approx", json!({ "a": x, "b": y }));
            r.results = json!({ "approx_eq": approx_eq(&x, &y), "difference": x.symmetric_difference(&y) });
            r
        }
        CantorOp::Closure { streams, bound } => {
            let xs = streams.iter().map(|s| stream(s)).collect::<Result<Vec<_>>>()?;
            if bound > typicality::cantor::MAX_CLOSURE_BOUND {
                bail!("closure bound above {}", typicality::cantor::MAX_CLOSURE_BOUND);
            }
            let closure = tailset_closure(&xs, bound);
            let mut r = Report::new("cantor closure", json!({ "streams": xs }));
            r.budgets = json!({ "bound": bound });
            r.results = json!({ "size": closure.len(), "closure": closure });
            r
        }
        CantorOp::Measure { words: ws } => {
            let fam = words(&ws)?;
            let m = fam.measure();
            let mut r = Report::new("cantor measure", json!({ "words": ws }));
            r.results = json!({ "canonical": fam, "measure": m.to_string(), "measure_power": m.power_form() });
            r
        }
        CantorOp::Member { x, words: ws } => {
            let (x, fam) = (stream(&x)?, words(&ws)?);
            let mut r = Report::new("cantor member", json!({ "x": x, "words": ws }));
            r.results = json!({ "member": member(&x, &fam) });
            r
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    match run(cli.command) {
        Ok(report) => {
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let text = serde_json::to_string_pretty(&report.to_json(elapsed)).expect("report serializes");
            // A closed pipe is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(report.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
