//! `poset-collapse` command-line front end.
//!
//! Exit codes: 0 success or verified, 1 searched-and-absent / evasive /
//! failed identity, 2 input error, 3 search budget exceeded.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use poset_collapse::enumerate::{complexes_on, default_labels, random_complex};
use poset_collapse::format::{ComplexFile, MapFile, PosetFile, ReportFile, SubsetFile};
use poset_collapse::{
    certificate_to_collapse, classify_ne_equivalence, common_expansion, crapo_check, crapo_route,
    hall_check, is_nonevasive, mobius_table, search_collapse, search_ne_reduction, theorem_reduce,
    verify_collapse, verify_ne_certificate, verify_witness, CollapseSearch, CollapseSequence,
    CollapseTarget, NeCertificate, Nonevasiveness, Poset, PosetMap, ReduceOptions,
    ReductionSearch, SearchBudget, SimplicialComplex, Witness,
};

const BUDGET_ENV: &str = "POSET_COLLAPSE_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "poset-collapse", version, about = "Nonevasive reductions and collapses of order complexes")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Largest complex (in vertices) a search will attempt.
    #[arg(long, global = true)]
    budget_vertices: Option<usize>,
    /// Search nodes expanded before giving up.
    #[arg(long, global = true)]
    budget_nodes: Option<u64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Print progress notes to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Order-preserving / monotone / increasing / decreasing flags of a map.
    ClassifyMap(PosetMapArgs),
    /// Split a monotone map into increasing ∘ decreasing.
    Decompose(PosetMapArgs),
    /// Maximal chains of a poset as a complex file.
    OrderComplex {
        #[arg(long)]
        poset: PathBuf,
    },
    /// f-vector, GF(2) Betti numbers and reduced Euler characteristic.
    Homology(ComplexSource),
    /// Decide nonevasiveness, printing a witness when found.
    Nonevasive {
        #[arg(long)]
        complex: PathBuf,
    },
    /// Check a nonevasiveness witness against a complex.
    VerifyWitness {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Search for an NE-reduction from one complex to another.
    NeSearch {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Replay an NE-reduction certificate.
    VerifyCertificate {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Certify Δ(P) ↘NE Δ(Q) along a monotone map.
    Reduce {
        #[command(flatten)]
        input: PosetMapArgs,
        /// `fix`, `image`, or a subset file `{"elements": [...]}`.
        #[arg(long)]
        sub: String,
        #[arg(long)]
        emit_collapse: bool,
    },
    /// `reduce --sub image`.
    ReduceToImage {
        #[command(flatten)]
        input: PosetMapArgs,
        #[arg(long)]
        emit_collapse: bool,
    },
    /// Compile an NE-reduction certificate (plain or inside a report) into
    /// elementary collapses.
    ToCollapse {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Replay a collapse sequence.
    VerifyCollapse {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        collapse: PathBuf,
    },
    /// Search for an elementary collapse sequence.
    CollapseSearch {
        #[arg(long)]
        complex: PathBuf,
        /// Target complex; any single vertex when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Full Möbius function table.
    Mobius {
        #[arg(long)]
        poset: PathBuf,
    },
    /// Compare μ(0̂, 1̂) with the reduced Euler characteristic of Δ(P̄).
    HallCheck {
        #[arg(long)]
        poset: PathBuf,
    },
    /// Closure identity for an increasing map and a subset Q.
    CrapoCheck {
        #[command(flatten)]
        input: PosetMapArgs,
        /// `fix` or a subset file.
        #[arg(long)]
        sub: String,
        /// Also recompute the intermediate quantities of the proof.
        #[arg(long)]
        route: bool,
    },
    /// Merge A ↘NE B ↗NE C into a common expansion D.
    CommonExpansion {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        c: PathBuf,
        #[arg(long)]
        cert_ab: PathBuf,
        #[arg(long)]
        cert_cb: PathBuf,
    },
    /// Explore ≃NE classes among small complexes.
    Enumerate {
        /// Vertices available to each complex.
        #[arg(long, default_value_t = 4)]
        vertices: usize,
        /// Random complexes to draw; every complex on the vertices when
        /// omitted (at most 3 vertices).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Facets drawn per random complex.
        #[arg(long, default_value_t = 3)]
        facets: usize,
    },
}

#[derive(Args, Debug)]
struct PosetMapArgs {
    #[arg(long)]
    poset: PathBuf,
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ComplexSource {
    #[arg(long)]
    complex: Option<PathBuf>,
    /// Use the order complex of this poset.
    #[arg(long)]
    poset: Option<PathBuf>,
}

/// Everything a subcommand needs besides its own arguments.
#[derive(Debug, Clone)]
struct RunConfig {
    budget: SearchBudget,
    output: Option<PathBuf>,
    verbose: bool,
}

/// A result document plus its exit status.
struct Report {
    body: Value,
    status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok = 0,
    Negative = 1,
    Input = 2,
    Budget = 3,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report { body, status: Status::Ok }
    }

    fn with(body: Value, status: Status) -> Self {
        Report { body, status }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Status::Input as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(Status::Input as u8)
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let config = run_config(&cli.run)?;
    let report = dispatch(cli.command, &config)?;
    let mut text = serde_json::to_string_pretty(&report.body)?;
    text.push('\n');
    match &config.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report.status)
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut budget = SearchBudget::default();
    if let Ok(raw) = std::env::var(BUDGET_ENV) {
        let (v, n) = raw
            .split_once(',')
            .ok_or_else(|| anyhow!("{BUDGET_ENV} must be `VERTICES,NODES`, got `{raw}`"))?;
        budget.max_vertices = v.trim().parse().with_context(|| format!("{BUDGET_ENV} vertices `{v}`"))?;
        budget.max_nodes = n.trim().parse().with_context(|| format!("{BUDGET_ENV} nodes `{n}`"))?;
    }
    if let Some(v) = args.budget_vertices {
        budget.max_vertices = v;
    }
    if let Some(n) = args.budget_nodes {
        budget.max_nodes = n;
    }
    let budget = SearchBudget::new(budget.max_vertices, budget.max_nodes)?;
    Ok(RunConfig {
        budget,
        output: args.output.clone(),
        verbose: args.verbose,
    })
}

fn note(config: &RunConfig, msg: impl FnOnce() -> String) {
    if config.verbose {
        eprintln!("{}", msg());
    }
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {what} file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{what} file {}", path.display()))
}

fn load_poset(path: &Path) -> Result<Arc<Poset>> {
    let file: PosetFile = read_json(path, "poset")?;
    let p = file.to_poset().with_context(|| format!("poset file {}", path.display()))?;
    Ok(Arc::new(p))
}

fn load_map(poset: &Arc<Poset>, path: &Path) -> Result<PosetMap> {
    let file: MapFile = read_json(path, "map")?;
    file.to_map(poset.clone())
        .with_context(|| format!("map file {}", path.display()))
}

fn load_complex(path: &Path) -> Result<SimplicialComplex> {
    let file: ComplexFile = read_json(path, "complex")?;
    file.to_complex()
        .with_context(|| format!("complex file {}", path.display()))
}

/// A bare certificate, or the `certificate` field of a reduction report.
fn load_certificate(path: &Path) -> Result<NeCertificate> {
    let value: Value = read_json(path, "certificate")?;
    let inner = match value.get("certificate") {
        Some(c) if value.get("removal_order").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).with_context(|| format!("certificate file {}", path.display()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn complex_json(x: &SimplicialComplex) -> Value {
    to_value(&ComplexFile::from(x))
}

enum SubsetChoice {
    Fix,
    Image,
    File(Vec<String>),
}

fn subset_choice(sub: &str, allow_image: bool) -> Result<SubsetChoice> {
    match sub {
        "fix" => Ok(SubsetChoice::Fix),
        "image" if allow_image => Ok(SubsetChoice::Image),
        "image" => bail!("`--sub image` is not available here"),
        path => {
            let file: SubsetFile = read_json(Path::new(path), "subset")?;
            Ok(SubsetChoice::File(file.elements.iter().map(|l| l.to_string()).collect()))
        }
    }
}

fn subset_names(phi: &PosetMap, choice: SubsetChoice) -> Vec<String> {
    match choice {
        SubsetChoice::Fix => phi.fixed_points().iter().map(|l| l.to_string()).collect(),
        SubsetChoice::Image => phi.image().iter().map(|l| l.to_string()).collect(),
        SubsetChoice::File(names) => names,
    }
}

fn map_json(m: &PosetMap) -> Value {
    to_value(&MapFile::from(m))
}

fn dispatch(command: Command, config: &RunConfig) -> Result<Report> {
    let budget = config.budget;
    Ok(match command {
        Command::ClassifyMap(args) => {
            let p = load_poset(&args.poset)?;
            let phi = load_map(&p, &args.map)?;
            let c = phi.class();
            Report::ok(json!({
                "order_preserving": c.order_preserving,
                "monotone": c.monotone,
                "increasing": c.increasing,
                "decreasing": c.decreasing,
                "order_violation": c.order_violation,
                "incomparable": c.incomparable,
            }))
        }
        Command::Decompose(args) => {
            let p = load_poset(&args.poset)?;
            let phi = load_map(&p, &args.map)?;
            let (alpha, beta) = phi.decompose_monotone()?;
            Report::ok(json!({ "alpha": map_json(&alpha), "beta": map_json(&beta) }))
        }
        Command::OrderComplex { poset } => {
            let p = load_poset(&poset)?;
            Report::ok(complex_json(&SimplicialComplex::order_complex(&p)?))
        }
        Command::Homology(source) => {
            let x = match (source.complex, source.poset) {
                (Some(c), _) => load_complex(&c)?,
                (None, Some(p)) => SimplicialComplex::order_complex(&*load_poset(&p)?)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let h = x.homology();
            Report::ok(json!({
                "f_vector": x.f_vector(),
                "betti": h.betti,
                "reduced_euler": h.reduced_euler,
            }))
        }
        Command::Nonevasive { complex } => {
            let x = load_complex(&complex)?;
            note(config, || format!("deciding a complex on {} vertices", x.vertex_count()));
            match is_nonevasive(&x, budget) {
                Nonevasiveness::Nonevasive(w) => {
                    Report::ok(json!({ "result": "nonevasive", "witness": to_value(&w) }))
                }
                Nonevasiveness::Evasive => Report::with(json!({ "result": "evasive" }), Status::Negative),
                Nonevasiveness::BudgetExceeded => {
                    Report::with(json!({ "result": "budget-exceeded" }), Status::Budget)
                }
            }
        }
        Command::VerifyWitness { complex, witness } => {
            let x = load_complex(&complex)?;
            let w: Witness = read_json(&witness, "witness")?;
            verdict(verify_witness(&x, &w))
        }
        Command::NeSearch { complex, target } => {
            let x = load_complex(&complex)?;
            let y = load_complex(&target)?;
            match search_ne_reduction(&x, &y, budget)? {
                ReductionSearch::Found(cert) => {
                    Report::ok(json!({ "result": "found", "certificate": to_value(&cert) }))
                }
                ReductionSearch::NotFound => Report::with(json!({ "result": "not-found" }), Status::Negative),
                ReductionSearch::BudgetExceeded => {
                    Report::with(json!({ "result": "budget-exceeded" }), Status::Budget)
                }
            }
        }
        Command::VerifyCertificate {
            complex,
            target,
            certificate,
        } => {
            let x = load_complex(&complex)?;
            let y = load_complex(&target)?;
            let cert = load_certificate(&certificate)?;
            verdict(verify_ne_certificate(&x, &y, &cert))
        }
        Command::Reduce {
            input,
            sub,
            emit_collapse,
        } => reduce(&input, subset_choice(&sub, true)?, emit_collapse, config)?,
        Command::ReduceToImage { input, emit_collapse } => {
            reduce(&input, SubsetChoice::Image, emit_collapse, config)?
        }
        Command::ToCollapse { complex, certificate } => {
            let x = load_complex(&complex)?;
            let cert = load_certificate(&certificate)?;
            let seq = certificate_to_collapse(&x, &cert)?;
            Report::ok(to_value(&seq))
        }
        Command::VerifyCollapse {
            complex,
            target,
            collapse,
        } => {
            let x = load_complex(&complex)?;
            let y = load_complex(&target)?;
            let value: Value = read_json(&collapse, "collapse")?;
            // Accept a bare sequence or a reduction report carrying one.
            let inner = match value.get("collapse") {
                Some(c) if value.get("removal_order").is_some() => c.clone(),
                _ => value,
            };
            let seq: CollapseSequence =
                serde_json::from_value(inner).with_context(|| format!("collapse file {}", collapse.display()))?;
            verdict(verify_collapse(&x, &y, &seq))
        }
        Command::CollapseSearch { complex, target } => {
            let x = load_complex(&complex)?;
            let goal = match target {
                Some(t) => CollapseTarget::Complex(load_complex(&t)?),
                None => CollapseTarget::AnyPoint,
            };
            match search_collapse(&x, &goal, budget) {
                CollapseSearch::Found(seq) => Report::ok(json!({ "result": "found", "collapse": to_value(&seq) })),
                CollapseSearch::NotFound => Report::with(json!({ "result": "not-found" }), Status::Negative),
                CollapseSearch::BudgetExceeded => {
                    Report::with(json!({ "result": "budget-exceeded" }), Status::Budget)
                }
            }
        }
        Command::Mobius { poset } => {
            let p = load_poset(&poset)?;
            Report::ok(to_value(&mobius_table(&p)))
        }
        Command::HallCheck { poset } => {
            let p = load_poset(&poset)?;
            let r = hall_check(&p)?;
            let status = if r.holds { Status::Ok } else { Status::Negative };
            Report::with(to_value(&r), status)
        }
        Command::CrapoCheck { input, sub, route } => {
            let p = load_poset(&input.poset)?;
            let phi = load_map(&p, &input.map)?;
            let q = subset_names(&phi, subset_choice(&sub, false)?);
            let report = crapo_check(&phi, &q)?;
            let mut body = to_value(&report);
            if route {
                let r = crapo_route(&phi, &q)?;
                body["route_consistent"] = json!(r.consistent(&report));
                body["route"] = to_value(&r);
            }
            let status = if report.equal { Status::Ok } else { Status::Negative };
            Report::with(body, status)
        }
        Command::CommonExpansion {
            a,
            b,
            c,
            cert_ab,
            cert_cb,
        } => {
            let (a, b, c) = (load_complex(&a)?, load_complex(&b)?, load_complex(&c)?);
            let ab = load_certificate(&cert_ab)?;
            let cb = load_certificate(&cert_cb)?;
            let d = common_expansion(&a, &b, &c, &ab, &cb)?;
            Report::ok(json!({
                "facets": d.complex.facets(),
                "to_a": to_value(&d.to_a),
                "to_c": to_value(&d.to_c),
            }))
        }
        Command::Enumerate {
            vertices,
            samples,
            seed,
            facets,
        } => enumerate(vertices, samples, seed, facets, config)?,
    })
}

fn verdict(valid: bool) -> Report {
    let status = if valid { Status::Ok } else { Status::Negative };
    Report::with(json!({ "valid": valid }), status)
}

fn reduce(input: &PosetMapArgs, choice: SubsetChoice, emit_collapse: bool, config: &RunConfig) -> Result<Report> {
    let p = load_poset(&input.poset)?;
    let phi = load_map(&p, &input.map)?;
    let q = subset_names(&phi, choice);
    note(config, || format!("reducing {} elements to {}", p.len(), q.len()));
    let report = theorem_reduce(&phi, &q, ReduceOptions { emit_collapse })?;
    Ok(Report::ok(to_value(&ReportFile::from(&report))))
}

fn enumerate(vertices: usize, samples: Option<usize>, seed: u64, facets: usize, config: &RunConfig) -> Result<Report> {
    if vertices == 0 {
        bail!("--vertices must be positive");
    }
    let family: Vec<SimplicialComplex> = match samples {
        None if vertices > 3 => bail!("exhaustive enumeration is limited to 3 vertices; pass --samples"),
        None => complexes_on(vertices),
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels = default_labels(vertices);
            (0..k).map(|_| random_complex(&mut rng, &labels, facets, 0.5)).collect()
        }
    };
    note(config, || format!("classifying {} complexes", family.len()));
    let classification = classify_ne_equivalence(&family, config.budget);
    Ok(Report::ok(json!({
        "seed": seed,
        "vertices": vertices,
        "complexes": family.iter().map(|x| x.facets()).collect::<Vec<_>>(),
        "classes": classification.classes,
        "pairs": to_value(&classification.pairs),
    })))
}
