//! JSON-reporting CLI over the commprob library.
//!
//! Every run prints a single JSON document whose first key is a manifest
//! echoing the subcommand, its flags, and SHA-256 digests of any input
//! files; reruns with identical inputs are byte-identical apart from the
//! elapsed-time fields. Exit codes: 0 success, 1 a mathematical
//! counterexample or property violation, 2 invalid input or usage. I/O
//! problems are never reported as 1.

use clap::{Args, Parser, Subcommand, ValueEnum};
use commprob::census::{self, CensusOptions};
use commprob::exact::rational::Rational;
use commprob::formula::{
    accumulation_witness, p_part_value, search_reciprocals, search_square_free, stem_p_part_value,
    PPartShape, SearchBounds, SearchReport, ShapeConstraints, StemShape,
};
use commprob::group::{FiniteGroup, GroupFile, NilpotencyClass};
use commprob::lift::{lift_ring_to_group, verify_lift};
use commprob::ring::{FiniteRing, RingFile};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "commprob", version, about = "Exact commuting probabilities")]
struct Cli {
    /// Worker threads; 1 reproduces parallel results exactly.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite rings given by moduli and structure constants.
    Ring {
        #[command(subcommand)]
        cmd: RingCmd,
    },
    /// Finite groups given by Cayley tables.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Build the circle group of the double null extension of a ring.
    Lift(LiftArgs),
    /// Class-two p-group probability values and searches over them.
    Formula {
        #[command(subcommand)]
        cmd: FormulaCmd,
    },
    /// Exhaustive ring enumeration at one order.
    Census {
        #[command(subcommand)]
        cmd: CensusCmd,
    },
}

#[derive(Subcommand)]
enum RingCmd {
    /// Commuting probability of a valid ring.
    Prob {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Validation report: well-definedness and associativity.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Brute,
    Fast,
    Both,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Fast => "fast",
            Method::Both => "both",
        }
    }
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Commuting probability, counted by conjugacy classes.
    Prob { file: PathBuf },
    /// Center, derived subgroup, nilpotency class, commutator pairing.
    Invariants { file: PathBuf },
    /// Compare the class-two probability identity against the count.
    FormulaCheck { file: PathBuf },
}

#[derive(Args)]
struct LiftArgs {
    ringfile: PathBuf,
    /// Where to write the resulting group table.
    #[arg(short, long)]
    output: PathBuf,
    /// Assert probability preservation and nilpotency class at most 2.
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand)]
enum FormulaCmd {
    /// (p^(e-f) + p^g - 1) / p^(e-f+g).
    Value {
        #[arg(short)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        f: u32,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        relax_center_index: bool,
    },
    /// The value with derived and center exponents identified.
    StemValue {
        #[arg(short)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        f: u32,
        #[arg(long)]
        relax_center_index: bool,
    },
    /// Products with square-free reduced denominator (expected none).
    SearchSquarefree(SearchArgs),
    /// Products equal to 1/n, n > 1 (expected none).
    SearchReciprocal(SearchArgs),
    /// A shape within epsilon of 1/p^g.
    Witness {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        g: u32,
        /// Rational like 1/1000.
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        relax_center_index: bool,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11,13")]
    primes: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    max_factors: usize,
    #[arg(long, default_value_t = 12)]
    max_exp: u32,
    #[arg(long)]
    relax_center_index: bool,
}

impl SearchArgs {
    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            primes: self.primes.clone(),
            max_factors: self.max_factors,
            max_exponent: self.max_exp,
            constraints: constraints(self.relax_center_index),
        }
    }

    fn flags(&self) -> BTreeMap<String, String> {
        let primes: Vec<String> = self.primes.iter().map(u64::to_string).collect();
        flag_map(&[
            ("primes", primes.join(",")),
            ("max_factors", self.max_factors.to_string()),
            ("max_exp", self.max_exp.to_string()),
            ("relax_center_index", self.relax_center_index.to_string()),
        ])
    }
}

#[derive(Subcommand)]
enum CensusCmd {
    Run {
        #[arg(long)]
        order: u64,
        /// One representative per isomorphism class.
        #[arg(long)]
        dedupe: bool,
        /// Flag noncommutative rings with square-free denominators.
        #[arg(long)]
        verify_conjecture: bool,
        /// Write every emitted ring as a file into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn constraints(relaxed: bool) -> ShapeConstraints {
    if relaxed {
        ShapeConstraints::relaxed()
    } else {
        ShapeConstraints::default()
    }
}

// ---------------------------------------------------------------------
// reporting plumbing

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

struct Outcome {
    subcommand: &'static str,
    flags: BTreeMap<String, String>,
    inputs: Vec<InputDigest>,
    payload: Map<String, Value>,
    exit: u8,
}

/// Invalid input or usage; exit code 2, message on stderr.
struct InputError(String);

type CmdResult = Result<Outcome, InputError>;

fn flag_map(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn payload_of<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("payloads are serializable") {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("value".to_string(), other);
            map
        }
    }
}

fn read_input(path: &Path, inputs: &mut Vec<InputDigest>) -> Result<Vec<u8>, InputError> {
    let bytes = std::fs::read(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    });
    Ok(bytes)
}

fn load_ring(path: &Path, inputs: &mut Vec<InputDigest>) -> Result<FiniteRing, InputError> {
    let bytes = read_input(path, inputs)?;
    let file: RingFile = serde_json::from_slice(&bytes)
        .map_err(|e| InputError(format!("{}: not a ring file: {e}", path.display())))?;
    FiniteRing::from_file(&file).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_valid_ring(path: &Path, inputs: &mut Vec<InputDigest>) -> Result<FiniteRing, InputError> {
    let ring = load_ring(path, inputs)?;
    ring.ensure_valid()
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok(ring)
}

fn load_group(path: &Path, inputs: &mut Vec<InputDigest>) -> Result<FiniteGroup, InputError> {
    let bytes = read_input(path, inputs)?;
    let file: GroupFile = serde_json::from_slice(&bytes)
        .map_err(|e| InputError(format!("{}: not a group file: {e}", path.display())))?;
    FiniteGroup::from_file(&file).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("global pool is configured once, before any parallel work");
    }
    let started = Instant::now();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            let report = assemble(&outcome, started.elapsed().as_millis() as u64);
            println!("{}", serde_json::to_string_pretty(&report).expect("report is serializable"));
            ExitCode::from(outcome.exit)
        }
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn assemble(outcome: &Outcome, elapsed_ms: u64) -> Value {
    let manifest = json!({
        "subcommand": outcome.subcommand,
        "flags": outcome.flags,
        "inputs": outcome.inputs,
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_ms": elapsed_ms,
    });
    let mut root = Map::new();
    root.insert("manifest".to_string(), manifest);
    for (key, value) in &outcome.payload {
        root.insert(key.clone(), value.clone());
    }
    Value::Object(root)
}

fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Ring { cmd } => match cmd {
            RingCmd::Prob { file, method } => ring_prob(file, *method),
            RingCmd::Check { file } => ring_check(file),
        },
        Command::Group { cmd } => match cmd {
            GroupCmd::Prob { file } => group_prob(file),
            GroupCmd::Invariants { file } => group_invariants(file),
            GroupCmd::FormulaCheck { file } => group_formula_check(file),
        },
        Command::Lift(args) => lift_command(args),
        Command::Formula { cmd } => match cmd {
            FormulaCmd::Value { p, e, f, g, relax_center_index } => {
                formula_value(*p, *e, *f, *g, *relax_center_index)
            }
            FormulaCmd::StemValue { p, e, f, relax_center_index } => {
                formula_stem_value(*p, *e, *f, *relax_center_index)
            }
            FormulaCmd::SearchSquarefree(args) => formula_search(args, SearchKind::SquareFree),
            FormulaCmd::SearchReciprocal(args) => formula_search(args, SearchKind::Reciprocal),
            FormulaCmd::Witness { p, g, epsilon, relax_center_index } => {
                formula_witness(*p, *g, epsilon, *relax_center_index)
            }
        },
        Command::Census { cmd } => match cmd {
            CensusCmd::Run { order, dedupe, verify_conjecture, dump } => {
                census_run(*order, *dedupe, *verify_conjecture, dump.as_deref())
            }
        },
    }
}

// ---------------------------------------------------------------------
// ring

#[derive(Serialize)]
struct RingProbPayload {
    order: u64,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    brute: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fast: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
    probability: Rational,
}

fn ring_prob(file: &Path, method: Method) -> CmdResult {
    let mut inputs = Vec::new();
    let ring = load_valid_ring(file, &mut inputs)?;
    let brute = |ring: &FiniteRing| {
        ring.commuting_probability_bruteforce()
            .map_err(|e| InputError(format!("{}: {e}", file.display())))
    };
    let (payload, exit) = match method {
        Method::Brute => {
            let value = brute(&ring)?;
            (
                RingProbPayload {
                    order: ring.order(),
                    method: method.name(),
                    brute: Some(value.clone()),
                    fast: None,
                    agree: None,
                    probability: value,
                },
                0,
            )
        }
        Method::Fast => {
            let value = ring.commuting_probability_fast();
            (
                RingProbPayload {
                    order: ring.order(),
                    method: method.name(),
                    brute: None,
                    fast: Some(value.clone()),
                    agree: None,
                    probability: value,
                },
                0,
            )
        }
        Method::Both => {
            let slow = brute(&ring)?;
            let fast = ring.commuting_probability_fast();
            let agree = slow == fast;
            (
                RingProbPayload {
                    order: ring.order(),
                    method: method.name(),
                    brute: Some(slow),
                    fast: Some(fast.clone()),
                    agree: Some(agree),
                    probability: fast,
                },
                // the two paths disagreeing is a genuine counterexample
                if agree { 0 } else { 1 },
            )
        }
    };
    Ok(Outcome {
        subcommand: "ring prob",
        flags: flag_map(&[("method", method.name().to_string())]),
        inputs,
        payload: payload_of(&payload),
        exit,
    })
}

fn ring_check(file: &Path) -> CmdResult {
    let mut inputs = Vec::new();
    let ring = load_ring(file, &mut inputs)?;
    let report = ring.validate();
    let valid = report.is_valid();
    let payload = json!({
        "order": ring.order(),
        "moduli": ring.moduli(),
        "valid": valid,
        "violations": report.violations,
    });
    Ok(Outcome {
        subcommand: "ring check",
        flags: BTreeMap::new(),
        inputs,
        payload: payload_of(&payload),
        exit: if valid { 0 } else { 2 },
    })
}

// ---------------------------------------------------------------------
// group

fn group_prob(file: &Path) -> CmdResult {
    let mut inputs = Vec::new();
    let group = load_group(file, &mut inputs)?;
    let payload = json!({
        "order": group.order(),
        "conjugacy_classes": group.conjugacy_class_count(),
        "probability": group.commuting_probability(),
    });
    Ok(Outcome {
        subcommand: "group prob",
        flags: BTreeMap::new(),
        inputs,
        payload: payload_of(&payload),
        exit: 0,
    })
}

fn group_invariants(file: &Path) -> CmdResult {
    let mut inputs = Vec::new();
    let group = load_group(file, &mut inputs)?;
    let invariants = group.isoclinism_invariants();
    Ok(Outcome {
        subcommand: "group invariants",
        flags: BTreeMap::new(),
        inputs,
        payload: payload_of(&invariants),
        exit: 0,
    })
}

fn group_formula_check(file: &Path) -> CmdResult {
    let mut inputs = Vec::new();
    let group = load_group(file, &mut inputs)?;
    let class = group.nilpotency_class();
    let check = group.check_nilpotent_formula();
    // The identity is promised only up to class two; a mismatch there
    // would be a counterexample, a mismatch elsewhere is expected.
    let applicable = matches!(class, NilpotencyClass::Nilpotent(c) if c <= 2);
    let exit = u8::from(applicable && !check.matches);
    let payload = json!({
        "order": group.order(),
        "nilpotency_class": class,
        "applicable": applicable,
        "formula_value": check.formula_value,
        "counted": check.counted,
        "matches": check.matches,
    });
    Ok(Outcome {
        subcommand: "group formula-check",
        flags: BTreeMap::new(),
        inputs,
        payload: payload_of(&payload),
        exit,
    })
}

// ---------------------------------------------------------------------
// lift

fn lift_command(args: &LiftArgs) -> CmdResult {
    let mut inputs = Vec::new();
    let ring = load_valid_ring(&args.ringfile, &mut inputs)?;
    let group = lift_ring_to_group(&ring)
        .map_err(|e| InputError(format!("{}: {e}", args.ringfile.display())))?;
    let group_file = group.to_file();
    let serialized =
        serde_json::to_string_pretty(&group_file).expect("group files are serializable");
    std::fs::write(&args.output, serialized)
        .map_err(|e| InputError(format!("cannot write {}: {e}", args.output.display())))?;
    let mut payload = Map::new();
    payload.insert("ring_order".to_string(), json!(ring.order()));
    payload.insert("group_order".to_string(), json!(group.order()));
    payload.insert("output".to_string(), json!(args.output.display().to_string()));
    let mut exit = 0;
    if args.verify {
        let verification = verify_lift(&ring, &group);
        if !(verification.probability_preserved && verification.class_as_expected) {
            exit = 1;
        }
        payload.insert("verification".to_string(), serde_json::to_value(&verification).unwrap());
    }
    Ok(Outcome {
        subcommand: "lift",
        flags: flag_map(&[
            ("output", args.output.display().to_string()),
            ("verify", args.verify.to_string()),
        ]),
        inputs,
        payload,
        exit,
    })
}

// ---------------------------------------------------------------------
// formula

fn formula_value(p: u64, e: u32, f: u32, g: u32, relaxed: bool) -> CmdResult {
    let shape = PPartShape { p, e, f, g };
    let value = p_part_value(&shape, &constraints(relaxed))
        .map_err(|e| InputError(e.to_string()))?;
    let payload = json!({ "shape": shape, "value": value });
    Ok(Outcome {
        subcommand: "formula value",
        flags: flag_map(&[
            ("p", p.to_string()),
            ("e", e.to_string()),
            ("f", f.to_string()),
            ("g", g.to_string()),
            ("relax_center_index", relaxed.to_string()),
        ]),
        inputs: Vec::new(),
        payload: payload_of(&payload),
        exit: 0,
    })
}

fn formula_stem_value(p: u64, e: u32, f: u32, relaxed: bool) -> CmdResult {
    let shape = StemShape { p, e, f };
    let value = stem_p_part_value(&shape, &constraints(relaxed))
        .map_err(|e| InputError(e.to_string()))?;
    let payload = json!({ "shape": shape, "value": value });
    Ok(Outcome {
        subcommand: "formula stem-value",
        flags: flag_map(&[
            ("p", p.to_string()),
            ("e", e.to_string()),
            ("f", f.to_string()),
            ("relax_center_index", relaxed.to_string()),
        ]),
        inputs: Vec::new(),
        payload: payload_of(&payload),
        exit: 0,
    })
}

enum SearchKind {
    SquareFree,
    Reciprocal,
}

fn formula_search(args: &SearchArgs, kind: SearchKind) -> CmdResult {
    let bounds = args.bounds();
    let (subcommand, report) = match kind {
        SearchKind::SquareFree => ("formula search-squarefree", search_square_free(&bounds)),
        SearchKind::Reciprocal => ("formula search-reciprocal", search_reciprocals(&bounds)),
    };
    let report = report.map_err(|e| InputError(e.to_string()))?;
    let exit = search_exit(&report);
    Ok(Outcome {
        subcommand,
        flags: args.flags(),
        inputs: Vec::new(),
        payload: payload_of(&report),
        exit,
    })
}

/// A hit is a counterexample to the conjecture the search probes.
fn search_exit(report: &SearchReport) -> u8 {
    u8::from(!report.hits.is_empty())
}

fn formula_witness(p: u64, g: u32, epsilon: &str, relaxed: bool) -> CmdResult {
    let eps: Rational = epsilon
        .parse()
        .map_err(|e| InputError(format!("--epsilon: {e}")))?;
    let witness = accumulation_witness(p, g, &eps, &constraints(relaxed))
        .map_err(|e| InputError(e.to_string()))?;
    let exit = u8::from(!witness.within);
    Ok(Outcome {
        subcommand: "formula witness",
        flags: flag_map(&[
            ("p", p.to_string()),
            ("g", g.to_string()),
            ("epsilon", epsilon.to_string()),
            ("relax_center_index", relaxed.to_string()),
        ]),
        inputs: Vec::new(),
        payload: payload_of(&witness),
        exit,
    })
}

// ---------------------------------------------------------------------
// census

fn census_run(order: u64, dedupe: bool, verify_conjecture: bool, dump: Option<&Path>) -> CmdResult {
    let options = CensusOptions { dedupe, ..CensusOptions::default() };
    let report = if verify_conjecture {
        census::verify_conjecture_on_corpus(order, &options)
    } else {
        census::collect_probabilities(order, &options)
    }
    .map_err(|e| InputError(e.to_string()))?;
    let mut payload = payload_of(&report);
    if let Some(dir) = dump {
        let outcome =
            census::enumerate_rings(order, &options).map_err(|e| InputError(e.to_string()))?;
        std::fs::create_dir_all(dir)
            .map_err(|e| InputError(format!("cannot create {}: {e}", dir.display())))?;
        for entry in &outcome.rings {
            let name: Vec<String> = entry.decomposition.iter().map(u64::to_string).collect();
            let path = dir.join(format!("ring_{}_{:04}.json", name.join("x"), entry.index));
            let serialized = serde_json::to_string_pretty(&entry.ring.to_file())
                .expect("ring files are serializable");
            std::fs::write(&path, serialized)
                .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
        }
        payload.insert("dumped".to_string(), json!(outcome.rings.len()));
        payload.insert("dump_dir".to_string(), json!(dir.display().to_string()));
    }
    let exit = u8::from(verify_conjecture && !report.violations.is_empty());
    let mut flags = flag_map(&[
        ("order", order.to_string()),
        ("dedupe", dedupe.to_string()),
        ("verify_conjecture", verify_conjecture.to_string()),
    ]);
    if let Some(dir) = dump {
        flags.insert("dump".to_string(), dir.display().to_string());
    }
    Ok(Outcome {
        subcommand: "census run",
        flags,
        inputs: Vec::new(),
        payload,
        exit,
    })
}
