use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qldpc_core::bounds::{sweep_all, sweep_partitions, PartitionBoundReport};
use qldpc_core::code::{hgp, sample_regular_34, RegularSampler, DEFAULT_DISTANCE_CAP};
use qldpc_core::decoders::DecoderConfig;
use qldpc_core::memory::{run_memory_experiment, MemoryExperiment};
use qldpc_core::ratio::RationalJson;
use qldpc_core::sim::verify_measurement_circuit;
use qldpc_core::synth::fully_connected::fully_connected_depth_formula;
use qldpc_core::synth::hgp2d::{hgp_ancilla_formula, hgp_depth_formula};
use qldpc_core::synth::switch2d::{switch_ancilla_formula, switch_depth_formula};
use qldpc_core::synth::{synth_fully_connected, synth_hgp_2d, synth_switch_2d, SynthesisReport};
use qldpc_core::{ClassicalCode, CliffordCircuit, CssCode, QubitLayout, TannerGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

mod manifest;
use manifest::Manifest;

/// Exit code for a failed check.
const EXIT_CHECK: u8 = 1;
/// Exit code for bad usage or unreadable input.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qldpc", version, about = "Syndrome-extraction circuits for quantum LDPC codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, inspect or bound the parameters of a code.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Synthesize a syndrome-extraction circuit.
    Synth(SynthArgs),
    /// Run the four measurement-circuit checks.
    Verify(VerifyArgs),
    /// Sweep half-plane partitions and report the depth lower bound.
    Bound(BoundArgs),
    /// Memory experiments over a grid of physical error rates.
    Simulate(SimulateArgs),
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Build a code bundle from alist files, a sampler or a named code.
    Build(BuildArgs),
    /// Print generator statistics of a code bundle or alist file.
    Inspect { input: PathBuf },
    /// Print n, k and an upper bound on the distance.
    Params {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DISTANCE_CAP)]
        distance_cap: usize,
    },
}

#[derive(Args)]
struct BuildArgs {
    /// Hypergraph product of two classical codes given as alist files.
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with_all = ["regular34", "named"])]
    hgp: Option<Vec<PathBuf>>,
    /// Hypergraph product of a sampled (3,4)-regular code with itself.
    #[arg(long, value_name = "N", conflicts_with = "named")]
    regular34: Option<usize>,
    #[arg(long, value_enum)]
    named: Option<Named>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Named {
    Steane,
    Hgp13,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    FullyConnected,
    Switch2d,
    Hgp2d,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::FullyConnected => "fully-connected",
            Kind::Switch2d => "switch2d",
            Kind::Hgp2d => "hgp2d",
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Code bundle written by `code build`.
    #[arg(long)]
    code: PathBuf,
    /// Fold readout preparation and measurement into neighbouring rounds (hgp2d only).
    #[arg(long)]
    merged: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 64)]
    trials: usize,
    #[arg(long, default_value_t = 64)]
    errors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    /// Print every partition instead of only the strongest.
    #[arg(long)]
    all: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment file; command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Physical error rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    alternation_cap: Option<usize>,
    /// CSV output; stdout if omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Experiment file contents.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ExperimentSpec {
    code: Option<PathBuf>,
    circuit: Option<PathBuf>,
    p: Vec<f64>,
    rounds: Option<usize>,
    shots: Option<usize>,
    seed: Option<u64>,
    decoder: Option<DecoderConfig>,
}

/// A code with its classical factors when it is a hypergraph product.
#[derive(Serialize, Deserialize)]
struct CodeBundle {
    id: String,
    code: CssCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<(TannerGraph, TannerGraph)>,
    #[serde(default)]
    manifest_hash: String,
    #[serde(default)]
    manifest: Option<Manifest>,
}

#[derive(Serialize, Deserialize)]
struct CircuitBundle {
    kind: Kind,
    code_id: String,
    circuit: CliffordCircuit,
    report: SynthesisReport,
    manifest_hash: String,
    manifest: Manifest,
}

#[derive(Serialize)]
struct BoundJson {
    l_size: usize,
    n_cut: usize,
    boundary: usize,
    depth: usize,
    bound: RationalJson,
    holds: bool,
}

impl From<&PartitionBoundReport> for BoundJson {
    fn from(r: &PartitionBoundReport) -> Self {
        BoundJson { l_size: r.l.len(), n_cut: r.n_cut, boundary: r.boundary, depth: r.depth, bound: r.bound.into(), holds: r.holds() }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    code_id: &'a str,
    circuit_kind: &'a str,
    p: f64,
    #[serde(rename = "T")]
    rounds: usize,
    shots: usize,
    failures: usize,
    rate: f64,
    ci_lo: f64,
    ci_hi: f64,
    manifest_hash: &'a str,
}

/// Failure of a check, as opposed to bad input.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(c) = e.downcast_ref::<CheckFailed>() {
                eprintln!("check failed: {c}");
                ExitCode::from(EXIT_CHECK)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Code(CodeCmd::Build(a)) => cmd_build(a),
        Command::Code(CodeCmd::Inspect { input }) => cmd_inspect(&input),
        Command::Code(CodeCmd::Params { input, distance_cap }) => cmd_params(&input, distance_cap),
        Command::Synth(a) => cmd_synth(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_alist(path: &Path) -> Result<TannerGraph> {
    let text = read(path)?;
    TannerGraph::read_alist(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_code(path: &Path) -> Result<CodeBundle> {
    let text = read(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing code bundle {}", path.display()))
}

fn load_circuit(path: &Path) -> Result<CircuitBundle> {
    let text = read(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing circuit bundle {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let mut m = Manifest::new("code build");
    m.seed = Some(a.seed);
    let (id, code, factors) = if let Some(paths) = &a.hgp {
        let t1 = read_alist(&paths[0])?;
        let t2 = read_alist(&paths[1])?;
        for p in paths {
            m.input(p, &file_digest(p)?);
        }
        let id = format!("hgp({},{})", stem(&paths[0]), stem(&paths[1]));
        (id, hgp(&t1, &t2), Some((t1, t2)))
    } else if let Some(n) = a.regular34 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let c = sample_regular_34(n, RegularSampler::default(), &mut rng)?;
        let t = c.tanner();
        m.param("regular34", n);
        (format!("hgp34-n{n}-s{}", a.seed), hgp(&t, &t), Some((t.clone(), t)))
    } else {
        match a.named {
            Some(Named::Steane) => ("steane".to_string(), CssCode::steane(), None),
            Some(Named::Hgp13) => {
                let t = ClassicalCode::repetition(3).tanner();
                ("hgp13".to_string(), hgp(&t, &t), Some((t.clone(), t)))
            }
            None => bail!("one of --hgp, --regular34 or --named is required"),
        }
    };
    if let Err(v) = code.validate() {
        bail!("inputs do not form a CSS code: {v:?}");
    }
    let hash = m.hash();
    let bundle = CodeBundle { id, code, factors, manifest_hash: hash, manifest: Some(m) };
    eprintln!("built {}: n={} k={}", bundle.id, bundle.code.n, bundle.code.k());
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&bundle)?)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Code from a bundle, or the product of an alist code with itself for a raw alist file.
fn code_from_any(path: &Path) -> Result<CssCode> {
    let text = read(path)?;
    if text.trim().is_empty() {
        bail!("{}: empty file", path.display());
    }
    if text.trim_start().starts_with('{') {
        return Ok(load_code(path)?.code);
    }
    let t = TannerGraph::read_alist(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(hgp(&t, &t))
}

fn weight_stats(rows: &[usize]) -> String {
    match (rows.iter().min(), rows.iter().max()) {
        (Some(lo), Some(hi)) => format!("{} generators, weight {lo}..{hi}", rows.len()),
        _ => "0 generators".to_string(),
    }
}

fn cmd_inspect(path: &Path) -> Result<()> {
    let code = code_from_any(path)?;
    let wx: Vec<usize> = (0..code.hx.rows()).map(|r| code.hx.row_support(r).len()).collect();
    let wz: Vec<usize> = (0..code.hz.rows()).map(|r| code.hz.row_support(r).len()).collect();
    println!("n = {}", code.n);
    println!("k = {}", code.k());
    println!("X: {}", weight_stats(&wx));
    println!("Z: {}", weight_stats(&wz));
    println!("qubit degree: X {}, Z {}", code.tanner_x().degree(), code.tanner_z().degree());
    Ok(())
}

fn cmd_params(path: &Path, cap: usize) -> Result<()> {
    let code = code_from_any(path)?;
    let p = code.parameters(cap);
    let d = p.d_upper.map_or(format!("> {cap}"), |d| d.to_string());
    println!("n = {}\nk = {}\nd_upper = {d}", p.n, p.k);
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let bundle = load_code(&a.code)?;
    let code = &bundle.code;
    let mut m = Manifest::new("synth");
    m.input(&a.code, &file_digest(&a.code)?);
    m.param("kind", a.kind.name());
    m.param("merged", a.merged);
    if a.merged && a.kind != Kind::Hgp2d {
        bail!("--merged applies to hgp2d only");
    }
    let (circuit, report) = match a.kind {
        Kind::FullyConnected => {
            let c = synth_fully_connected(code);
            let r = SynthesisReport::new("fully-connected", &c, Some(code.hx.rows() + code.hz.rows()), Some(fully_connected_depth_formula(code)), None);
            (c, r)
        }
        Kind::Switch2d => {
            let (c, _) = synth_switch_2d(code)?;
            let r = SynthesisReport::new("switch2d", &c, Some(switch_ancilla_formula(code.n)), Some(switch_depth_formula(code)), Some(1));
            (c, r)
        }
        Kind::Hgp2d => {
            let Some((t1, t2)) = &bundle.factors else {
                bail!("hgp2d needs a hypergraph-product bundle with its classical factors");
            };
            let (built, c, _) = synth_hgp_2d(t1, t2, a.merged);
            if &built != code {
                bail!("bundle code differs from the product of its factors");
            }
            let depth = hgp_depth_formula(t1, t2, a.merged);
            let r = SynthesisReport::new("hgp2d", &c, Some(hgp_ancilla_formula(t1, t2)), Some(depth), Some(2));
            (c, r)
        }
    };
    eprintln!("{}", report.render());
    let hash = m.hash();
    let out = CircuitBundle { kind: a.kind, code_id: bundle.id, circuit, report, manifest_hash: hash, manifest: m };
    emit(a.out.as_deref(), &serde_json::to_string(&out)?)
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let code = load_code(&a.code)?.code;
    let cb = load_circuit(&a.circuit)?;
    let mut m = Manifest::new("verify");
    m.seed = Some(a.seed);
    m.input(&a.code, &file_digest(&a.code)?);
    m.input(&a.circuit, &file_digest(&a.circuit)?);
    let r = verify_measurement_circuit(&cb.circuit, &code.generators(), a.trials, a.errors, a.seed)?;
    for c in r.checks() {
        println!("{:<18} {:>5} cases {:>4} failures", c.name, c.cases, c.failures);
    }
    let hash = m.hash();
    let json = serde_json::json!({ "report": &r, "manifest_hash": hash, "manifest": m });
    if let Some(out) = &a.out {
        emit(Some(out), &serde_json::to_string_pretty(&json)?)?;
    }
    if r.passed() {
        Ok(())
    } else {
        let detail: Vec<String> = r
            .checks()
            .iter()
            .filter(|c| c.failures > 0)
            .map(|c| format!("{} ({}/{}: {})", c.name, c.failures, c.cases, c.first_failure.clone().unwrap_or_default()))
            .collect();
        Err(CheckFailed(detail.join("; ")).into())
    }
}

fn cmd_bound(a: BoundArgs) -> Result<()> {
    let code = load_code(&a.code)?.code;
    let cb = load_circuit(&a.circuit)?;
    let c = &cb.circuit;
    let mut m = Manifest::new("bound");
    m.input(&a.code, &file_digest(&a.code)?);
    m.input(&a.circuit, &file_digest(&a.circuit)?);
    let layout = c.layout.clone().unwrap_or_else(|| QubitLayout::line(c.n_qubits));
    let gens = code.generators();
    let best = sweep_partitions(c, &gens, &layout)?;
    println!("depth {} ; strongest partition: n_cut {} |dL| {} bound {} = {:.6}", best.depth, best.n_cut, best.boundary, best.bound, qldpc_core::ratio::to_f64(best.bound));
    let all: Vec<BoundJson> = if a.all { sweep_all(c, &gens, &layout)?.iter().map(BoundJson::from).collect() } else { Vec::new() };
    let violations = all.iter().filter(|r| !r.holds).count();
    let hash = m.hash();
    let json = serde_json::json!({
        "best": BoundJson::from(&best),
        "partitions": all,
        "manifest_hash": hash,
        "manifest": m,
    });
    if let Some(out) = &a.out {
        emit(Some(out), &serde_json::to_string_pretty(&json)?)?;
    }
    if !best.holds() || violations > 0 {
        return Err(CheckFailed(format!("depth {} is below the partition bound {}", best.depth, best.bound)).into());
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let mut spec = match &a.config {
        Some(p) => serde_json::from_str::<ExperimentSpec>(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => ExperimentSpec::default(),
    };
    if a.code.is_some() {
        spec.code = a.code.clone();
    }
    if a.circuit.is_some() {
        spec.circuit = a.circuit.clone();
    }
    if !a.p.is_empty() {
        spec.p = a.p.clone();
    }
    spec.rounds = a.rounds.or(spec.rounds);
    spec.shots = a.shots.or(spec.shots);
    spec.seed = a.seed.or(spec.seed);
    let mut cfg = spec.decoder.unwrap_or_default();
    if let Some(cap) = a.alternation_cap {
        cfg.alternation_cap = cap;
    }
    cfg.validate()?;
    let (Some(code_path), Some(circuit_path)) = (spec.code.clone(), spec.circuit.clone()) else {
        bail!("--code and --circuit (or a config naming them) are required");
    };
    if spec.p.is_empty() {
        bail!("at least one --p value is required");
    }
    if let Some(t) = a.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    let bundle = load_code(&code_path)?;
    let cb = load_circuit(&circuit_path)?;
    let rounds = spec.rounds.unwrap_or(1);
    let shots = spec.shots.unwrap_or(1000);
    let seed = spec.seed.unwrap_or(0);
    let mut m = Manifest::new("simulate");
    m.seed = Some(seed);
    m.input(&code_path, &file_digest(&code_path)?);
    m.input(&circuit_path, &file_digest(&circuit_path)?);
    m.param("p", &spec.p);
    m.param("rounds", rounds);
    m.param("shots", shots);
    m.param("decoder", &cfg);
    let hash = m.hash();
    // one generator per invocation hands out the per-point seeds
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = csv::Writer::from_writer(Vec::new());
    for &p in &spec.p {
        let e = MemoryExperiment { code: bundle.code.clone(), circuit: cb.circuit.clone(), p, rounds, shots, seed: rng.gen() };
        let f = run_memory_experiment(&e, &cfg)?;
        eprintln!("p={p:e}: {}/{} failures, per round {:.3e}", f.failures, f.shots, f.per_round_rate);
        w.serialize(CsvRow {
            code_id: &bundle.id,
            circuit_kind: cb.kind.name(),
            p,
            rounds,
            shots,
            failures: f.failures,
            rate: f.rate,
            ci_lo: f.ci_lo,
            ci_hi: f.ci_hi,
            manifest_hash: &hash,
        })?;
    }
    let text = String::from_utf8(w.into_inner()?)?;
    match &a.out {
        Some(out) => {
            std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
            let mpath = out.with_extension("manifest.json");
            std::fs::write(&mpath, serde_json::to_string_pretty(&m)?).with_context(|| format!("writing {}", mpath.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
