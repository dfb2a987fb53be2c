//! Command-line front end. Every subcommand writes JSON (CSV for `sweep`) to
//! `--out` or stdout; failures print `{"error":{"kind","detail"}}`.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{QqbfError, Result};
use crate::json;
use crate::multifunc::{self, Contraction};
use crate::policy::NumericPolicy;
use crate::poly::{ExtendedComplex, MultiRationalFn};
use crate::prob::{self, EnsembleKind};
use crate::sim;
use crate::synth::{self, QqbfCircuit, SynthOptions};

#[derive(Parser, Debug)]
#[command(name = "qqbf", version, about = "Quantum-to-quantum Bernoulli factory synthesis and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol_coprime: Option<f64>,
    #[arg(long, global = true)]
    pub tol_orthonormality: Option<f64>,
    #[arg(long, global = true)]
    pub tol_residual: Option<f64>,
    #[arg(long, global = true)]
    pub tol_pivot: Option<f64>,
    #[arg(long, global = true)]
    pub tol_compat: Option<f64>,
    #[arg(long, global = true)]
    pub tol_verify_prob: Option<f64>,
    #[arg(long, global = true)]
    pub tol_fidelity: Option<f64>,
    #[arg(long, global = true)]
    pub tol_contraction: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize the circuit for a rational function.
    Synth(SynthArgs),
    /// Simulate a circuit at one input point.
    Run(PointArgs),
    /// Draw measurement shots at one input point.
    Sample(SampleArgs),
    /// Check a circuit against its function on a grid of points.
    Verify(VerifyArgs),
    /// Success probability at a point, or its ensemble mean.
    Prob(ProbArgs),
    /// Ensemble mean of lambda*f over a parameter grid and several n (CSV).
    Sweep(SweepArgs),
    /// Compatibility of g1 with g0.
    Compat(PairArgs),
    /// Two-function circuit (priority construction or dilation).
    Multifunc(MultifuncArgs),
    /// Unitary dilation of a contraction.
    Dilate(DilateArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Function JSON, `@path`, or `-` for stdin.
    #[arg(long = "fn")]
    pub function: String,
    /// Coin counts per variable, e.g. `2,1`.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Ancilla count override.
    #[arg(long)]
    pub m: Option<usize>,
}

/// A circuit either read from `--circuit` or synthesized from `--fn`.
#[derive(Args, Debug)]
pub struct CircuitSource {
    /// Circuit JSON as produced by `synth`, `@path`, or `-` for stdin.
    #[arg(long, conflicts_with = "function")]
    pub circuit: Option<String>,
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug)]
pub struct PointArgs {
    #[command(flatten)]
    pub source: CircuitSource,
    /// One value per variable, e.g. `1+2i,inf`.
    #[arg(long)]
    pub z: String,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 1000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: CircuitSource,
    /// Target function when it differs from the circuit's own.
    #[arg(long)]
    pub target: Option<String>,
    /// Points separated by `;`, variables by `,`. Random points when absent.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Uniform,
    Covariant,
}

#[derive(Args, Debug)]
pub struct ProbArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, required_unless_present = "ensemble")]
    pub z: Option<String>,
    #[arg(long, conflicts_with = "z")]
    pub ensemble: Option<EnsembleArg>,
    /// Ancilla-branch weight; 0 is optimal.
    #[arg(long, default_value_t = 0.0)]
    pub w: f64,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Base function f; the family is lambda*f. Defaults to z^2.
    #[arg(long = "fn")]
    pub function: Option<String>,
    /// Comma list, or `log:lo:hi:count`.
    #[arg(long, default_value = "log:0.1:10:21")]
    pub params: String,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = EnsembleArg::Uniform)]
    pub ensemble: EnsembleArg,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub g0: String,
    #[arg(long)]
    pub g1: String,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct MultifuncArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Use the dilation construction (works for incompatible pairs).
    #[arg(long)]
    pub dilation: bool,
    /// Dilation scale r >= 1.
    #[arg(long, default_value_t = 1.0, requires = "dilation")]
    pub scale: f64,
    /// Also simulate both branches at this point.
    #[arg(long)]
    pub z: Option<String>,
}

#[derive(Args, Debug)]
pub struct DilateArgs {
    /// Matrix as nested `[re, im]` rows, `@path`, or `-`.
    #[arg(long)]
    pub matrix: String,
}

enum Output {
    Json(Value),
    Text(String),
}

fn read_source(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| QqbfError::Parse(format!("stdin: {e}")))?;
        Ok(s)
    } else if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| QqbfError::Parse(format!("{path}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

pub fn parse_point(s: &str) -> Result<Vec<ExtendedComplex>> {
    s.split(',').map(str::parse).collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<Vec<ExtendedComplex>>> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_point).collect()
}

/// `a,b,c` or `log:lo:hi:count`.
pub fn parse_params(s: &str) -> Result<Vec<f64>> {
    let bad = || QqbfError::Parse(format!("cannot parse parameter list {s:?}"));
    if let Some(rest) = s.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && count >= 1) {
            return Err(QqbfError::Domain(format!("log grid needs 0 < lo <= hi and count >= 1, got {s:?}")));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        return Ok((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect());
    }
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn policy(common: &Common) -> Result<NumericPolicy> {
    let mut p = NumericPolicy::from_env()?;
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut p.coprime, common.tol_coprime);
    set(&mut p.orthonormality, common.tol_orthonormality);
    set(&mut p.residual, common.tol_residual);
    set(&mut p.pivot, common.tol_pivot);
    set(&mut p.compat, common.tol_compat);
    set(&mut p.verify_prob, common.tol_verify_prob);
    set(&mut p.fidelity, common.tol_fidelity);
    set(&mut p.contraction, common.tol_contraction);
    p.validate()?;
    Ok(p)
}

fn load_function(arg: &str, policy: &NumericPolicy) -> Result<MultiRationalFn> {
    json::parse_function(&read_source(arg)?, policy.coprime)
}

fn resolve_ns(f: &MultiRationalFn, n: &Option<Vec<usize>>) -> Vec<usize> {
    n.clone().unwrap_or_else(|| f.degrees())
}

fn load_circuit(src: &CircuitSource, policy: &NumericPolicy) -> Result<QqbfCircuit> {
    match (&src.circuit, &src.function) {
        (Some(c), _) => json::parse_circuit(&read_source(c)?, policy),
        (None, Some(f)) => {
            let f = load_function(f, policy)?;
            let opts = SynthOptions { ns: src.n.clone(), m: src.m, policy: policy.clone() };
            synth::synthesize_with(&f, &opts)
        }
        (None, None) => Err(QqbfError::Domain("one of --circuit or --fn is required".into())),
    }
}

fn random_grid(k: usize, count: usize, seed: u64) -> Vec<Vec<ExtendedComplex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..k)
                .map(|_| ExtendedComplex::Finite(Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))))
                .collect()
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<Output> {
    let policy = policy(&cli.common)?;
    match &cli.command {
        Command::Synth(a) => {
            let f = load_function(&a.function, &policy)?;
            let opts = SynthOptions { ns: a.n.clone(), m: a.m, policy };
            let c = synth::synthesize_with(&f, &opts)?;
            Ok(Output::Json(serde_json::to_value(json::circuit_to_json(&c)).expect("serializable")))
        }
        Command::Run(a) => {
            let c = load_circuit(&a.source, &policy)?;
            let r = sim::run(&c, &parse_point(&a.z)?)?;
            Ok(Output::Json(json::simulation_to_json(&r)))
        }
        Command::Sample(a) => {
            let c = load_circuit(&a.point.source, &policy)?;
            let r = sim::sample(&c, &parse_point(&a.point.z)?, a.shots, a.seed)?;
            Ok(Output::Json(json::sample_to_json(&r)))
        }
        Command::Verify(a) => {
            let c = load_circuit(&a.source, &policy)?;
            let target = match &a.target {
                Some(t) => load_function(t, &policy)?,
                None => c.function.clone(),
            };
            let grid = match &a.grid {
                Some(g) => parse_grid(g)?,
                None => random_grid(c.k(), a.points, a.seed),
            };
            let r = sim::verify_with(&c, &target, &grid, &policy)?;
            Ok(Output::Json(json::verify_to_json(&r)))
        }
        Command::Prob(a) => {
            let f = load_function(&a.function, &policy)?;
            let ns = resolve_ns(&f, &a.n);
            match (&a.ensemble, &a.z) {
                (Some(e), _) => {
                    if a.w != 0.0 {
                        return Err(QqbfError::Unsupported("ensemble means are for w = 0".into()));
                    }
                    if ns.len() != 1 {
                        return Err(QqbfError::Unsupported("ensemble means need a univariate function".into()));
                    }
                    let kind = ensemble_kind(*e);
                    let mean = prob::ensemble_mean(&f, ns[0], &kind)?;
                    Ok(Output::Json(json!({ "ensemble": kind.tag(), "n": ns[0], "mean_prob": mean })))
                }
                (None, Some(z)) => {
                    let zs = parse_point(z)?;
                    let p = prob::success_probability_w(&f, &ns, &zs, a.w)?;
                    Ok(Output::Json(json!({
                        "z": zs.iter().map(json::ext_to_value).collect::<Vec<_>>(),
                        "ns": ns, "w": a.w, "success_prob": p,
                    })))
                }
                (None, None) => Err(QqbfError::Domain("one of --z or --ensemble is required".into())),
            }
        }
        Command::Sweep(a) => {
            let base = match &a.function {
                Some(t) => load_function(t, &policy)?,
                None => json::parse_function(r#"{"P":{"coeffs":[[0,0],[0,0],[1,0]]},"Q":{"coeffs":[[1,0]]}}"#, policy.coprime)?,
            };
            if base.k() != 1 {
                return Err(QqbfError::Unsupported("sweep needs a univariate function".into()));
            }
            let params = parse_params(&a.params)?;
            let family =
                |lambda: f64| MultiRationalFn::new(base.p().scale(Complex64::new(lambda, 0.0)), base.q().clone());
            let rows = prob::sweep(family, &params, &a.n, &ensemble_kind(a.ensemble))?;
            Ok(Output::Text(prob::sweep_csv(&rows)))
        }
        Command::Compat(a) => {
            let (g0, g1, ns) = load_pair(a, &policy)?;
            let r = multifunc::compatibility_with(&g0, &g1, &ns, &policy)?;
            Ok(Output::Json(json::compatibility_to_json(&r)))
        }
        Command::Multifunc(a) => {
            let (g0, g1, ns) = load_pair(&a.pair, &policy)?;
            let c = if a.dilation {
                multifunc::synthesize_dilation_with(&g0, &g1, &ns, a.scale, &policy)?
            } else {
                multifunc::synthesize_priority_with(&g0, &g1, &ns, &policy)?
            };
            let mut v = json::multifunctional_to_json(&c);
            if let Some(z) = &a.z {
                let (r0, r1) = sim::run_multifunctional(&c, &parse_point(z)?)?;
                v["branches"] = json!([json::simulation_to_json(&r0), json::simulation_to_json(&r1)]);
            }
            Ok(Output::Json(v))
        }
        Command::Dilate(a) => {
            let m = json::parse_matrix(&read_source(&a.matrix)?)?;
            let c = Contraction::with_tolerance(m, policy.contraction)?;
            let u = multifunc::dilation_unitary(&c)?;
            Ok(Output::Json(json::unitary_to_json(&u)))
        }
    }
}

fn ensemble_kind(e: EnsembleArg) -> EnsembleKind {
    match e {
        EnsembleArg::Uniform => EnsembleKind::UniformBloch,
        EnsembleArg::Covariant => EnsembleKind::CovariantEquator,
    }
}

fn load_pair(a: &PairArgs, policy: &NumericPolicy) -> Result<(MultiRationalFn, MultiRationalFn, Vec<usize>)> {
    let g0 = load_function(&a.g0, policy)?;
    let g1 = load_function(&a.g1, policy)?;
    if g0.k() != g1.k() {
        return Err(QqbfError::Dimension { expected: g0.k(), got: g1.k() });
    }
    let ns = match &a.n {
        Some(n) => n.clone(),
        None => g0.degrees().iter().zip(g1.degrees()).map(|(a, b)| (*a).max(b)).collect(),
    };
    Ok((g0, g1, ns))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| QqbfError::Domain(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs the CLI and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let payload = json!({ "error": { "kind": "usage", "detail": e.to_string() } });
            eprint!("{}", render(&payload));
            return 2;
        }
    };
    let result = execute(&cli).and_then(|out| match out {
        Output::Json(v) => emit(&cli.common.out, &render(&v)),
        Output::Text(t) => emit(&cli.common.out, &t),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let text = render(&json::error_to_json(&e));
            eprint!("{text}");
            // Stdout carries the payload too so pipelines can parse it.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            e.exit_code()
        }
    }
}
