//! Command-line frontend.
//!
//! Subcommands: `denoise`, `segment`, `bench` and `verify`. Any subcommand
//! accepts `--config FILE`, a text file of `key=value` lines (blank lines
//! and `#` comments ignored) that are applied as if given as `--key value`
//! before the real arguments, so explicit flags win. A value of `true`
//! turns on a bare flag and `false` leaves it off.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 failed
//! verification.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::driver::{run, IterationRecord, LinearSolver, RunConfig, SolverTrace};
use crate::error::Error;
use crate::grid::ScalarField;
use crate::imageio::{add_gaussian_noise, read_image, write_image, NoiseSpec};
use crate::models::{Aux, Isotropy, ModelConfig, ModelKind};
use crate::precond::SweepSpec;
use crate::presets;
use crate::stencil::Scheme;
use crate::synth;
use crate::verify::{run_checks, Fault, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Header of the `bench` CSV.
pub const BENCH_HEADER: &str = "variant,outer_iter,energy,psnr,work_units,seconds";

/// Header of the `denoise` and `segment` trace CSV.
pub const TRACE_HEADER: &str = "outer_iter,energy,psnr,step_u,step_aux,work_units";

#[derive(Parser, Debug)]
#[command(name = "halfquad", version, about = "Preconditioned alternating minimization for half-quadratic image models")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denoise a grayscale image with GR, GY, GM or HL.
    Denoise(DenoiseArgs),
    /// Smooth an image and extract an edge indicator with the MS model.
    Segment(SegmentArgs),
    /// Compare SRBGS and CG inner solvers; writes a CSV trace.
    Bench(BenchArgs),
    /// Run the dense-oracle self-checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Image file (PGM or PNG) or `synth:<name>:<size>`.
    #[arg(long)]
    input: String,
    /// Clean image for PSNR; defaults to the input when noise is added.
    #[arg(long)]
    reference: Option<String>,
    /// Standard deviation of Gaussian noise added to the input.
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// key=value file of default flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Proximal shift of the SRBGS step.
    #[arg(long)]
    eta: Option<f64>,
    /// SRBGS cycles per subproblem.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop when the relative energy change falls below this.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long, overrides_with = "aniso")]
    iso: bool,
    #[arg(long, overrides_with = "iso")]
    aniso: bool,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// GY proximal weight (defaults to mu).
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// ms-man or ms-tulips.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma_prox: Option<f64>,
    /// Use a preset's alpha as is instead of scaling it to the image size.
    #[arg(long)]
    no_rescale: bool,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Smoothed image.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Edge indicator s (near 0 on edges).
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated list of srbgs-<n>, cg-prox-<tol>, cg-noprox-<tol>.
    #[arg(long, default_value = "srbgs-10,cg-prox-1e-3,cg-prox-1e-6,cg-noprox-1e-3")]
    variants: String,
    /// CSV path; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write 0 in the seconds column for reproducible output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated grid shapes, e.g. 3x3,4x5.
    #[arg(long, default_value = "3x3,4x5,5x5")]
    sizes: String,
    /// Random instances per shape and scheme.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::GridTooSmall { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Turns `key=value` lines into flag tokens.
pub fn config_tokens(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got `{line}`", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        match value.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

fn expand_config(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    for (k, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(k + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    if args.len() < 2 {
        return Ok(args);
    }
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let tokens = config_tokens(&text)?;
    let mut out = args[..2].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn load_image(spec: &str) -> Result<ScalarField, Failure> {
    match synth::parse_spec(spec)? {
        Some(u) => Ok(u),
        None => Ok(read_image(spec)?),
    }
}

/// Loads the input, adds noise, and picks the PSNR reference.
fn load_inputs(args: &InputArgs) -> Result<(ScalarField, Option<ScalarField>), Failure> {
    let clean = load_image(&args.input)?;
    let sigma = args.noise_sigma.unwrap_or(0.0);
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(sigma, args.seed)?);
    let reference = match &args.reference {
        Some(r) => {
            let r = load_image(r)?;
            r.ensure_same_shape(&noisy)?;
            Some(r)
        }
        None if sigma > 0.0 => Some(clean),
        None => None,
    };
    Ok((noisy, reference))
}

fn apply_solver_args(cfg: &mut ModelConfig, s: &SolverArgs) {
    let sweep = &mut cfg.sweep;
    *sweep = SweepSpec {
        sweeps: s.sweeps.unwrap_or(sweep.sweeps),
        eta: s.eta.unwrap_or(sweep.eta),
        scheme: s.scheme.unwrap_or(sweep.scheme),
    };
}

fn run_config(model: ModelConfig, s: &SolverArgs, reference: Option<ScalarField>) -> RunConfig {
    let mut cfg = RunConfig::new(model);
    if let Some(m) = s.max_iters {
        cfg.max_outer_iters = m;
    }
    if let Some(t) = s.tol {
        cfg.energy_rel_tol = t;
    }
    cfg.reference = reference;
    cfg
}

fn half_quadratic_config(m: &ModelArgs, s: &SolverArgs) -> Result<ModelConfig, Failure> {
    let mut cfg = match &m.preset {
        Some(name) => {
            let p = presets::find(name)
                .ok_or_else(|| usage(format!("unknown preset `{name}`; known: {}", presets::names().join(", "))))?;
            if let Some(kind) = m.model {
                if kind != p.config.model {
                    return Err(usage(format!("--model {kind} conflicts with preset `{name}`")));
                }
            }
            p.config
        }
        None => {
            let kind = m.model.ok_or_else(|| usage("either --model or --preset is required"))?;
            ModelConfig::half_quadratic(kind, Isotropy::Aniso, 1.0, 1.0)
        }
    };
    if cfg.model == ModelKind::Ms {
        return Err(usage("the MS model is run by the `segment` subcommand"));
    }
    if m.preset.is_none() && (m.mu.is_none() || m.lambda.is_none()) {
        return Err(usage("--mu and --lambda are required without --preset"));
    }
    if m.iso {
        cfg.isotropy = Isotropy::Iso;
    }
    if m.aniso {
        cfg.isotropy = Isotropy::Aniso;
    }
    cfg.mu = m.mu.unwrap_or(cfg.mu);
    cfg.lambda = m.lambda.unwrap_or(cfg.lambda);
    cfg.kappa = m.kappa.or(cfg.kappa);
    apply_solver_args(&mut cfg, s);
    cfg.validate()?;
    Ok(cfg)
}

/// Full-precision float for CSV output.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn trace_csv(trace: &SolverTrace) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    let _ = writeln!(s, "0,{},{},0,0,0", fmt_float(trace.initial_energy), fmt_opt(trace.initial_psnr));
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.outer_iter,
            fmt_float(r.energy),
            fmt_opt(r.psnr),
            fmt_float(r.step_u),
            fmt_float(r.step_aux),
            fmt_float(r.work_units)
        );
    }
    s
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn summary(out: &mut dyn Write, trace: &SolverTrace) {
    let _ = writeln!(out, "outer iterations: {}", trace.records.len());
    let _ = writeln!(out, "initial energy: {}", fmt_float(trace.initial_energy));
    let _ = writeln!(out, "final energy: {}", fmt_float(trace.final_energy()));
    if let Some(p0) = trace.initial_psnr {
        let p = trace.records.last().and_then(|r| r.psnr).unwrap_or(p0);
        let _ = writeln!(out, "psnr: {p0:.4} -> {p:.4} dB");
    }
}

fn cmd_denoise(a: &DenoiseArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let model = half_quadratic_config(&a.model, &a.solver)?;
    let (u0, reference) = load_inputs(&a.input)?;
    let cfg = run_config(model, &a.solver, reference);
    let (state, trace) = run(&cfg, &u0)?;
    if let Some(p) = &a.output {
        write_image(p, &state.u)?;
    }
    if let Some(p) = &a.trace {
        write_text(p, &trace_csv(&trace))?;
    }
    summary(out, &trace);
    Ok(())
}

fn cmd_segment(a: &SegmentArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (u0, reference) = load_inputs(&a.input)?;
    let mut model = match &a.preset {
        Some(name) => {
            let p = presets::find(name)
                .filter(|p| p.config.model == ModelKind::Ms)
                .ok_or_else(|| usage(format!("unknown MS preset `{name}` (expected ms-man or ms-tulips)")))?;
            let mut c = p.config;
            if !a.no_rescale {
                c.alpha = presets::rescaled_alpha(c.alpha, u0.rows(), u0.cols());
            }
            c
        }
        None => {
            if a.alpha.is_none() || a.lambda.is_none() || a.epsilon.is_none() {
                return Err(usage("--alpha, --lambda and --epsilon are required without --preset"));
            }
            ModelConfig::ms(1.0, 1.0, 1.0)
        }
    };
    model.alpha = a.alpha.unwrap_or(model.alpha);
    model.lambda = a.lambda.unwrap_or(model.lambda);
    model.epsilon = a.epsilon.unwrap_or(model.epsilon);
    model.gamma_prox = a.gamma_prox.unwrap_or(model.gamma_prox);
    apply_solver_args(&mut model, &a.solver);
    model.validate()?;
    let cfg = run_config(model, &a.solver, reference);
    let (state, trace) = run(&cfg, &u0)?;
    let Aux::Scalar(s) = &state.aux else {
        return Err(Failure::Runtime("MS state lost its edge field".into()));
    };
    if let Some(p) = &a.output {
        write_image(p, &state.u)?;
    }
    if let Some(p) = &a.edges {
        write_image(p, s)?;
    }
    if let Some(p) = &a.trace {
        write_text(p, &trace_csv(&trace))?;
    }
    summary(out, &trace);
    let _ = writeln!(out, "edge field range: [{:.6}, {:.6}]", s.min(), s.max());
    Ok(())
}

/// A bench variant such as `srbgs-10` or `cg-prox-1e-6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variant {
    pub solver: LinearSolver,
    pub sweeps: Option<usize>,
}

/// Cap on CG iterations per linear solve in the benchmark variants.
pub const CG_MAX_ITERS: usize = 10_000;

pub fn parse_variant(s: &str) -> Result<Variant, String> {
    let bad = || format!("bad variant `{s}` (expected srbgs-<n>, cg-prox-<tol> or cg-noprox-<tol>)");
    let tol = |t: &str| -> Result<f64, String> {
        t.parse::<f64>().ok().filter(|v| *v > 0.0).ok_or_else(bad)
    };
    if let Some(n) = s.strip_prefix("srbgs-") {
        let n: usize = n.parse().ok().filter(|n| *n > 0).ok_or_else(bad)?;
        Ok(Variant {
            solver: LinearSolver::Srbgs,
            sweeps: Some(n),
        })
    } else if let Some(t) = s.strip_prefix("cg-prox-") {
        Ok(Variant {
            solver: LinearSolver::CgProx {
                rel_tol: tol(t)?,
                max_iters: CG_MAX_ITERS,
            },
            sweeps: None,
        })
    } else if let Some(t) = s.strip_prefix("cg-noprox-") {
        Ok(Variant {
            solver: LinearSolver::CgNoProx {
                rel_tol: tol(t)?,
                max_iters: CG_MAX_ITERS,
            },
            sweeps: None,
        })
    } else {
        Err(bad())
    }
}

/// Runs one bench variant. Energy monotonicity is recorded, not enforced.
pub fn run_variant(base: &RunConfig, v: Variant, u0: &ScalarField) -> crate::error::Result<SolverTrace> {
    let mut cfg = base.clone();
    cfg.solver = v.solver;
    cfg.check_monotone = false;
    if let Some(n) = v.sweeps {
        cfg.model.sweep.sweeps = n;
    }
    run(&cfg, u0).map(|(_, t)| t)
}

fn bench_rows(name: &str, trace: &SolverTrace, timing: bool, out: &mut String) {
    let _ = writeln!(out, "{name},0,{},{},0,0", fmt_float(trace.initial_energy), fmt_opt(trace.initial_psnr));
    for IterationRecord {
        outer_iter,
        energy,
        psnr,
        work_units,
        seconds,
        ..
    } in &trace.records
    {
        let secs = if timing { *seconds } else { 0.0 };
        let _ = writeln!(
            out,
            "{name},{outer_iter},{},{},{},{}",
            fmt_float(*energy),
            fmt_opt(*psnr),
            fmt_float(*work_units),
            fmt_float(secs)
        );
    }
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let model = half_quadratic_config(&a.model, &a.solver)?;
    let variants: Vec<(String, Variant)> = a
        .variants
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_variant(s).map(|v| (s.to_string(), v)))
        .collect::<Result<_, _>>()
        .map_err(Failure::Usage)?;
    if variants.is_empty() {
        return Err(usage("no bench variants given"));
    }
    let (u0, reference) = load_inputs(&a.input)?;
    let base = run_config(model, &a.solver, reference);
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for (name, v) in &variants {
        let trace = run_variant(&base, *v, &u0)?;
        bench_rows(name, &trace, !a.no_timing, &mut csv);
    }
    match &a.csv {
        Some(p) => write_text(p, &csv)?,
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    Ok(())
}

/// Parses `3x3,4x5` into shapes.
pub fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (r, c) = t.split_once('x').ok_or_else(|| format!("bad size `{t}` (expected RxC)"))?;
            let r: usize = r.parse().map_err(|_| format!("bad size `{t}`"))?;
            let c: usize = c.parse().map_err(|_| format!("bad size `{t}`"))?;
            if r < 2 || c < 2 {
                return Err(format!("size `{t}` is below 2x2"));
            }
            Ok((r, c))
        })
        .collect()
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<bool, Failure> {
    let sizes = parse_sizes(&a.sizes).map_err(Failure::Usage)?;
    if sizes.is_empty() {
        return Err(usage("no sizes given"));
    }
    let fault = match a.inject_fault.as_deref() {
        None => None,
        Some("south-sign") => Some(Fault::SouthSign),
        Some(f) => return Err(usage(format!("unknown fault `{f}`"))),
    };
    let cfg = VerifyConfig {
        sizes,
        trials: a.trials,
        seed: a.seed,
        fault,
    };
    let shapes: Vec<String> = cfg.sizes.iter().map(|(r, c)| format!("{r}x{c}")).collect();
    let _ = writeln!(out, "shapes: {}, {} trials each", shapes.join(", "), cfg.trials);
    let results = run_checks(&cfg)?;
    let mut ok = true;
    for r in &results {
        let _ = writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        ok &= r.passed;
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        let _ = writeln!(out, "all {} checks passed", results.len());
    } else {
        let _ = writeln!(out, "failed checks: {}", failed.join(", "));
    }
    Ok(ok)
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Denoise(a) => cmd_denoise(a, out).map(|_| true),
        Command::Segment(a) => cmd_segment(a, out).map(|_| true),
        Command::Bench(a) => cmd_bench(a, out).map(|_| true),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let toks = config_tokens("# c\nmu = 0.5\niso=true\n\naniso=false\nmax_iters=3\n").unwrap();
        assert_eq!(toks, ["--mu", "0.5", "--iso", "--max-iters", "3"]);
        assert!(config_tokens("oops").is_err());
    }

    #[test]
    fn variants_and_sizes() {
        assert_eq!(parse_variant("srbgs-4").unwrap().sweeps, Some(4));
        assert!(matches!(
            parse_variant("cg-prox-1e-6").unwrap().solver,
            LinearSolver::CgProx { rel_tol, .. } if rel_tol == 1e-6
        ));
        assert!(parse_variant("cg-noprox-0").is_err());
        assert!(parse_variant("jacobi-3").is_err());
        assert_eq!(parse_sizes("3x3, 4x5").unwrap(), [(3, 3), (4, 5)]);
        assert!(parse_sizes("1x3").is_err());
    }

    #[test]
    fn float_format_roundtrips() {
        for v in [0.1, 1.0 / 3.0, 12345.678e-9, -2.5] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
