//! `maxmin` binary: build max-min approximants, compile them to narrow ReLU
//! nets, evaluate and verify artifacts, and certify width lower bounds.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or data error,
//! 3 internal/geometry error. All randomness flows from `--seed` (default 0)
//! and artifacts are written atomically, so identical invocations produce
//! byte-identical files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maxmin_core::affine::MaxMinString;
use maxmin_core::analyzer::{certify_lower_bound, WitnessInstance};
use maxmin_core::builder::{build, BuildConfig, BuildTrace};
use maxmin_core::compile::{compile, verify_compilation, CompilationReport};
use maxmin_core::error::Error;
use maxmin_core::expr::{parse, Expr};
use maxmin_core::geometry::{Ball, Domain};
use maxmin_core::interpolate::{interpolate, LabeledPointSet};
use maxmin_core::modulus::{estimate_modulus, modulus_value, ModulusSpec};
use maxmin_core::net::{write_atomic, ReluNet};
use maxmin_core::report::depth_sweep;
use maxmin_core::verify::Grid;
use maxmin_core::TargetFn;

#[derive(Parser)]
#[command(name = "maxmin", version, about = "Max-min strings, narrow ReLU nets, and width certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a max-min approximant of a target expression.
    Approximate(ApproximateArgs),
    /// Fit a max-min string exactly through labeled points.
    Interpolate(InterpolateArgs),
    /// Compile a string file into a ReLU net of hidden width d_in + d_out.
    Compile(CompileArgs),
    /// Run a net forward at one input point.
    Eval(EvalArgs),
    /// Compare a net against a target expression on a grid.
    Verify(VerifyArgs),
    /// Certify the 1/16 approximation lower bound for a width-d_in net.
    Analyze(AnalyzeArgs),
    /// Sweep tolerances and report length growth with a fitted slope.
    Report(ReportArgs),
}

#[derive(Args)]
struct ApproximateArgs {
    /// Target expression(s) in x1, x2, ...; top-level commas separate output
    /// coordinates.
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,
    /// Input dimension (1, 2, or 3).
    #[arg(long)]
    din: usize,
    /// Output dimension; must match the expression list when given.
    #[arg(long)]
    dout: Option<usize>,
    /// Sup-norm tolerance.
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    modulus: ModulusArgs,
    /// Approximation domain: box:lo..hi or ball:c1,...:r.
    #[arg(long, default_value = "box:0..1")]
    domain: String,
    /// Output path for the string artifact.
    #[arg(long)]
    out: PathBuf,
    /// Also compile the string and write the net here.
    #[arg(long)]
    compile: Option<PathBuf>,
    /// Write the per-annulus construction trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct InterpolateArgs {
    /// CSV file with one `x1,...,xd,f1,...,fk` line per labeled point.
    #[arg(long)]
    points: PathBuf,
    /// Input dimension (how many leading columns are coordinates).
    #[arg(long)]
    din: usize,
    /// Output path for the string artifact.
    #[arg(long)]
    out: PathBuf,
    /// Also compile the string and write the net here.
    #[arg(long)]
    compile: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompileArgs {
    /// String artifact to compile.
    #[arg(long)]
    string: PathBuf,
    /// Ball on which compilation is verified: ball:c1,...:r (a box is
    /// replaced by its circumscribed ball).
    #[arg(long)]
    domain: String,
    /// Output path for the net artifact.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// Net artifact to evaluate.
    #[arg(long)]
    net: PathBuf,
    /// Input point as a comma-separated list.
    #[arg(long)]
    input: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Net artifact to verify.
    #[arg(long)]
    net: PathBuf,
    /// Target expression(s) the net is supposed to approximate.
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,
    /// Sup-norm tolerance the net is held to.
    #[arg(long)]
    eps: f64,
    /// Grid points per axis (defaults: 10000 in 1D, 200 in 2D, 40 in 3D).
    #[arg(long)]
    grid: Option<usize>,
    /// Verification domain; balls are swept over their bounding box.
    #[arg(long, default_value = "box:0..1")]
    domain: String,
    #[command(flatten)]
    modulus: ModulusArgs,
    /// Write per-point errors as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Net artifact to analyze (hidden widths must equal d_in).
    #[arg(long)]
    net: PathBuf,
    /// Expected input dimension; rejected if the net disagrees.
    #[arg(long)]
    din: Option<usize>,
    /// Margin tolerance for the region membership tests.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the machine-readable certificate here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Comma-separated tolerance sweep, e.g. "0.2,0.1,0.05".
    #[arg(long)]
    sweep: String,
    /// Target expression(s).
    #[arg(long = "fn", value_name = "EXPR")]
    function: String,
    /// Input dimension.
    #[arg(long)]
    din: usize,
    /// Output dimension; must match the expression list when given.
    #[arg(long)]
    dout: Option<usize>,
    #[command(flatten)]
    modulus: ModulusArgs,
    /// Approximation domain: box:lo..hi or ball:c1,...:r.
    #[arg(long, default_value = "box:0..1")]
    domain: String,
    /// Output path for the depth-report CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Modulus-of-continuity source; the three flags are mutually exclusive.
#[derive(Args)]
#[group(multiple = false)]
struct ModulusArgs {
    /// Lipschitz constant of the target.
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Hoelder modulus C*delta^alpha, written C:alpha.
    #[arg(long, value_name = "C:ALPHA")]
    hoelder: Option<String>,
    /// Estimate the modulus by sampling the target (seeded).
    #[arg(long)]
    estimate_modulus: bool,
}

impl ModulusArgs {
    fn resolve(
        &self,
        f: TargetFn,
        d_out: usize,
        ball: &Ball,
        seed: u64,
        required: bool,
    ) -> Result<Option<ModulusSpec>, Error> {
        let spec = if let Some(l) = self.lipschitz {
            Some(ModulusSpec::Lipschitz { l })
        } else if let Some(text) = &self.hoelder {
            let (c, alpha) = text
                .split_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("bad --hoelder '{text}': expected C:alpha")))?;
            let parse = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad --hoelder '{text}': not a number")))
            };
            Some(ModulusSpec::Hoelder { c: parse(c)?, alpha: parse(alpha)? })
        } else if self.estimate_modulus {
            Some(estimate_modulus(f, d_out, ball, 400, 0.5, seed)?)
        } else if required {
            return Err(Error::InvalidInput(
                "choose a modulus: --lipschitz, --hoelder, or --estimate-modulus".into(),
            ));
        } else {
            None
        };
        if let Some(s) = &spec {
            s.validate()?;
        }
        Ok(spec)
    }
}

/// Parsed multi-output target expression.
struct Target {
    exprs: Vec<Expr>,
}

impl Target {
    fn parse_list(src: &str, d_in: usize, dout_flag: Option<usize>) -> Result<Target, Error> {
        let mut exprs = Vec::new();
        for part in split_top_level(src) {
            exprs.push(parse(part.trim())?);
        }
        if let Some(k) = dout_flag {
            if k != exprs.len() {
                return Err(Error::InvalidInput(format!(
                    "--dout {k} disagrees with {} comma-separated expressions",
                    exprs.len()
                )));
            }
        }
        for e in &exprs {
            if e.arity() > d_in {
                return Err(Error::InvalidInput(format!(
                    "expression uses x{} but the input dimension is {d_in}",
                    e.arity()
                )));
            }
        }
        Ok(Target { exprs })
    }

    fn d_out(&self) -> usize {
        self.exprs.len()
    }

    /// Infallible form for the builder; evaluation faults surface as NaN and
    /// are rejected by the callee's finiteness checks.
    fn closure(&self) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, out| {
            for (k, e) in self.exprs.iter().enumerate() {
                out[k] = e.eval(x).unwrap_or(f64::NAN);
            }
        }
    }

    fn eval_checked(&self, x: &[f64], out: &mut [f64]) -> Result<(), Error> {
        for (k, e) in self.exprs.iter().enumerate() {
            out[k] = e.eval(x)?;
        }
        Ok(())
    }
}

/// Splits on commas that are not nested in parentheses (min/max calls take
/// comma-separated arguments).
fn split_top_level(src: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, b) in src.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth = depth.saturating_sub(1),
            b',' if depth == 0 => {
                parts.push(&src[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&src[start..]);
    parts
}

fn parse_domain(s: &str, d_in: usize) -> Result<Domain, Error> {
    let bad = |m: String| Error::InvalidInput(format!("bad domain '{s}': {m}"));
    if let Some(rest) = s.strip_prefix("box:") {
        let (lo, hi) =
            rest.split_once("..").ok_or_else(|| bad("expected box:lo..hi".into()))?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad("lo is not a number".into()))?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad("hi is not a number".into()))?;
        if !(lo < hi) {
            return Err(bad("needs lo < hi".into()));
        }
        Ok(Domain::Box { lo: vec![lo; d_in], hi: vec![hi; d_in] })
    } else if let Some(rest) = s.strip_prefix("ball:") {
        let (center, r) =
            rest.rsplit_once(':').ok_or_else(|| bad("expected ball:c1,...:r".into()))?;
        let center =
            parse_numbers(center).map_err(|_| bad("center is not a number list".into()))?;
        if center.len() != d_in {
            return Err(bad(format!("center has {} coordinates, expected {d_in}", center.len())));
        }
        let radius: f64 = r.trim().parse().map_err(|_| bad("radius is not a number".into()))?;
        Ok(Domain::Ball { center, radius })
    } else {
        Err(bad("expected box:lo..hi or ball:c1,...:r".into()))
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// The invocation echoed into artifacts so a run can be reproduced exactly.
fn provenance() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

/// Compiles, verifies, stamps provenance, and writes; nets that fail the
/// faithfulness check are never written.
fn emit_net(
    g: &MaxMinString,
    ball: &Ball,
    path: &Path,
    seed: u64,
) -> Result<(ReluNet, CompilationReport), Error> {
    let (mut net, _) = compile(g, ball)?;
    let report = verify_compilation(g, &net, ball, 2000, seed)?;
    let allowed = 1e-9 * (1.0 + report.max_abs_value);
    if report.max_abs_err > allowed || !report.widths_within_bound || !report.depth_matches {
        return Err(Error::Verification(format!(
            "compiled net deviates by {} from its string (allowed {allowed})",
            report.max_abs_err
        )));
    }
    net.meta.provenance = provenance();
    net.meta.domain = Some(ball.clone());
    net.save(path)?;
    Ok((net, report))
}

fn describe_net(net: &ReluNet, report: &CompilationReport, path: &Path) {
    match net.hidden_widths().first() {
        Some(w) => println!("net: depth {}, hidden width {w}", net.depth()),
        None => println!("net: depth {}, no hidden layers", net.depth()),
    }
    println!("compilation deviation: {} over {} samples", report.max_abs_err, report.samples);
    println!("wrote {}", path.display());
}

fn trace_csv(trace: &BuildTrace) -> String {
    let mut buf = format!("# config: {}\n", provenance());
    buf.push_str("annulus_index,r,r_prime,steps,cumulative_length\n");
    for row in &trace.rounds {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            row.index, row.r, row.r_prime, row.pieces, row.cumulative_length
        ));
    }
    buf
}

fn default_grid(d_in: usize) -> Result<usize, Error> {
    match d_in {
        1 => Ok(10_000),
        2 => Ok(200),
        3 => Ok(40),
        _ => Err(Error::InvalidInput("pass --grid N for inputs beyond 3 dimensions".into())),
    }
}

fn run_approximate(a: ApproximateArgs) -> Result<ExitCode, Error> {
    let target = Target::parse_list(&a.function, a.din, a.dout)?;
    let domain = parse_domain(&a.domain, a.din)?;
    let ball = domain.enclosing_ball()?;
    let f = target.closure();
    let modulus = a.modulus.resolve(&f, target.d_out(), &ball, a.seed, true)?.unwrap();
    let mut cfg = BuildConfig::new(a.eps, modulus);
    cfg.seed = a.seed;
    let (g, trace) = build(&f, target.d_out(), &domain, &cfg)?;
    g.save(&a.out)?;
    println!(
        "string: length {}, {} annuli, resolution {}",
        g.len(),
        trace.rounds.len(),
        trace.resolution
    );
    println!("wrote {}", a.out.display());
    if let Some(path) = &a.trace {
        write_atomic(path, trace_csv(&trace).as_bytes())?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &a.compile {
        let (net, report) = emit_net(&g, &ball, path, a.seed)?;
        describe_net(&net, &report, path);
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_points_csv(text: &str, d_in: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), Error> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = parse_numbers(line).map_err(|e| {
            Error::InvalidInput(format!("points line {}: {e}", lineno + 1))
        })?;
        if row.len() <= d_in {
            return Err(Error::InvalidInput(format!(
                "points line {}: {} columns cannot hold {d_in} coordinates plus a value",
                lineno + 1,
                row.len()
            )));
        }
        points.push(row[..d_in].to_vec());
        values.push(row[d_in..].to_vec());
    }
    Ok((points, values))
}

fn run_interpolate(a: InterpolateArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&a.points)?;
    let (points, values) = parse_points_csv(&text, a.din)?;
    let set = LabeledPointSet::new(points.clone(), values)?;
    let g = interpolate(&set, a.seed)?;
    g.save(&a.out)?;
    println!("string: length {} through {} points", g.len(), set.len());
    println!("wrote {}", a.out.display());
    if let Some(path) = &a.compile {
        // Verification ball: the data's circumscribed ball with margin, so a
        // lone point still gets a usable radius.
        let tight = Domain::Points { points }.enclosing_ball()?;
        let ball = Ball::new(tight.center, (tight.radius * 1.25).max(1.0))?;
        let (net, report) = emit_net(&g, &ball, path, a.seed)?;
        describe_net(&net, &report, path);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_compile(a: CompileArgs) -> Result<ExitCode, Error> {
    let g = MaxMinString::load(&a.string)?;
    let domain = parse_domain(&a.domain, g.d_in())?;
    let ball = domain.enclosing_ball()?;
    let (net, report) = emit_net(&g, &ball, &a.out, a.seed)?;
    describe_net(&net, &report, &a.out);
    Ok(ExitCode::SUCCESS)
}

fn run_eval(a: EvalArgs) -> Result<ExitCode, Error> {
    let net = ReluNet::load(&a.net)?;
    let x = parse_numbers(&a.input)
        .map_err(|e| Error::InvalidInput(format!("bad --input: {e}")))?;
    let y = net.forward(&x)?;
    println!("{}", join(&y));
    Ok(ExitCode::SUCCESS)
}

fn run_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let net = ReluNet::load(&a.net)?;
    let (d_in, d_out) = (net.d_in(), net.d_out());
    let target = Target::parse_list(&a.function, d_in, None)?;
    if target.d_out() != d_out {
        return Err(Error::InvalidInput(format!(
            "net has {d_out} outputs but the expression list has {}",
            target.d_out()
        )));
    }
    let domain = parse_domain(&a.domain, d_in)?;
    let (lo, hi) = domain.bounding_box()?;
    let per_axis = match a.grid {
        Some(n) => n,
        None => default_grid(d_in)?,
    };
    let grid = Grid::new(&lo, &hi, per_axis)?;
    let h = grid.spacing();
    let f = target.closure();
    let slack = match a.modulus.resolve(&f, d_out, &domain.enclosing_ball()?, a.seed, false)? {
        Some(spec) => modulus_value(&spec, h),
        None => 0.0,
    };

    let mut csv = a.out.as_ref().map(|_| {
        let mut buf = format!("# config: {}\n", provenance());
        for i in 1..=d_in {
            buf.push_str(&format!("x{i},"));
        }
        buf.push_str("error\n");
        buf
    });
    let mut want = vec![0.0; d_out];
    let mut got = vec![0.0; d_out];
    let (mut max_err, mut sum, mut samples) = (0.0f64, 0.0f64, 0usize);
    let mut argmax = vec![0.0; d_in];
    for p in grid.points() {
        target.eval_checked(&p, &mut want)?;
        net.forward_into(&p, &mut got)?;
        let mut err = 0.0f64;
        for k in 0..d_out {
            err = err.max((want[k] - got[k]).abs());
        }
        if err > max_err {
            max_err = err;
            argmax.copy_from_slice(&p);
        }
        sum += err;
        samples += 1;
        if let Some(buf) = csv.as_mut() {
            for v in &p {
                buf.push_str(&format!("{v},"));
            }
            buf.push_str(&format!("{err}\n"));
        }
    }
    println!("samples: {samples}");
    println!("max error: {max_err} at ({})", join(&argmax));
    println!("mean error: {}", sum / samples as f64);
    println!("allowed: {} (eps {} + grid slack {slack})", a.eps + slack, a.eps);
    if let (Some(path), Some(buf)) = (&a.out, csv) {
        write_atomic(path, buf.as_bytes())?;
        println!("wrote {}", path.display());
    }
    if max_err <= a.eps + slack {
        println!("verdict: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verdict: FAIL");
        Ok(ExitCode::from(1))
    }
}

fn run_analyze(a: AnalyzeArgs) -> Result<ExitCode, Error> {
    let net = ReluNet::load(&a.net)?;
    if let Some(d) = a.din {
        if d != net.d_in() {
            return Err(Error::InvalidInput(format!(
                "--din {d} but the net takes {} inputs",
                net.d_in()
            )));
        }
    }
    let witness = WitnessInstance::unit_box(net.d_in())?;
    let cert = certify_lower_bound(&net, &witness, a.tol)?;
    println!("case: {}", cert.case);
    println!("bound: {}", cert.bound);
    println!("certified: {}", cert.certified);
    println!("halfspaces: {}", cert.halfspaces);
    match &cert.witness {
        Some(w) => println!("witness: ({})", join(w)),
        None => println!("witness: none"),
    }
    if !cert.rank_deficient_layers.is_empty() {
        println!("rank-deficient layers: {:?}", cert.rank_deficient_layers);
    }
    println!("diagnosis: {}", cert.diagnosis);
    if let Some(path) = &a.out {
        write_atomic(path, serde_json::to_string_pretty(&cert)?.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn run_report(a: ReportArgs) -> Result<ExitCode, Error> {
    let target = Target::parse_list(&a.function, a.din, a.dout)?;
    let domain = parse_domain(&a.domain, a.din)?;
    let ball = domain.enclosing_ball()?;
    let sweep = parse_numbers(&a.sweep)
        .map_err(|e| Error::InvalidInput(format!("bad --sweep: {e}")))?;
    let first = *sweep
        .first()
        .ok_or_else(|| Error::InvalidInput("empty --sweep".into()))?;
    let f = target.closure();
    let modulus = a.modulus.resolve(&f, target.d_out(), &ball, a.seed, true)?.unwrap();
    let mut template = BuildConfig::new(first, modulus);
    template.seed = a.seed;
    let report = depth_sweep(&f, target.d_out(), &domain, &template, &sweep)?;
    let slope = report.slope.map_or("n/a".to_string(), |s| s.to_string());
    let mut buf = format!("# config: {}\n# slope: {slope}\n", provenance());
    buf.push_str("eps,w,radius,length,predicted\n");
    for row in &report.rows {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            row.eps, row.resolution, row.radius, row.length, row.predicted
        ));
    }
    write_atomic(&a.out, buf.as_bytes())?;
    println!("slope: {slope}");
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Approximate(a) => run_approximate(a),
        Command::Interpolate(a) => run_interpolate(a),
        Command::Compile(a) => run_compile(a),
        Command::Eval(a) => run_eval(a),
        Command::Verify(a) => run_verify(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Report(a) => run_report(a),
    }
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Verification(_) => 1,
        Error::Geometry(_) | Error::NonFinite { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
