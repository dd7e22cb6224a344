use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fringelab::analysis::r_curve;
use fringelab::angle::parse_angle;
use fringelab::beam::BeamState;
use fringelab::decomposition::Method;
use fringelab::interference::{ScreenGeometry, Window};
use fringelab::io::{curve_csv, write_atomic};
use fringelab::pipeline::{analyze_files, analyze_scenario, simulate_to_files};
use fringelab::scenario::{preset, Scenario, PRESET_NAMES};
use fringelab::verify::{Verifier, VerifyOptions};
use fringelab::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Two-photon double-slit fringe simulator and analyzer.
#[derive(Debug, Parser)]
#[command(name = "fringelab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render an intensity map to PGM, float grid and JSON sidecar.
    Simulate(SimulateArgs),
    /// Report symmetry axes, axial ratio and K estimate for a map.
    Analyze(AnalyzeArgs),
    /// Emit the axial-ratio curve R(K) as CSV.
    Curve(CurveArgs),
    /// Run the built-in acceptance checks.
    Verify(VerifyArgs),
    /// List scenario presets.
    List,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Preset name (see `fringelab list`).
    #[arg(long, conflicts_with_all = ["method", "theta", "phi_x", "phi_y", "k"])]
    scenario: Option<String>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Polarization angle θ in radians; accepts `pi/4`.
    #[arg(long, value_parser = parse_rad, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_parser = parse_rad, allow_hyphen_values = true)]
    phi_x: Option<f64>,
    #[arg(long, value_parser = parse_rad, allow_hyphen_values = true)]
    phi_y: Option<f64>,
    /// Schmidt number of the canonical θ = π/4 state.
    #[arg(long, conflicts_with_all = ["theta", "phi_x", "phi_y"])]
    k: Option<f64>,
    /// Half-extent of the square screen window in metres.
    #[arg(long)]
    window: Option<f64>,
    /// Pixels per side.
    #[arg(long)]
    res: Option<usize>,
    /// Output prefix; writes PREFIX.pgm, PREFIX.f64 and PREFIX.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Prefix of a simulate run.
    #[arg(
        long,
        conflicts_with = "scenario",
        required_unless_present = "scenario"
    )]
    input: Option<PathBuf>,
    /// Preset to render on the analysis grid.
    #[arg(long)]
    scenario: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    /// Skip the exact-field column.
    #[arg(long)]
    analytic_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    json: bool,
    /// Scale observed intensities in the bound check.
    #[arg(long, hide = true, default_value_t = 1.0)]
    inject_gain: f64,
    /// Run only these checks.
    #[arg(long = "check", hide = true)]
    checks: Vec<u8>,
}

fn parse_rad(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

/// Error plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation(_) | Error::UnknownScenario(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FRINGELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        usage(format!(
            "FRINGELAB_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn build_scenario(args: &SimulateArgs) -> Result<Scenario, Failure> {
    let mut sc = if let Some(name) = &args.scenario {
        preset(name)?
    } else if let Some(k) = args.k {
        if args.method == Some(Method::Phase) {
            return Err(usage("--k selects the amplitude-method canonical state"));
        }
        Scenario::canonical(k)?
    } else {
        let method = args.method.ok_or_else(|| {
            usage("give --scenario, --k, or --method with --theta/--phi-x/--phi-y")
        })?;
        let (Some(t), Some(x), Some(y)) = (args.theta, args.phi_x, args.phi_y) else {
            return Err(usage("--method needs --theta, --phi-x and --phi-y"));
        };
        Scenario::new(
            format!("custom-{}", method.as_str()),
            method,
            BeamState::new(t, x, y)?,
        )
    };
    if let Some(half) = args.window {
        if !(half.is_finite() && half > 0.0) {
            return Err(usage(format!("--window must be positive, got {half}")));
        }
        sc.window = Window::centered(half);
    }
    if let Some(n) = args.res {
        if n < 2 {
            return Err(usage(format!("--res must be at least 2, got {n}")));
        }
        sc.resolution = n;
    }
    Ok(sc)
}

fn ensure_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::Io(e).into())
        }
        _ => Ok(()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            ensure_parent(path)?;
            write_atomic(path, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<u8, Failure> {
    let sc = build_scenario(&args)?;
    ensure_parent(&args.out)?;
    let paths = simulate_to_files(&sc, &args.out)?;
    for p in [&paths.pgm, &paths.grid, &paths.metadata] {
        eprintln!("wrote {}", p.display());
    }
    Ok(0)
}

fn analyze(args: AnalyzeArgs) -> Result<u8, Failure> {
    let report = match (&args.input, &args.scenario) {
        (Some(prefix), _) => analyze_files(prefix)?,
        (None, Some(name)) => analyze_scenario(&preset(name)?)?,
        (None, None) => return Err(usage("give --input or --scenario")),
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    text.push('\n');
    emit(&text, args.out.as_deref())?;
    Ok(0)
}

fn curve_ks(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("--step must be positive, got {step}")).into());
    }
    if !(from > 1.0 && to < 2.0 && from <= to) {
        return Err(
            Error::Domain(format!("need 1 < from <= to < 2, got from {from}, to {to}")).into(),
        );
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

fn curve(args: CurveArgs) -> Result<u8, Failure> {
    let ks = curve_ks(args.from, args.to, args.step)?;
    let rows = r_curve(&ks, &ScreenGeometry::default(), !args.analytic_only)?;
    emit(&curve_csv(&rows, args.analytic_only), args.out.as_deref())?;
    Ok(0)
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let opts = VerifyOptions {
        intensity_gain: args.inject_gain,
        ..Default::default()
    };
    let verifier = Verifier::new(opts);
    let report = if args.checks.is_empty() {
        verifier.run_all()
    } else {
        if let Some(bad) = args.checks.iter().find(|&&id| !(1..=10).contains(&id)) {
            return Err(usage(format!("no check {bad}; checks are numbered 1-10")));
        }
        verifier.run_selected(&args.checks)
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(Error::from)?
        );
    } else {
        println!("{report}");
    }
    Ok(if report.passed { 0 } else { EXIT_VERIFY })
}

fn list() -> Result<u8, Failure> {
    for name in PRESET_NAMES {
        let sc = preset(name)?;
        let expected = sc
            .expected
            .map(|e| format!("K={}", e.k))
            .unwrap_or_default();
        println!("{name}\t{}\t{expected}", sc.method.as_str());
    }
    Ok(0)
}

fn run() -> Result<u8, Failure> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Curve(a) => curve(a),
        Command::Verify(a) => verify(a),
        Command::List => list(),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("fringelab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
