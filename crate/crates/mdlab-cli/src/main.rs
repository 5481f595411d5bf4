//! Command-line front end: wires JSON/flag configs to the compute modules
//! and emits reproducible CSV/JSON artifacts.
//!
//! Exit codes: 0 on success, 1 when a certification or convergence check
//! fails (the diagnostic artifact is still written), 2 on input errors.

mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use mdlab_core::br::{classify_stability, simulate_br};
use mdlab_core::chaos::{
    certify_li_yorke, min_chaotic_eta, simulate_ga, CertifyOptions, GaMapParams, MapFamily,
};
use mdlab_core::economy::{Economy, SpendingState};
use mdlab_core::equilibrium::{assess, DeltaPrimeBound, ReportKind};
use mdlab_core::matrix::Mat;
use mdlab_core::prqlin::{run_pr, MdConfig};

use output::{write_csv_row, Sink};

#[derive(Parser)]
#[command(
    name = "mdlab",
    version,
    about = "Market dynamics lab: proportional response, gradient-ascent chaos and best-response stability on production economies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run proportional response on a market; emits a trajectory CSV
    /// (t, F, residual, flattened spending matrix)
    SimulatePr(SimulatePrArgs),
    /// Full n-dimensional gradient ascent on the one-good market; emits
    /// CSV (t, x_1..x_n, aggregate)
    SimulateGa(SimulateGaArgs),
    /// Best-response duopoly dynamics; emits CSV (t, x, y, dist, clamped)
    SimulateBr(SimulateBrArgs),
    /// Certify Li-Yorke chaos of the symmetric gradient-ascent map;
    /// prints the certificate JSON
    CertifyChaos(CertifyChaosArgs),
    /// Scan demand elasticities for the minimum chaotic step size; emits
    /// CSV (gamma, eta_min)
    MinEta(MinEtaArgs),
    /// Check first-order conditions of a spending state; prints a table
    /// and optionally a JSON report
    CheckEquilibrium(CheckEquilibriumArgs),
    /// Stability classification of the best-response fixed point; prints
    /// the report JSON
    Stability(StabilityArgs),
}

enum CliError {
    /// Malformed inputs: exit code 2.
    Input(String),
    /// A check did not pass (artifact still written): exit code 1.
    Failure(String),
}

type CliResult = Result<(), CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl From<mdlab_core::Error> for CliError {
    fn from(e: mdlab_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SimulatePr(args) => simulate_pr_cmd(args),
        Command::SimulateGa(args) => simulate_ga_cmd(args),
        Command::SimulateBr(args) => simulate_br_cmd(args),
        Command::CertifyChaos(args) => certify_chaos_cmd(args),
        Command::MinEta(args) => min_eta_cmd(args),
        Command::CheckEquilibrium(args) => check_equilibrium_cmd(args),
        Command::Stability(args) => stability_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure(msg)) => {
            eprintln!("mdlab: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("mdlab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config<C: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<C, CliError> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| input_err(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| input_err(format!("malformed config {}: {e}", p.display())))
        }
    }
}

fn load_economy(path: &Path) -> Result<Economy<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read economy {}: {e}", path.display())))?;
    Economy::from_json(&text).map_err(|e| input_err(format!("economy {}: {e}", path.display())))
}

/// Random positive start: uniform on (0, K_i/m] per entry, so row sums
/// never exceed the budget.
fn random_start(economy: &Economy<f64>, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = economy.goods() as f64;
    let rows: Vec<Vec<f64>> = (0..economy.firms())
        .map(|i| {
            let cap = economy.budget(i) / m;
            (0..economy.goods())
                .map(|_| rng.gen_range(1e-12..=1.0) * cap)
                .collect()
        })
        .collect();
    Mat::from_rows(&rows).expect("generated rows are rectangular")
}

// ---------------------------------------------------------------------------
// simulate-pr
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulatePrArgs {
    /// Market instance (JSON)
    #[arg(long)]
    economy: Option<PathBuf>,
    /// Seed for the random positive start
    #[arg(long)]
    seed: Option<u64>,
    /// Starting spending matrix (JSON nested array) instead of a random start
    #[arg(long)]
    b0: Option<PathBuf>,
    /// Convergence tolerance on the FOC residual
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap
    #[arg(long)]
    max_iters: Option<usize>,
    /// Reciprocal mirror-descent step size (1 = proportional response)
    #[arg(long)]
    gamma_md: Option<f64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulatePrConfig {
    economy: Option<PathBuf>,
    seed: Option<u64>,
    b0: Option<PathBuf>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    gamma_md: Option<f64>,
    out: Option<PathBuf>,
}

fn simulate_pr_cmd(args: SimulatePrArgs) -> CliResult {
    let cfg: SimulatePrConfig = load_config(args.config.as_deref())?;
    let economy_path = args
        .economy
        .or(cfg.economy)
        .ok_or_else(|| input_err("--economy is required (flag or config)"))?;
    let economy = load_economy(&economy_path)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let start = match args.b0.or(cfg.b0) {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| input_err(format!("cannot read start {}: {e}", path.display())))?;
            let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
                .map_err(|e| input_err(format!("start {}: {e}", path.display())))?;
            Mat::from_rows(&rows)?
        }
        None => random_start(&economy, seed),
    };
    let md = MdConfig {
        gamma_md: args.gamma_md.or(cfg.gamma_md).unwrap_or(1.0),
        max_iters: args.max_iters.or(cfg.max_iters).unwrap_or(100_000),
        tol: args.tol.or(cfg.tol).unwrap_or(1e-8),
        record_states: true,
    };
    let trajectory = run_pr(&economy, &start, &md)?;

    let mut sink = Sink::open(args.out.or(cfg.out).as_deref())?;
    let mut header = String::from("t,F,residual");
    for i in 0..economy.firms() {
        for j in 0..economy.goods() {
            header.push_str(&format!(",b_{i}_{j}"));
        }
    }
    writeln!(sink, "{header}")?;
    let states = trajectory.states.as_ref().expect("states were recorded");
    for (t, (step, state)) in trajectory.steps.iter().zip(states).enumerate() {
        let mut values = vec![step.objective, step.residual];
        values.extend_from_slice(state.as_slice());
        write_csv_row(&mut sink, &t.to_string(), &values)?;
    }
    sink.flush()?;

    let last = trajectory.steps.last().expect("at least the initial step");
    if trajectory.converged {
        eprintln!(
            "converged in {} iterations (residual {})",
            trajectory.iterations(),
            last.residual
        );
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "no convergence within {} iterations (residual {})",
            md.max_iters, last.residual
        )))
    }
}

// ---------------------------------------------------------------------------
// simulate-ga
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateGaArgs {
    /// Number of firms
    #[arg(long)]
    n: Option<usize>,
    /// Gradient step size
    #[arg(long)]
    eta: Option<f64>,
    /// Number of update steps
    #[arg(long)]
    steps: Option<usize>,
    /// Common marginal cost; omitted = per-firm costs uniform on [1e-5, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Common starting output; omitted = uniform on (0, 1] per firm
    #[arg(long)]
    x0: Option<f64>,
    /// Seed for random costs/starts
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateGaConfig {
    n: Option<usize>,
    eta: Option<f64>,
    steps: Option<usize>,
    alpha: Option<f64>,
    x0: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn simulate_ga_cmd(args: SimulateGaArgs) -> CliResult {
    let cfg: SimulateGaConfig = load_config(args.config.as_deref())?;
    let n = args.n.or(cfg.n).ok_or_else(|| input_err("--n is required"))?;
    let eta = args.eta.or(cfg.eta).ok_or_else(|| input_err("--eta is required"))?;
    let steps = args.steps.or(cfg.steps).unwrap_or(400);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<f64> = match args.alpha.or(cfg.alpha) {
        Some(a) => vec![a; n],
        None => (0..n).map(|_| rng.gen_range(1e-5..1.0)).collect(),
    };
    let start: Vec<f64> = match args.x0.or(cfg.x0) {
        Some(x) => vec![x; n],
        None => (0..n).map(|_| rng.gen_range(1e-12..=1.0)).collect(),
    };
    let trajectory = simulate_ga(&costs, &start, eta, steps, true)?;

    let mut sink = Sink::open(args.out.or(cfg.out).as_deref())?;
    let mut header = String::from("t");
    for i in 1..=n {
        header.push_str(&format!(",x_{i}"));
    }
    header.push_str(",aggregate");
    writeln!(sink, "{header}")?;
    let states = trajectory.states.as_ref().expect("states were recorded");
    for (t, (state, aggregate)) in states.iter().zip(&trajectory.aggregate).enumerate() {
        let mut values = state.clone();
        values.push(*aggregate);
        write_csv_row(&mut sink, &t.to_string(), &values)?;
    }
    sink.flush()?;
    if !trajectory.clamped_steps.is_empty() {
        eprintln!(
            "positivity floor hit on {} of {} steps (first at t={})",
            trajectory.clamped_steps.len(),
            steps,
            trajectory.clamped_steps[0]
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// simulate-br
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateBrArgs {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    /// First firm's marginal cost
    #[arg(long)]
    alpha: Option<f64>,
    /// Second firm's marginal cost
    #[arg(long)]
    beta: Option<f64>,
    /// Number of update steps
    #[arg(long)]
    steps: Option<usize>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateBrConfig {
    x0: Option<f64>,
    y0: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    steps: Option<usize>,
    out: Option<PathBuf>,
}

fn simulate_br_cmd(args: SimulateBrArgs) -> CliResult {
    let cfg: SimulateBrConfig = load_config(args.config.as_deref())?;
    let x0 = args.x0.or(cfg.x0).ok_or_else(|| input_err("--x0 is required"))?;
    let y0 = args.y0.or(cfg.y0).ok_or_else(|| input_err("--y0 is required"))?;
    let alpha = args
        .alpha
        .or(cfg.alpha)
        .ok_or_else(|| input_err("--alpha is required"))?;
    let beta = args
        .beta
        .or(cfg.beta)
        .ok_or_else(|| input_err("--beta is required"))?;
    let steps = args.steps.or(cfg.steps).unwrap_or(200);

    let trajectory = simulate_br(x0, y0, alpha, beta, steps)?;
    let mut sink = Sink::open(args.out.or(cfg.out).as_deref())?;
    writeln!(sink, "t,x,y,dist,clamped")?;
    for (t, step) in trajectory.steps.iter().enumerate() {
        writeln!(
            sink,
            "{t},{},{},{},{}",
            step.x,
            step.y,
            step.dist,
            u8::from(step.clamped)
        )?;
    }
    sink.flush()?;
    if let Some(t) = trajectory.terminated_at {
        eprintln!("orbit left the model's domain at t={t} (both outputs zero)");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// certify-chaos
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CertifyChaosArgs {
    /// Number of firms
    #[arg(long)]
    n: Option<usize>,
    /// Marginal cost
    #[arg(long)]
    alpha: Option<f64>,
    /// Gradient step size
    #[arg(long)]
    eta: Option<f64>,
    /// Inverse demand elasticity; omitted = isoelastic prices
    #[arg(long)]
    gamma: Option<f64>,
    /// Also write the certificate JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertifyChaosConfig {
    n: Option<usize>,
    alpha: Option<f64>,
    eta: Option<f64>,
    gamma: Option<f64>,
    out: Option<PathBuf>,
}

fn certify_chaos_cmd(args: CertifyChaosArgs) -> CliResult {
    let cfg: CertifyChaosConfig = load_config(args.config.as_deref())?;
    let params = GaMapParams {
        n: args.n.or(cfg.n).unwrap_or(2),
        alpha: args.alpha.or(cfg.alpha).unwrap_or(1.0),
        eta: args
            .eta
            .or(cfg.eta)
            .ok_or_else(|| input_err("--eta is required"))?,
        family: match args.gamma.or(cfg.gamma) {
            Some(gamma) => MapFamily::Power { gamma },
            None => MapFamily::Isoelastic,
        },
    };
    let certificate = certify_li_yorke(&params, &CertifyOptions::default())?;
    let text = certificate.to_json();
    println!("{text}");
    if let Some(path) = args.out.or(cfg.out) {
        fs::write(&path, format!("{text}\n"))?;
    }
    if certificate.status.is_certified() {
        Ok(())
    } else {
        Err(CliError::Failure("certification did not succeed".into()))
    }
}

// ---------------------------------------------------------------------------
// min-eta
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MinEtaArgs {
    /// Elasticity grid as start:end:step, e.g. 0.5:3:0.5
    #[arg(long)]
    gamma_grid: Option<String>,
    /// Marginal cost
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of firms
    #[arg(long)]
    n: Option<usize>,
    /// Relative tolerance on the bisected threshold
    #[arg(long)]
    tol: Option<f64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinEtaConfig {
    gamma_grid: Option<String>,
    alpha: Option<f64>,
    n: Option<usize>,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(input_err(format!("grid {text:?} is not start:end:step")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| input_err(format!("grid {text:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || end < start {
        return Err(input_err(format!(
            "grid {text:?} must ascend with positive step"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let value = start + step * k as f64;
        if value > end + 1e-12 * step {
            break;
        }
        grid.push(value);
        k += 1;
    }
    Ok(grid)
}

/// Thread pool capped by MDL_THREADS (0 or unset = all cores).
fn sweep_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("MDL_THREADS") {
        Err(_) => 0,
        Ok(text) => text
            .parse::<usize>()
            .map_err(|e| input_err(format!("MDL_THREADS={text:?}: {e}")))?,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| input_err(e.to_string()))
}

fn min_eta_cmd(args: MinEtaArgs) -> CliResult {
    use rayon::prelude::*;

    let cfg: MinEtaConfig = load_config(args.config.as_deref())?;
    let grid_text = args
        .gamma_grid
        .or(cfg.gamma_grid)
        .ok_or_else(|| input_err("--gamma-grid is required"))?;
    let grid = parse_grid(&grid_text)?;
    let alpha = args.alpha.or(cfg.alpha).unwrap_or(1.0);
    let n = args.n.or(cfg.n).unwrap_or(2);
    let tol = args.tol.or(cfg.tol).unwrap_or(1e-4);

    let pool = sweep_pool()?;
    let results: Vec<(f64, Option<f64>)> = pool.install(|| {
        grid.par_iter()
            .map(|&gamma| {
                let scan = min_chaotic_eta(MapFamily::Power { gamma }, alpha, n, tol);
                (gamma, scan.ok().and_then(|s| s.eta_min))
            })
            .collect()
    });

    let mut sink = Sink::open(args.out.or(cfg.out).as_deref())?;
    writeln!(sink, "gamma,eta_min")?;
    let mut missing = 0;
    for (gamma, eta_min) in &results {
        match eta_min {
            Some(v) => writeln!(sink, "{gamma},{v}")?,
            None => {
                missing += 1;
                writeln!(sink, "{gamma},nan")?;
            }
        }
    }
    sink.flush()?;
    if missing == 0 {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{missing} of {} grid points have no certified step size",
            results.len()
        )))
    }
}

// ---------------------------------------------------------------------------
// check-equilibrium
// ---------------------------------------------------------------------------

#[derive(Args)]
struct CheckEquilibriumArgs {
    /// Market instance (JSON)
    #[arg(long)]
    economy: Option<PathBuf>,
    /// Spending matrix (JSON nested array)
    #[arg(long)]
    spending: Option<PathBuf>,
    /// Which first-order conditions to check
    #[arg(long, value_parser = ["ne", "me"])]
    kind: Option<String>,
    /// Residual threshold for the exit status
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckEquilibriumConfig {
    economy: Option<PathBuf>,
    spending: Option<PathBuf>,
    kind: Option<String>,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

fn check_equilibrium_cmd(args: CheckEquilibriumArgs) -> CliResult {
    let cfg: CheckEquilibriumConfig = load_config(args.config.as_deref())?;
    let economy = load_economy(
        &args
            .economy
            .or(cfg.economy)
            .ok_or_else(|| input_err("--economy is required"))?,
    )?;
    let spending_path = args
        .spending
        .or(cfg.spending)
        .ok_or_else(|| input_err("--spending is required"))?;
    let text = fs::read_to_string(&spending_path).map_err(|e| {
        input_err(format!(
            "cannot read spending {}: {e}",
            spending_path.display()
        ))
    })?;
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| input_err(format!("spending {}: {e}", spending_path.display())))?;
    let state = SpendingState::from_spending(&economy, Mat::from_rows(&rows)?)?;

    let kind = match args.kind.or(cfg.kind).as_deref().unwrap_or("me") {
        "ne" => ReportKind::Ne,
        _ => ReportKind::Me,
    };
    let tol = args.tol.or(cfg.tol).unwrap_or(1e-8);
    let report = assess(&economy, &state, kind)?;

    println!("kind          : {:?}", report.kind);
    println!("residual      : {}", report.residual);
    println!("delta         : {}", report.delta);
    match report.delta_prime {
        DeltaPrimeBound::Bound(v) => println!("delta_prime   : {v}"),
        DeltaPrimeBound::Undefined => println!("delta_prime   : undefined"),
    }
    println!("firm  multiplier        bang_per_buck");
    for i in 0..economy.firms() {
        let c = report.per_firm_c[i]
            .map(|v| v.to_string())
            .unwrap_or_else(|| "-".into());
        println!("{i:<5} {c:<17} {}", report.bang_per_buck[i]);
    }
    if let Some(path) = args.out.or(cfg.out) {
        fs::write(&path, format!("{}\n", report.to_json()))?;
    }
    if report.residual <= tol {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "residual {} exceeds tolerance {tol}",
            report.residual
        )))
    }
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

#[derive(Args)]
struct StabilityArgs {
    /// First firm's marginal cost
    #[arg(long)]
    alpha: Option<f64>,
    /// Second firm's marginal cost
    #[arg(long)]
    beta: Option<f64>,
    /// Also write the report JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilityConfig {
    alpha: Option<f64>,
    beta: Option<f64>,
    out: Option<PathBuf>,
}

fn stability_cmd(args: StabilityArgs) -> CliResult {
    let cfg: StabilityConfig = load_config(args.config.as_deref())?;
    let alpha = args
        .alpha
        .or(cfg.alpha)
        .ok_or_else(|| input_err("--alpha is required"))?;
    let beta = args
        .beta
        .or(cfg.beta)
        .ok_or_else(|| input_err("--beta is required"))?;
    let report = classify_stability(alpha, beta)?;
    let text = report.to_json();
    println!("{text}");
    if let Some(path) = args.out.or(cfg.out) {
        fs::write(&path, format!("{text}\n"))?;
    }
    Ok(())
}
