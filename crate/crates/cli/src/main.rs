use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use levy_domains::classify::suites::{run_log_moment, run_monotonicity, SuiteReport};
use levy_domains::classify::{classify_with, sign_set_mask, ClassifyOptions, DomainVerdict, Status};
use levy_domains::counterexample::{build_mu, build_mu_tilde, default_directions, verify_table};
use levy_domains::integrand::{IntegrandFn, Side};
use levy_domains::schema::{parse_triplet, triplet_to_json, Output, RunMeta};
use levy_domains::simulate::{monte_carlo, MonteCarloConfig, DEFAULT_DELTA};
use levy_domains::triplet::Triplet;

const THREADS_ENV: &str = "LEVY_DOMAINS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "levy-domains", version, about = "Domains of improper stochastic integrals with respect to Levy processes")]
struct Cli {
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Leave the timestamp out of the output metadata.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Membership of a triplet in the four domains for an integrand.
    Classify(ClassifyArgs),
    /// Explicit counterexample measures.
    Counterexample {
        #[command(subcommand)]
        which: CounterexampleCmd,
    },
    /// Monte Carlo of the integral process and its sign-set parts.
    Simulate(SimulateArgs),
    /// Randomized checks of the monotonicity results.
    VerifyTheorems(VerifyArgs),
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    integrand: String,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long)]
    csv: bool,
    /// Largest checkpoint exponent `k` in `a·2^k`.
    #[arg(long)]
    checkpoint_exp: Option<i32>,
    /// Skip numerical evidence when a closed-form rule decides.
    #[arg(long)]
    light: bool,
}

#[derive(Subcommand, Debug)]
enum CounterexampleCmd {
    /// The block measure with alternating tail sums.
    E2 {
        /// Add the extra atom at radius 2 and use the location without compensation.
        #[arg(long)]
        tilde: bool,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Write the triplet as JSON to this path.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Print the identity table.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    integrand: String,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated increasing times.
    #[arg(long, value_delimiter = ',', required = true)]
    checkpoints: Vec<f64>,
    /// `from-h`: split by the sign of the drift function.
    #[arg(long)]
    masks: Option<String>,
    /// Coordinate of the drift function used by `--masks from-h`.
    #[arg(long, default_value_t = 0)]
    coordinate: usize,
    /// Beyond this time small jumps are replaced by a Gaussian.
    #[arg(long)]
    exact_horizon: Option<f64>,
    /// Threshold factor of the large-horizon windows.
    #[arg(long)]
    delta: Option<f64>,
    /// Write the statistics table here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SuiteName {
    Monotonicity,
    LogMoment,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteName,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Defaults read from `--config`; command-line flags win.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    format: Option<Format>,
    seed: Option<u64>,
    threads: Option<usize>,
    paths: Option<usize>,
    draws: Option<usize>,
    checkpoint_exp: Option<i32>,
    exact_horizon: Option<f64>,
    delta: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))
}

fn setup_threads(cfg: &RunConfig) -> Result<()> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().with_context(|| format!("{THREADS_ENV}={v} is not a count"))?),
        Err(_) => None,
    };
    let cap = match (env, cfg.threads) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if let Some(n) = cap.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    Ok(())
}

fn config_hash(settings: &Value) -> String {
    // serde_json maps are ordered, so this is canonical
    let bytes = serde_json::to_vec(settings).unwrap_or_default();
    hex::encode(Sha256::digest(bytes))
}

fn meta(command: &str, seed: Option<u64>, settings: Value, no_timestamp: bool) -> RunMeta {
    RunMeta {
        tool: "levy-domains".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        seed,
        config_hash: config_hash(&settings),
        settings,
        timestamp: (!no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    }
}

fn print_json<T: Serialize>(out: &Output<T>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, out)?;
    writeln!(stdout)?;
    Ok(())
}

fn read_triplet(path: &Path) -> Result<Triplet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading measure {}", path.display()))?;
    parse_triplet(&text).with_context(|| format!("parsing {}", path.display()))
}

fn statuses(v: &DomainVerdict) -> [(&'static str, Status); 4] {
    [("D0", v.d0), ("D", v.d), ("Dc", v.dc), ("De", v.de)]
}

fn classify_cmd(cli: &Cli, cfg: &RunConfig, args: &ClassifyArgs) -> Result<ExitCode> {
    let format = if args.csv {
        Format::Csv
    } else if args.json {
        Format::Json
    } else {
        cli.format.or(cfg.format).unwrap_or(Format::Json)
    };
    let mu = read_triplet(&args.measure)?;
    let f = IntegrandFn::parse(&args.integrand)?;
    let mut opts = if args.light { ClassifyOptions::light() } else { ClassifyOptions::default() };
    if let Some(k) = args.checkpoint_exp.or(cfg.checkpoint_exp) {
        opts.checkpoint_exp = k;
    }
    let verdict = classify_with(&mu, &f, opts);
    let settings = json!({
        "command": "classify",
        "measure": mu,
        "integrand": f.to_spec(),
        "checkpoint_exp": opts.checkpoint_exp,
        "numeric_evidence": opts.numeric_evidence,
    });
    let meta = meta("classify", None, settings, cli.no_timestamp);
    match format {
        Format::Json => print_json(&Output { meta, result: &verdict })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["class", "status", "config_hash", "version"])?;
            for (name, s) in statuses(&verdict) {
                w.write_record([name, &format!("{s:?}"), &meta.config_hash, &meta.version])?;
            }
            w.flush()?;
        }
        Format::Human => {
            for (name, s) in statuses(&verdict) {
                println!("{name:>3}: {s:?}");
            }
            if let Some(q) = &verdict.q {
                println!("  q: {q:?}");
            }
            for e in &verdict.evidence {
                println!("  - {}", serde_json::to_string(e)?);
            }
            println!("version {} config {}", meta.version, meta.config_hash);
        }
    }
    let undetermined = statuses(&verdict).iter().any(|(_, s)| *s == Status::Undetermined);
    Ok(if undetermined { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn counterexample_cmd(cli: &Cli, cfg: &RunConfig, which: &CounterexampleCmd) -> Result<ExitCode> {
    let CounterexampleCmd::E2 { tilde, dim, emit, verify } = which;
    if *dim == 0 {
        bail!("--dim must be at least 1");
    }
    let dirs = default_directions(*dim);
    let mu = if *tilde { build_mu_tilde(dirs.clone())? } else { build_mu(dirs.clone(), None)? };
    if let Some(path) = emit {
        fs::write(path, triplet_to_json(&mu)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let table = if *verify { Some(verify_table(&dirs)?) } else { None };
    let settings = json!({"command": "counterexample e2", "tilde": tilde, "dim": dim, "verify": verify});
    let meta = meta("counterexample e2", None, settings, cli.no_timestamp);
    let failed = table.as_ref().is_some_and(|t| t.iter().any(|r| !r.pass));
    match cli.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Json => print_json(&Output { meta, result: json!({"measure": mu, "identities": table}) })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for r in table.iter().flatten() {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Human => {
            for r in table.iter().flatten() {
                let mark = if r.pass { "PASS" } else { "FAIL" };
                println!("{mark} {:<40} value {:+.12e} expected {:+.12e} error {:.2e} (tol {:.0e})", r.name, r.value, r.expected, r.error, r.tolerance);
            }
            if table.is_none() {
                println!("{}", triplet_to_json(&mu)?);
            }
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn simulate_cmd(cli: &Cli, cfg: &RunConfig, args: &SimulateArgs) -> Result<ExitCode> {
    let mu = read_triplet(&args.measure)?;
    let f = IntegrandFn::parse(&args.integrand)?;
    let mut checkpoints = args.checkpoints.clone();
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        bail!("--checkpoints must be positive, finite and strictly increasing");
    }
    checkpoints.dedup();
    let masks = match args.masks.as_deref() {
        None => Vec::new(),
        Some("from-h") => {
            if args.coordinate >= mu.dim {
                bail!("--coordinate {} out of range for dimension {}", args.coordinate, mu.dim);
            }
            [("plus", Side::Plus), ("minus", Side::Minus), ("zero", Side::Zero)]
                .into_iter()
                .map(|(label, side)| (label.to_string(), sign_set_mask(&mu, &f, args.coordinate, side)))
                .collect()
        }
        Some(other) => bail!("unknown --masks value `{other}` (expected from-h)"),
    };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let n_paths = args.paths.or(cfg.paths).unwrap_or(1000);
    let exact_horizon = args.exact_horizon.or(cfg.exact_horizon);
    let delta = args.delta.or(cfg.delta).unwrap_or(DEFAULT_DELTA);
    let mc = MonteCarloConfig { n_paths, seed, checkpoints: checkpoints.clone(), masks, exact_horizon, delta };
    let report = monte_carlo(&mu, &f, &mc)?;
    let settings = json!({
        "command": "simulate",
        "measure": mu,
        "integrand": f.to_spec(),
        "paths": n_paths,
        "checkpoints": checkpoints,
        "masks": args.masks,
        "coordinate": args.coordinate,
        "exact_horizon": exact_horizon,
        "delta": delta,
    });
    let meta = meta("simulate", Some(seed), settings, cli.no_timestamp);
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        report.write_csv(file)?;
    }
    match cli.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Json => print_json(&Output { meta, result: &report })?,
        Format::Csv => report.write_csv(std::io::stdout().lock())?,
        Format::Human => {
            println!("{n_paths} paths, seed {seed}, truncation bound {:.3e}", report.truncation_bound);
            for r in &report.rows {
                println!(
                    "t={:<12} {:<6} j={} mean {:+.5} std {:.5} ci [{:+.5}, {:+.5}] gamma_t {:+.5}",
                    r.t, r.mask, r.coordinate, r.mean, r.std, r.ci_lo, r.ci_hi, r.gamma_t
                );
            }
            println!("version {} config {}", meta.version, meta.config_hash);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(cli: &Cli, cfg: &RunConfig, args: &VerifyArgs) -> Result<ExitCode> {
    let seed = args.seed.or(cfg.seed).unwrap_or(7);
    let draws = args.draws.or(cfg.draws);
    let mut reports: Vec<SuiteReport> = Vec::new();
    if matches!(args.suite, SuiteName::Monotonicity | SuiteName::All) {
        reports.push(run_monotonicity(draws.unwrap_or(200), seed)?);
    }
    if matches!(args.suite, SuiteName::LogMoment | SuiteName::All) {
        reports.push(run_log_moment(draws.unwrap_or(50), seed)?);
    }
    let settings = json!({"command": "verify-theorems", "suite": args.suite, "draws": draws});
    let meta = meta("verify-theorems", Some(seed), settings, cli.no_timestamp);
    let passed = reports.iter().all(SuiteReport::passed);
    match cli.format.or(cfg.format).unwrap_or(Format::Human) {
        Format::Json => print_json(&Output { meta, result: &reports })?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["suite", "check", "applicable", "undetermined", "violations", "passed"])?;
            for r in &reports {
                for c in &r.checks {
                    w.write_record([
                        r.suite.clone(),
                        c.name.clone(),
                        c.applicable.to_string(),
                        c.undetermined.to_string(),
                        c.violations.len().to_string(),
                        c.passed().to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
        Format::Human => {
            for r in &reports {
                println!("suite {} ({} draws, seed {}): undetermined share {:.3}", r.suite, r.draws, r.seed, r.undetermined_share());
                for c in &r.checks {
                    let mark = if c.passed() { "PASS" } else { "FAIL" };
                    println!("  {mark} {} (applicable {}, undetermined {})", c.name, c.applicable, c.undetermined);
                    for v in &c.violations {
                        println!("       {v}");
                    }
                }
            }
            println!("version {} config {}", meta.version, meta.config_hash);
        }
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli.config.as_deref())?;
    setup_threads(&cfg)?;
    match &cli.command {
        Command::Classify(a) => classify_cmd(cli, &cfg, a),
        Command::Counterexample { which } => counterexample_cmd(cli, &cfg, which),
        Command::Simulate(a) => simulate_cmd(cli, &cfg, a),
        Command::VerifyTheorems(a) => verify_cmd(cli, &cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
