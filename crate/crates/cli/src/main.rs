//! Batch harness for the thin-shell experiments.
//!
//! Exit codes: 0 = all assertions passed, 1 = a statistical assertion failed,
//! 2 = configuration or runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use thinshell_cli::config::{load_config, ScanConfig};
use thinshell_cli::diag::{haar_diagnostics, net_diagnostics};
use thinshell_cli::fit::fit_power_law;
use thinshell_cli::report::{emit_report, parse_csv, Format};
use thinshell_cli::scan::run_scan;
use thinshell_cli::CliError;

#[derive(Parser)]
#[command(
    name = "thinshell",
    about = "Scans of thin-shell, marginal-CLT, flatness and SO(n) concentration statistics over convex bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scan described by a JSON config and emit reports.
    Scan {
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override samples_per_run.
        #[arg(long)]
        samples: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of csv,json,svg.
        #[arg(long, default_value = "csv,json,svg")]
        formats: String,
    },
    /// Refit a power law from a previously emitted CSV report.
    Fit {
        csv: PathBuf,
        /// Row statistic to fit (e.g. shell_width).
        #[arg(long)]
        statistic: String,
        /// Restrict to one body.
        #[arg(long)]
        body: Option<String>,
    },
    /// Run the log-concave lemma property suites.
    CheckLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Haar rotation diagnostics: residuals and the sphere-coordinate KS test.
    Haar {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Epsilon-net diagnostics: cardinality and probe coverage.
    Net {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20000)]
        probes: usize,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("THINSHELL_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
}

fn cmd_scan(
    config_path: &PathBuf,
    seed: Option<u64>,
    samples: Option<usize>,
    out: Option<PathBuf>,
    formats: &str,
) -> Result<u8, CliError> {
    let mut config: ScanConfig = load_config(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(s) = samples {
        config.samples_per_run = s;
    }
    if let Some(dir) = out {
        config.output_dir = dir;
    }
    config.validate()?;
    let formats = Format::parse_list(formats)?;
    let report = run_scan(&config)?;
    let written = emit_report(&report, &formats, &config.output_dir, &config.hash())?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    let mut failures = 0;
    for row in report.error_rows() {
        failures += 1;
        eprintln!(
            "cell error: {}/{}/n={}: {}",
            row.suite,
            row.body,
            row.n,
            row.message.as_deref().unwrap_or("")
        );
    }
    println!(
        "{} rows, {} fits, {} cell failures",
        report.rows.len(),
        report.fits.len(),
        failures
    );
    for fit in &report.fits {
        println!(
            "fit {}: value = {:.5} * n^-{:.4} (r2 = {:.5})",
            fit.statistic, fit.c_hat, fit.kappa_hat, fit.r_squared
        );
    }
    Ok(if failures > 0 { 1 } else { 0 })
}

fn cmd_fit(csv: &PathBuf, statistic: &str, body: Option<&str>) -> Result<u8, CliError> {
    let text = std::fs::read_to_string(csv)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", csv.display())))?;
    let rows = parse_csv(&text)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.statistic == statistic && body.is_none_or(|b| r.body == b))
        .map(|r| (r.n as f64, r.value))
        .collect();
    if points.is_empty() {
        return Err(CliError::Config(format!(
            "no rows with statistic {statistic:?}{}",
            body.map(|b| format!(" and body {b:?}")).unwrap_or_default()
        )));
    }
    let fit = fit_power_law(&points)?;
    println!(
        "{statistic}{}: value = {:.6} * n^-{:.5} (r2 = {:.6}, {} rows)",
        body.map(|b| format!("[{b}]")).unwrap_or_default(),
        fit.c_hat,
        fit.kappa_hat,
        fit.r_squared,
        points.len()
    );
    Ok(0)
}

fn cmd_check_lemmas(seed: u64) -> Result<u8, CliError> {
    use thinshell::suites;
    let runners: Vec<(&str, Box<dyn Fn(u64) -> thinshell::Result<suites::SuiteOutcome>>)> = vec![
        ("fradelizi", Box::new(|s| suites::fradelizi_suite(200, s))),
        ("level-set-mass", Box::new(|s| suites::level_set_mass_suite(200, s))),
        ("level-set-radius", Box::new(|s| suites::level_set_radius_suite(60, s))),
        ("decay", Box::new(|s| suites::decay_suite(60, s))),
        ("monotone", Box::new(|s| suites::monotone_suite(500, s))),
        ("tilted", Box::new(|s| suites::tilted_suite(200, s))),
        ("gradient", Box::new(|s| suites::gradient_suite(24, s))),
        ("log-laplace", Box::new(|s| suites::log_laplace_convexity_suite(60, s))),
        ("tp-mass", Box::new(|s| suites::tp_mass_suite(80, s))),
    ];
    let mut failed = false;
    for (_, run) in &runners {
        let start = std::time::Instant::now();
        let o = run(seed)?;
        let status = if o.passed() { "PASS" } else { "FAIL" };
        println!("[{status}] {} ({} cases, {:.1}s)", o.name, o.cases, start.elapsed().as_secs_f64());
        for (key, value) in &o.logged {
            println!("    {key} = {value:.6}");
        }
        for v in o.violations.iter().take(5) {
            println!("    violation: {v}");
        }
        if o.violations.len() > 5 {
            println!("    ... and {} more", o.violations.len() - 5);
        }
        failed |= !o.passed();
    }
    Ok(if failed { 1 } else { 0 })
}

fn cmd_haar(n: usize, trials: usize, seed: u64) -> Result<u8, CliError> {
    let d = haar_diagnostics(n, trials, seed);
    println!("haar n = {n}, trials = {trials}");
    println!("  max orthogonality residual = {:.3e}", d.max_orthogonality_residual);
    println!("  max |det - 1|              = {:.3e}", d.max_det_deviation);
    println!("  KS vs sphere coordinate    = {:.5} (p = {:.4})", d.ks_statistic, d.ks_p_value);
    let ok = d.max_orthogonality_residual <= 1e-12
        && d.max_det_deviation <= 1e-10
        && d.ks_p_value > 0.01;
    Ok(if ok { 0 } else { 1 })
}

fn cmd_net(dim: usize, radius: f64, eps: f64, seed: u64, probes: usize) -> Result<u8, CliError> {
    let d = net_diagnostics(dim, radius, eps, seed, probes)?;
    println!("net dim = {dim}, radius = {radius}, eps = {eps}");
    println!("  cardinality       = {}", d.cardinality);
    println!("  volumetric bound  = {:.1}", d.volumetric_bound);
    println!("  coverage probes   = {} ({} uncovered)", d.probes, d.uncovered);
    Ok(if d.uncovered == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scan { config, seed, samples, out, formats } => {
            cmd_scan(config, *seed, *samples, out.clone(), formats)
        }
        Command::Fit { csv, statistic, body } => cmd_fit(csv, statistic, body.as_deref()),
        Command::CheckLemmas { seed } => cmd_check_lemmas(*seed),
        Command::Haar { n, trials, seed } => cmd_haar(*n, *trials, *seed),
        Command::Net { dim, radius, eps, seed, probes } => {
            cmd_net(*dim, *radius, *eps, *seed, *probes)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
