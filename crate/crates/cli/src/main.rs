use anyhow::{Context, Result};
use clap::Parser;
use psh_cli::{run_config, Command, Format, RunConfig, EXIT_ERROR};
use std::path::PathBuf;

/// Poletsky–Stessin Hardy spaces on the disc: measures, norms, factorization, composition.
#[derive(Parser, Debug)]
#[command(name = "psh", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file with defaults for any flag below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// green, green:<w>, paper-u, or a JSON exhaustion spec file.
    #[arg(long)]
    exhaustion: Option<String>,
    /// disc or poly:<eps>.
    #[arg(long)]
    frame: Option<String>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "q-grid")]
    q_grid: Option<String>,
    #[arg(long)]
    zeros: Option<String>,
    #[arg(long)]
    symbol: Option<String>,
    /// lj-check test function: abs2, one, harmonic.
    #[arg(long)]
    phi: Option<String>,
    /// Comma-separated pseudosphere levels for lj-check.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Comma-separated dilation radii for approx.
    #[arg(long)]
    rho: Option<String>,
    /// reproduce case id or "all".
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Assert a verdict: holds/bounded/member or fails/unbounded/nonmember; exit 2 when it is not met.
    #[arg(long)]
    expect: Option<String>,
    /// Stamp the output header with the current time.
    #[arg(long)]
    timestamp: bool,
}

fn resolve(cli: Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(cli.command);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        cfg.merge_toml(&text)?;
    }
    macro_rules! set {
        ($($field:ident),*) => { $(if let Some(v) = cli.$field { cfg.$field = v; })* };
    }
    set!(exhaustion, frame, grid, p, family, q_grid, symbol, phi, r, rho, case, tol, format);
    if cli.f.is_some() {
        cfg.f = cli.f;
    }
    if cli.zeros.is_some() {
        cfg.zeros = cli.zeros;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if cli.expect.is_some() {
        cfg.expect = cli.expect;
    }
    cfg.timestamp |= cli.timestamp;
    Ok(cfg)
}

fn threads() -> Result<()> {
    if let Ok(n) = std::env::var("PSH_THREADS") {
        let n: usize = n.trim().parse().context("PSH_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match threads().and_then(|_| resolve(cli)).and_then(|cfg| run_config(&cfg)) {
        Ok((code, text)) => {
            print!("{text}");
            code
        }
        Err(e) => {
            eprintln!("psh: {e:#}");
            EXIT_ERROR
        }
    };
    std::process::exit(code);
}
