mod config;
mod input;
mod suites;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use weilrep::metaplectic::{cocycle, cocycle_form, psi2_tilde};
use weilrep::rational::parse_q;
use weilrep::weilfactor::{hilbert_sign, weil_factor, DEFAULT_LAMBDA_MAX};
use weilrep::{Error, Result};

use config::{parse_ring, RunConfig};

#[derive(Parser)]
#[command(name = "weilrep", version, about = "Exact Weil representation computations over Q_p")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Odd prime p of the base field Q_p
    #[arg(long, global = true, default_value_t = 3)]
    p: u64,
    /// Conductor l of the character chi(x) = chi0(p^-l x)
    #[arg(long, global = true, default_value_t = 0, allow_hyphen_values = true)]
    conductor: i64,
    /// Coefficient ring: cyclotomic, gf:ELL or gf:ELL:K
    #[arg(long, global = true, default_value = "cyclotomic")]
    ring: String,
    /// Dimension n of X for randomized suites
    #[arg(long, global = true, default_value_t = 1)]
    dim: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for suite cases
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_LAMBDA_MAX)]
    lambda_max: i64,
    /// Largest coset table a Schwartz function may hold
    #[arg(long, global = true, default_value_t = 100_000)]
    table_cap: u64,
    /// Probe indicators of h + p^k O^n are used for k <= this depth
    #[arg(long, global = true, default_value_t = 1)]
    probe_depth: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Weil factor of a quadratic form
    Gamma {
        /// Diagonal entries ("1,-2,3/5") or a Gram matrix as JSON
        #[arg(long, allow_hyphen_values = true, conflicts_with = "gram", required_unless_present = "gram")]
        form: Option<String>,
        /// JSON file (or inline JSON) holding a symmetric Gram matrix
        #[arg(long)]
        gram: Option<String>,
    },
    /// Hilbert symbol (a, b)_p
    Hilbert {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
    },
    /// Cocycle gamma(f0) of two elements of Omega (JSON matrices, inline or files)
    Cocycle {
        #[arg(allow_hyphen_values = true)]
        sigma: String,
        #[arg(allow_hyphen_values = true)]
        sigma2: String,
    },
    /// psi2 of the r-lift of an element of Omega
    Psi2 {
        #[arg(allow_hyphen_values = true)]
        sigma: String,
    },
    /// Run a named verification suite
    Verify { suite: String },
}

fn config(g: &GlobalArgs) -> Result<RunConfig> {
    let cfg = RunConfig {
        p: g.p,
        conductor: g.conductor,
        ring: parse_ring(&g.ring, g.p)?,
        dim: g.dim,
        seed: g.seed,
        jobs: g.jobs.max(1),
        lambda_max: g.lambda_max,
        table_cap: g.table_cap,
        probe_depth: g.probe_depth,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Report on stdout, one-line summary on stderr, and the exit code.
fn run(cli: &Cli) -> Result<(Value, String, u8)> {
    let cfg = config(&cli.global)?;
    match &cli.cmd {
        Command::Gamma { form, gram } => {
            let f = input::parse_form(form.as_deref().or(gram.as_deref()).unwrap_or_default())?;
            let c = cfg.context()?;
            let res = weil_factor(&f, &c, cfg.lambda_max)?;
            let order = res.value.multiplicative_order();
            let summary = format!("gamma = {}", res.value.pretty());
            let report = json!({
                "command": "gamma",
                "config": cfg.to_json(),
                "form": f.to_json(),
                "gamma": res.value.pretty(),
                "gamma_exact": res.value.to_json(),
                "order_of_gamma": order,
                "lambda_used": res.lambda_used,
                "ring": c.ring.describe(),
            });
            Ok((report, summary, 0))
        }
        Command::Hilbert { a, b } => {
            let (a, b) = (parse_q(a)?, parse_q(b)?);
            let h = hilbert_sign(&a, &b, cfg.p)?;
            let report = json!({ "command": "hilbert", "config": cfg.to_json(), "a": a.to_string(), "b": b.to_string(), "hilbert": h });
            Ok((report, format!("({a}, {b})_{} = {h}", cfg.p), 0))
        }
        Command::Cocycle { sigma, sigma2 } => {
            let (s, s2) = (input::parse_symplectic(sigma)?, input::parse_symplectic(sigma2)?);
            let c = cfg.context()?;
            let f0 = cocycle_form(&s, &s2)?;
            let g = cocycle(&s, &s2, &c, cfg.lambda_max)?;
            let report = json!({
                "command": "cocycle",
                "config": cfg.to_json(),
                "sigma": s.to_json(),
                "sigma2": s2.to_json(),
                "form": f0.to_json(),
                "cocycle": g.pretty(),
                "cocycle_exact": g.to_json(),
            });
            Ok((report, format!("cocycle = {}", g.pretty()), 0))
        }
        Command::Psi2 { sigma } => {
            let s = input::parse_symplectic(sigma)?;
            let c = cfg.context()?;
            let v = psi2_tilde(&s, &c, cfg.lambda_max)?;
            let report = json!({ "command": "psi2", "config": cfg.to_json(), "sigma": s.to_json(), "psi2": v.pretty(), "psi2_exact": v.to_json() });
            Ok((report, format!("psi2 = {}", v.pretty()), 0))
        }
        Command::Verify { suite } => {
            let results = suites::run(suites::build(suite, &cfg)?, &cfg)?;
            let failed: Vec<_> = results.iter().filter(|r| !r.passed()).collect();
            let skipped = results.iter().filter(|r| matches!(r.outcome, Ok(suites::Outcome::Skip(_)))).count();
            // resource errors only: exit 3; any wrong identity or other error: exit 1
            let code = if failed.is_empty() {
                0
            } else if failed.iter().all(|r| matches!(&r.outcome, Err(e) if e.exit_code() == 3)) {
                3
            } else {
                1
            };
            let summary = format!(
                "suite {suite}: {} ({} cases, {} failed, {skipped} skipped)",
                if code == 0 { "PASS" } else { "FAIL" },
                results.len(),
                failed.len()
            );
            let report = json!({
                "command": "verify",
                "suite": suite,
                "config": cfg.to_json(),
                "passed": code == 0,
                "cases": results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            });
            Ok((report, summary, code))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, summary, code)) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            eprintln!("{summary}");
            ExitCode::from(code)
        }
        Err(e) => {
            println!("{}", json!({ "error": e.to_string() }));
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
