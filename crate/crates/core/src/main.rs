use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lpadic::harness::{
    cmd_classify, cmd_lp, cmd_scan, cmd_tate, cmd_verify, exit_code_for, ClassifyConfig, Env, LpConfig, Routes,
    ScanConfig, SuiteConfig, TateConfig, VerificationReport,
};
use lpadic::Result;

#[derive(Parser)]
#[command(name = "lpadic", version, about = "p-adic L-functions, trivial zeros and L-invariants")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Report path; `.csv` selects CSV, anything else canonical JSON.
    /// Without it the JSON report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for the Bernoulli and measure caches.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate L_p(ηω^m, s) and its derivative.
    Lp {
        #[arg(long)]
        p: u64,
        /// Character label: `quad3`, `quad4`, or `N.k1.k2...`.
        #[arg(long = "char")]
        char_label: String,
        #[arg(long, default_value_t = 1)]
        m: i64,
        /// Points `a` or `a/b`; repeat or separate with commas.
        #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
        s: Vec<String>,
        #[arg(long, default_value_t = 20)]
        prec: u32,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, default_value = "both")]
        routes: Routes,
    },
    /// Derivatives and L-invariants at every trivial zero in a range.
    Scan {
        /// Largest conductor.
        #[arg(long = "N", default_value_t = 12)]
        n: u64,
        /// Largest prime.
        #[arg(long, default_value_t = 13)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        prec: u32,
        #[arg(long)]
        trunc: Option<usize>,
        #[arg(long, default_value = "measure")]
        routes: Routes,
        /// Skip the Γ_p formula column.
        #[arg(long)]
        no_fg: bool,
    },
    /// Run the acceptance suite.
    Verify {
        /// Conductor bound of the interpolation grid.
        #[arg(long = "N")]
        n: Option<u64>,
        /// Primes of the interpolation grid.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<u64>>,
        /// Conductor bound of the trivial-zero scan.
        #[arg(long = "scan-N")]
        scan_n: Option<u64>,
        /// Prime bound of the trivial-zero scan.
        #[arg(long)]
        scan_p: Option<u64>,
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u8>>,
        #[arg(long, default_value_t = 20)]
        prec: u32,
        #[arg(long)]
        trunc: Option<usize>,
        /// Negate every measure; the moment checks must then fail.
        #[arg(long, hide = true)]
        inject_sign_flip: bool,
    },
    /// Trivial-zero classification of newform local data.
    Classify {
        /// JSON file with one record or a list; defaults to the built-in fixtures.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long = "char")]
        char_label: Option<String>,
        #[arg(long, default_value_t = 20)]
        prec: u32,
    },
    /// Tate parameter and ℒ_FM.
    Tate {
        #[arg(long)]
        p: u64,
        /// A j-invariant `a` or `a/b` with v_p(j) < 0; without it, random round trips.
        #[arg(long, allow_hyphen_values = true)]
        j: Option<String>,
        #[arg(long, default_value_t = 20)]
        prec: u32,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<VerificationReport> {
    let env = || Env::new(cli.common.jobs, cli.common.cache_dir.clone());
    match cli.cmd {
        Cmd::Lp { p, char_label, m, s, prec, trunc, routes } => {
            cmd_lp(&LpConfig { p, char_label, m, s, prec, trunc, routes }, &env()?)
        }
        Cmd::Scan { n, p, prec, trunc, routes, no_fg } => {
            cmd_scan(&ScanConfig { n_max: n, p_max: p, prec, trunc, routes, fg: !no_fg }, &env()?)
        }
        Cmd::Verify { n, p, scan_n, scan_p, criteria, prec, trunc, inject_sign_flip } => {
            let d = SuiteConfig::default();
            let cfg = SuiteConfig {
                prec,
                trunc,
                grid_n: n.unwrap_or(d.grid_n),
                grid_primes: p.unwrap_or(d.grid_primes),
                scan_n: scan_n.unwrap_or(d.scan_n),
                scan_p: scan_p.unwrap_or(d.scan_p),
                criteria: criteria.unwrap_or(d.criteria),
                seed: d.seed,
            };
            let mut e = env()?;
            if inject_sign_flip {
                e = e.with_sign_flip();
            }
            let (report, outcomes) = cmd_verify(&cfg, &e)?;
            for o in &outcomes {
                eprintln!("{}", o.line());
            }
            Ok(report)
        }
        Cmd::Classify { data, char_label, prec } => cmd_classify(&ClassifyConfig { data, char_label, prec }),
        Cmd::Tate { p, j, prec, samples, seed } => cmd_tate(&TateConfig { p, j, prec, samples, seed }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    let written = match &out {
        Some(path) => report.write(path),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code_for(&e) as u8);
    }
    eprintln!(
        "{}: {} checks ({} failed), {} rows ({} failed)",
        report.suite,
        report.summary.checks,
        report.summary.checks_failed,
        report.summary.rows,
        report.summary.rows_failed
    );
    ExitCode::from(if report.passed() { 0 } else { 1 })
}
