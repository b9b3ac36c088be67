//! igusa: counts solutions of polynomial congruences modulo prime powers,
//! reconstructs the associated zeta functions, and verifies their
//! divisibility and pole-bound properties.

mod config;
mod parse;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::Ordering;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use igusa_core::counting::Algorithm;

use config::{load_corpus, parse_rational, JobConfig};
use run::{CliFailure, CmdOutput, ReconFlags, STOP};

#[derive(Parser)]
#[command(
    name = "igusa",
    version,
    about = "Exact counting of polynomial congruence solutions mod prime powers, \
             Poincaré/zeta series reconstruction, pole bounds and character twists"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// Polynomial, e.g. "x*y + z^2" or "x1^2*x2 - 3" (variables x1..x9;
    /// x,y,z,w alias x1..x4)
    #[arg(long)]
    poly: String,
    /// The prime p
    #[arg(long)]
    p: u64,
    /// Declared dimension; defaults to the variable count, larger values
    /// add dummy variables
    #[arg(long)]
    n: Option<u32>,
    /// Highest level i to compute
    #[arg(long)]
    imax: u32,
    /// Counting algorithm: auto | brute | lift | stratified
    #[arg(long)]
    algorithm: Option<String>,
    /// Evaluation-step budget (default: $IGUSA_BUDGET or 100000000)
    #[arg(long)]
    budget: Option<u64>,
    /// Worker threads (default: all cores; results are identical either way)
    #[arg(long)]
    workers: Option<usize>,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a flat CSV projection to this file
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReconArgs {
    /// Numerator degree bound (default: split of the available length)
    #[arg(long)]
    num_deg: Option<usize>,
    /// Denominator degree bound
    #[arg(long)]
    den_deg: Option<usize>,
    /// Guard coefficients corroborating the recurrence (default 4)
    #[arg(long)]
    guard: Option<usize>,
    /// Largest nu tried in exact factor peeling (default 4n)
    #[arg(long)]
    nu_max: Option<u32>,
    /// Largest t-exponent N tried in exact factor peeling (default 2n)
    #[arg(long)]
    n_exp_max: Option<u32>,
}

impl ReconArgs {
    fn flags(&self) -> ReconFlags {
        ReconFlags {
            num_deg: self.num_deg,
            den_deg: self.den_deg,
            guard: self.guard,
            nu_max: self.nu_max,
            n_exp_max: self.n_exp_max,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Count M_i(u) over a level range
    Count {
        #[command(flatten)]
        common: CommonArgs,
        /// Compute every target u for levels up to this bound
        #[arg(long)]
        all_targets: Option<u32>,
        /// A specific target u (decimal) to count at every level
        #[arg(long)]
        u: Option<String>,
    },
    /// Poincaré series, zeta coefficients, exact reconstruction
    Zeta {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recon: ReconArgs,
    },
    /// Pole report and the -n/2 lower bound check
    Poles {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recon: ReconArgs,
    },
    /// Verify divisibility, valuation bounds, or sharpness witnesses
    Verify {
        #[command(subcommand)]
        check: VerifyCmd,
    },
    /// Character-twisted coefficient stream, divisibility and poles
    Twist {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recon: ReconArgs,
        /// Conductor e of the character
        #[arg(long)]
        conductor: u32,
        /// Comma-separated exponents on the canonical unit-group generators
        #[arg(long)]
        exps: String,
    },
    /// Time the counting algorithms against each other (counts must agree)
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated algorithms (default: brute,lift,stratified)
        #[arg(long)]
        algorithms: Option<String>,
        /// Target u (decimal, default 0)
        #[arg(long)]
        u: Option<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Divisibility p^ceil((n/2)(i-1)) | M_i(u) over a corpus or one item
    T23 {
        /// Corpus file (JSON list of job configs), or "default"
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        imax: Option<u32>,
        /// Check every target for levels up to this bound (default min(imax,2))
        #[arg(long)]
        all_targets: Option<u32>,
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Minimal offset a with ord_p(M_i) >= ceil((n+l')i - a)
    Bound {
        #[command(flatten)]
        common: CommonArgs,
        /// The slope l' to test, e.g. "-1" or "-1/2"
        #[arg(long, allow_hyphen_values = true)]
        lprime: String,
    },
    /// Sharpness witness (R, c, a) for the valuation lower bound
    Witness {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recon: ReconArgs,
        /// Exact l to test against (default: from reconstruction)
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
    },
}

fn parse_target(text: &Option<String>) -> Result<Option<BigUint>, CliFailure> {
    match text {
        None => Ok(None),
        Some(t) => t
            .trim()
            .parse::<BigUint>()
            .map(Some)
            .map_err(|_| CliFailure::Usage(format!("malformed target {t:?}"))),
    }
}

fn parse_exps(text: &str) -> Result<Vec<u64>, CliFailure> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| CliFailure::Usage(format!("malformed exponent {part:?}")))
        })
        .collect()
}

fn parse_algorithms(text: &Option<String>) -> Result<Vec<Algorithm>, CliFailure> {
    let text = text.as_deref().unwrap_or("brute,lift,stratified");
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<Algorithm>()
                .map_err(|e| CliFailure::Usage(e.to_string()))
        })
        .collect()
}

fn configure_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // Build the global pool once; later calls are a no-op and the
        // default pool is fine if this loses the race.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
}

extern "C" fn on_sigint(_: libc::c_int) {
    STOP.store(true, Ordering::SeqCst);
}

fn install_sigint_handler() {
    unsafe {
        libc::signal(libc::SIGINT, on_sigint as *const () as libc::sighandler_t);
    }
}

fn emit(output: &CmdOutput, out: &Option<PathBuf>, csv: &Option<PathBuf>) -> Result<(), CliFailure> {
    let rendered = serde_json::to_string_pretty(&output.json)
        .map_err(|e| CliFailure::Other(e.to_string()))?;
    println!("{rendered}");
    if let Some(path) = out {
        std::fs::write(path, format!("{rendered}\n"))
            .map_err(|e| CliFailure::Other(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(path) = csv {
        let body = output
            .csv
            .as_deref()
            .ok_or_else(|| CliFailure::Usage("this command has no CSV projection".into()))?;
        std::fs::write(path, body)
            .map_err(|e| CliFailure::Other(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(CmdOutput, Option<PathBuf>, Option<PathBuf>), CliFailure> {
    match cli.command {
        Cmd::Count {
            common,
            all_targets,
            u,
        } => {
            configure_workers(common.workers);
            let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
            let target = parse_target(&u)?;
            let output = run::cmd_count(&job, common.imax, all_targets, target, &common.algorithm)?;
            Ok((output, common.out, common.csv))
        }
        Cmd::Zeta { common, recon } => {
            configure_workers(common.workers);
            let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
            let output = run::cmd_zeta(&job, common.imax, &common.algorithm, &recon.flags(), false)?;
            Ok((output, common.out, common.csv))
        }
        Cmd::Poles { common, recon } => {
            configure_workers(common.workers);
            let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
            let output = run::cmd_zeta(&job, common.imax, &common.algorithm, &recon.flags(), true)?;
            Ok((output, common.out, common.csv))
        }
        Cmd::Verify { check } => match check {
            VerifyCmd::T23 {
                corpus,
                poly,
                p,
                n,
                imax,
                all_targets,
                algorithm,
                budget,
                workers,
                out,
                csv,
            } => {
                configure_workers(workers);
                let configs: Vec<JobConfig> = match (corpus, poly) {
                    (Some(source), None) => load_corpus(&source).map_err(CliFailure::Usage)?,
                    (None, Some(poly)) => {
                        let (Some(p), Some(imax)) = (p, imax) else {
                            return Err(CliFailure::Usage(
                                "--poly needs --p and --imax".into(),
                            ));
                        };
                        vec![JobConfig {
                            name: None,
                            poly,
                            p,
                            n,
                            imax,
                            all_targets_imax: all_targets,
                            algorithm,
                            budget,
                            horizon: None,
                            lprime: None,
                            num_deg: None,
                            den_deg: None,
                            guard: None,
                            character: None,
                        }]
                    }
                    _ => {
                        return Err(CliFailure::Usage(
                            "pass exactly one of --corpus or --poly".into(),
                        ))
                    }
                };
                let output = run::cmd_verify_t23(&configs, budget)?;
                Ok((output, out, csv))
            }
            VerifyCmd::Bound { common, lprime } => {
                configure_workers(common.workers);
                let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
                let lprime = parse_rational(&lprime).map_err(CliFailure::Usage)?;
                let output =
                    run::cmd_verify_bound(&job, common.imax, &lprime, &common.algorithm)?;
                Ok((output, common.out, common.csv))
            }
            VerifyCmd::Witness { common, recon, l } => {
                configure_workers(common.workers);
                let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
                let l = match l {
                    Some(text) => Some(parse_rational(&text).map_err(CliFailure::Usage)?),
                    None => None,
                };
                let output = run::cmd_verify_witness(
                    &job,
                    common.imax,
                    l,
                    &common.algorithm,
                    &recon.flags(),
                )?;
                Ok((output, common.out, common.csv))
            }
        },
        Cmd::Twist {
            common,
            recon,
            conductor,
            exps,
        } => {
            configure_workers(common.workers);
            let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
            let exps = parse_exps(&exps)?;
            let output = run::cmd_twist(&job, conductor, &exps, common.imax, &recon.flags())?;
            Ok((output, common.out, common.csv))
        }
        Cmd::Bench {
            common,
            algorithms,
            u,
        } => {
            configure_workers(common.workers);
            let job = run::prepare_job(&common.poly, common.p, common.n, common.budget)?;
            let algorithms = parse_algorithms(&algorithms)?;
            let target = parse_target(&u)?;
            let output = run::cmd_bench(&job, common.imax, &algorithms, target)?;
            Ok((output, common.out, common.csv))
        }
    }
}

fn main() -> ExitCode {
    install_sigint_handler();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok((output, out, csv)) => {
            if let Err(failure) = emit(&output, &out, &csv) {
                eprintln!("{}", failure.to_json());
                return ExitCode::from(failure.exit_code() as u8);
            }
            if output.aborted {
                ExitCode::from(130)
            } else if output.verification_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(failure) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&failure.to_json()).expect("serializable")
            );
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
