//! The `mermin-chain` command-line front end.

use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

use mermin_chain::strategy::ScenarioKind;
use mermin_chain_cli::{
    cmd_certify, cmd_coeffs, cmd_simulate, cmd_verify, parse_gammas, parse_n_range, parse_theta,
    CertifyArgs, OutputFormat, SimulateArgs, VerifyArgs, EXIT_INVALID,
};

#[derive(Parser)]
#[command(
    name = "mermin-chain",
    version,
    about = "Chained unsharp-measurement Mermin-inequality simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the Mermin-Klyshko coefficient tables (c_v, c'_v) for n parties.
    Coeffs {
        /// Party count, 1..=20.
        #[arg(long)]
        n: usize,
        /// Output format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Run one chained scenario and print its violation report.
    Simulate {
        /// Scenario: w-single, ghz-single, or ghz-double.
        #[arg(long)]
        scenario: String,
        /// Party count.
        #[arg(long)]
        n: usize,
        /// Chain length.
        #[arg(long = "K")]
        chain_length: usize,
        /// Tilt angle: a float, or "auto" to search the scenario's window.
        #[arg(long, default_value = "auto")]
        theta: String,
        /// Violation slack used when deriving gamma sequences.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Explicit comma-separated unsharpness values (requires --theta).
        #[arg(long)]
        gamma: Option<String>,
        /// Output format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Check the closed-form Mermin values against the density-matrix oracle
    /// on seeded random parameter draws.
    Verify {
        /// Scenario: w-single, ghz-single, or ghz-double.
        #[arg(long)]
        scenario: String,
        /// Party count or inclusive range, e.g. "4" or "3..8".
        #[arg(long)]
        n: String,
        /// Chain length per grid point.
        #[arg(long = "K")]
        chain_length: usize,
        /// Random grid points per party count.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Search a violating configuration and write a JSON certificate.
    Certify {
        /// Scenario: w-single, ghz-single, or ghz-double.
        #[arg(long)]
        scenario: String,
        /// Party count.
        #[arg(long)]
        n: usize,
        /// Chain length.
        #[arg(long = "K")]
        chain_length: usize,
        /// Violation slack.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Certificate file destination.
        #[arg(long)]
        out: PathBuf,
    },
}

fn scenario(tag: &str) -> Result<ScenarioKind, i32> {
    ScenarioKind::from_tag(tag).map_err(|error| {
        eprintln!("error: {error}");
        EXIT_INVALID
    })
}

fn format(tag: &str) -> Result<OutputFormat, i32> {
    OutputFormat::from_tag(tag).map_err(|message| {
        eprintln!("error: {message}");
        EXIT_INVALID
    })
}

fn dispatch(cli: Cli) -> i32 {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Cmd::Coeffs { n, format: fmt } => match format(&fmt) {
            Ok(fmt) => cmd_coeffs(n, fmt, &mut out),
            Err(code) => code,
        },
        Cmd::Simulate {
            scenario: tag,
            n,
            chain_length,
            theta,
            epsilon,
            gamma,
            format: fmt,
        } => {
            let kind = match scenario(&tag) {
                Ok(kind) => kind,
                Err(code) => return code,
            };
            let fmt = match format(&fmt) {
                Ok(fmt) => fmt,
                Err(code) => return code,
            };
            let theta = match parse_theta(&theta) {
                Ok(theta) => theta,
                Err(message) => {
                    eprintln!("error: {message}");
                    return EXIT_INVALID;
                }
            };
            let gammas = match gamma.as_deref().map(parse_gammas).transpose() {
                Ok(gammas) => gammas,
                Err(message) => {
                    eprintln!("error: {message}");
                    return EXIT_INVALID;
                }
            };
            cmd_simulate(
                &SimulateArgs {
                    kind,
                    n,
                    chain_length,
                    theta,
                    epsilon,
                    gammas,
                    format: fmt,
                },
                &mut out,
            )
        }
        Cmd::Verify {
            scenario: tag,
            n,
            chain_length,
            samples,
            seed,
        } => {
            let kind = match scenario(&tag) {
                Ok(kind) => kind,
                Err(code) => return code,
            };
            let n_values = match parse_n_range(&n) {
                Ok(values) => values,
                Err(message) => {
                    eprintln!("error: {message}");
                    return EXIT_INVALID;
                }
            };
            cmd_verify(
                &VerifyArgs {
                    kind,
                    n_values,
                    chain_length,
                    samples,
                    seed,
                },
                &mut out,
            )
        }
        Cmd::Certify {
            scenario: tag,
            n,
            chain_length,
            epsilon,
            out: out_path,
        } => {
            let kind = match scenario(&tag) {
                Ok(kind) => kind,
                Err(code) => return code,
            };
            cmd_certify(
                &CertifyArgs {
                    kind,
                    n,
                    chain_length,
                    epsilon,
                    out_path,
                },
                &mut out,
            )
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            // --help and --version surface as "errors" with successful kinds.
            let code = if error.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = error.print();
            exit(code);
        }
    };
    exit(dispatch(cli));
}
