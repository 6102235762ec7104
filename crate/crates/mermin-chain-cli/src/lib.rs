//! Command implementations and serialization for the `mermin-chain` binary.
//!
//! Everything the binary does lives here as plain functions over `io::Write`
//! sinks, so integration tests can drive the commands in-process. Exit codes
//! follow one convention across all verbs:
//!
//! * 0 — success (and, for simulate/certify, every step violated),
//! * 1 — no violating configuration found, or some step failed to violate
//!   (the report is still printed),
//! * 2 — invalid input or scenario pairing,
//! * 3 — I/O failure.
//!
//! All reals are serialized at 15 significant digits; identical inputs give
//! byte-identical output.

use std::io::Write;
use std::path::PathBuf;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mermin_chain::mermin::{closed_form_coefficients, MerminCoefficients};
use mermin_chain::scenarios::{
    max_report_residual, run_scenario, verify_formula_grid, ViolationReport,
    BRUTE_FORCE_MAX_PARTIES,
};
use mermin_chain::strategy::{
    find_theta_window, gamma_sequence_lemma, gamma_sequence_w, scaling_constant, ChainConfig,
    GammaSequence, ScenarioKind,
};

/// Exit code: success.
pub const EXIT_OK: i32 = 0;
/// Exit code: nothing found / not all steps violated.
pub const EXIT_UNSATISFIED: i32 = 1;
/// Exit code: invalid input.
pub const EXIT_INVALID: i32 = 2;
/// Exit code: I/O failure.
pub const EXIT_IO: i32 = 3;

/// Residual budget for formula-vs-oracle agreement.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Compact JSON documents.
    Json,
    /// Comma-separated rows with a header line.
    Csv,
}

impl OutputFormat {
    /// Parse "json" or "csv".
    pub fn from_tag(tag: &str) -> Result<Self, String> {
        match tag {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

/// The θ option of `simulate`: searched automatically or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    /// Search the scenario's window via the geometric grid.
    Auto,
    /// Use this value.
    Fixed(f64),
}

/// Parse the `--theta` option ("auto" or a float).
pub fn parse_theta(text: &str) -> Result<ThetaChoice, String> {
    if text == "auto" {
        return Ok(ThetaChoice::Auto);
    }
    text.parse::<f64>()
        .map(ThetaChoice::Fixed)
        .map_err(|_| format!("--theta must be \"auto\" or a float, got {text:?}"))
}

/// Parse the `--gamma` option: comma-separated floats.
pub fn parse_gammas(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("--gamma entries must be floats, got {part:?}"))
        })
        .collect()
}

/// Parse the `--n` option of `verify`: a single value "4" or an inclusive
/// range "3..8".
pub fn parse_n_range(text: &str) -> Result<Vec<usize>, String> {
    if let Some((low, high)) = text.split_once("..") {
        let low: usize = low
            .parse()
            .map_err(|_| format!("bad range start in {text:?}"))?;
        let high: usize = high
            .parse()
            .map_err(|_| format!("bad range end in {text:?}"))?;
        if low > high {
            return Err(format!("empty range {text:?}"));
        }
        Ok((low..=high).collect())
    } else {
        let single: usize = text
            .parse()
            .map_err(|_| format!("--n must be an integer or an inclusive range like 3..8, got {text:?}"))?;
        Ok(vec![single])
    }
}

/// One real at 15 significant digits, with −0 normalized to 0.
pub fn fmt_real(value: f64) -> String {
    let normalized = if value == 0.0 { 0.0 } else { value };
    format!("{normalized:.14e}")
}

fn real_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|&value| fmt_real(value))
        .collect::<Vec<_>>()
        .join(",")
}

/// The coefficient table as a JSON document: input bitstrings (party 1 as
/// the most significant bit) with their (c, c') pairs, v ascending.
pub fn coefficients_json(table: &MerminCoefficients) -> String {
    let n = table.n();
    let entries: Vec<String> = (0..(1usize << n))
        .map(|v| {
            format!(
                "{{\"v\":\"{v:0n$b}\",\"c\":{},\"c_prime\":{}}}",
                fmt_real(table.c(v)),
                fmt_real(table.c_prime(v)),
            )
        })
        .collect();
    format!(
        "{{\"n\":{n},\"coefficients\":[{}]}}\n",
        entries.join(",")
    )
}

/// The coefficient table as CSV with columns v,c,c_prime.
pub fn coefficients_csv(table: &MerminCoefficients) -> String {
    let n = table.n();
    let mut out = String::from("v,c,c_prime\n");
    for v in 0..(1usize << n) {
        out.push_str(&format!(
            "{v:0n$b},{},{}\n",
            fmt_real(table.c(v)),
            fmt_real(table.c_prime(v)),
        ));
    }
    out
}

/// A configuration as a JSON object.
pub fn config_json(config: &ChainConfig) -> String {
    format!(
        "{{\"scenario\":\"{}\",\"n\":{},\"K\":{},\"theta\":{},\"epsilon\":{},\"gammas\":[{}]}}",
        config.kind().tag(),
        config.n(),
        config.chain_length(),
        fmt_real(config.theta()),
        fmt_real(config.epsilon()),
        real_list(config.gammas()),
    )
}

/// A violation report as a JSON document.
pub fn report_json(report: &ViolationReport) -> String {
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|row| {
            format!(
                "{{\"k\":{},\"gamma_k\":{},\"P_k\":{},\"I_analytic\":{},\"I_bruteforce\":{},\"violated\":{}}}",
                row.k,
                fmt_real(row.gamma_k),
                fmt_real(row.p_k),
                fmt_real(row.i_analytic),
                fmt_real(row.i_bruteforce),
                row.violated,
            )
        })
        .collect();
    format!(
        "{{\"config\":{},\"rows\":[{}],\"all_violated\":{}}}",
        config_json(&report.config),
        rows.join(","),
        report.all_violated,
    )
}

/// A violation report as CSV (exact column order:
/// scenario,n,K,theta,epsilon,k,gamma_k,P_k,I_analytic,I_bruteforce,violated).
pub fn report_csv(report: &ViolationReport) -> String {
    let mut out =
        String::from("scenario,n,K,theta,epsilon,k,gamma_k,P_k,I_analytic,I_bruteforce,violated\n");
    let config = &report.config;
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            config.kind().tag(),
            config.n(),
            config.chain_length(),
            fmt_real(config.theta()),
            fmt_real(config.epsilon()),
            row.k,
            fmt_real(row.gamma_k),
            fmt_real(row.p_k),
            fmt_real(row.i_analytic),
            fmt_real(row.i_bruteforce),
            row.violated,
        ));
    }
    out
}

/// The certificate document written by `certify`.
pub fn certificate_json(report: &ViolationReport, max_residual: f64) -> String {
    format!(
        "{{\"config\":{},\"report\":{},\"max_residual\":{},\"all_violated\":{}}}\n",
        config_json(&report.config),
        report_json(report),
        fmt_real(max_residual),
        report.all_violated,
    )
}

fn write_or_io_error(out: &mut dyn Write, text: &str) -> Result<(), i32> {
    out.write_all(text.as_bytes()).map_err(|error| {
        eprintln!("error: failed writing output: {error}");
        EXIT_IO
    })
}

/// `coeffs`: print the coefficient tables for n parties.
pub fn cmd_coeffs(n: usize, format: OutputFormat, out: &mut dyn Write) -> i32 {
    let table = match closed_form_coefficients(n) {
        Ok(table) => table,
        Err(error) => {
            eprintln!("error: {error}");
            return EXIT_INVALID;
        }
    };
    let text = match format {
        OutputFormat::Json => coefficients_json(&table),
        OutputFormat::Csv => coefficients_csv(&table),
    };
    match write_or_io_error(out, &text) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

/// Arguments of `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateArgs {
    /// Scenario family.
    pub kind: ScenarioKind,
    /// Party count.
    pub n: usize,
    /// Chain length K.
    pub chain_length: usize,
    /// θ choice.
    pub theta: ThetaChoice,
    /// Violation slack ε.
    pub epsilon: f64,
    /// Explicit unsharpness values (otherwise derived from θ and ε).
    pub gammas: Option<Vec<f64>>,
    /// Output format.
    pub format: OutputFormat,
}

fn derive_gammas_at(
    kind: ScenarioKind,
    n: usize,
    theta: f64,
    epsilon: f64,
    chain_length: usize,
) -> Result<Option<Vec<f64>>, String> {
    let sequence = match kind.chain_kind() {
        None => gamma_sequence_w(theta, epsilon, chain_length),
        Some(chain) => {
            let constant =
                scaling_constant(n, chain).map_err(|error| format!("{error}"))?;
            gamma_sequence_lemma(constant.value(), theta, epsilon, chain_length)
        }
    };
    match sequence {
        Ok(GammaSequence::Feasible(gammas)) => Ok(Some(gammas)),
        Ok(GammaSequence::Infeasible) => Ok(None),
        Err(error) => Err(format!("{error}")),
    }
}

fn resolve_config(args: &SimulateArgs) -> Result<ChainConfig, i32> {
    match (args.theta, &args.gammas) {
        (ThetaChoice::Auto, Some(_)) => {
            eprintln!("error: --gamma requires an explicit --theta (auto derives both)");
            Err(EXIT_INVALID)
        }
        (ThetaChoice::Auto, None) => {
            match find_theta_window(args.kind, args.n, args.chain_length, args.epsilon) {
                Ok(Some(config)) => Ok(config),
                Ok(None) => {
                    eprintln!(
                        "no feasible theta window found for {} n={} K={}",
                        args.kind.tag(),
                        args.n,
                        args.chain_length
                    );
                    Err(EXIT_UNSATISFIED)
                }
                Err(error) => {
                    eprintln!("error: {error}");
                    Err(EXIT_INVALID)
                }
            }
        }
        (ThetaChoice::Fixed(theta), Some(gammas)) => ChainConfig::new(
            args.kind,
            args.n,
            args.chain_length,
            theta,
            args.epsilon,
            gammas.clone(),
        )
        .map_err(|error| {
            eprintln!("error: {error}");
            EXIT_INVALID
        }),
        (ThetaChoice::Fixed(theta), None) => {
            match derive_gammas_at(args.kind, args.n, theta, args.epsilon, args.chain_length) {
                Ok(Some(gammas)) => ChainConfig::new(
                    args.kind,
                    args.n,
                    args.chain_length,
                    theta,
                    args.epsilon,
                    gammas,
                )
                .map_err(|error| {
                    eprintln!("error: {error}");
                    EXIT_INVALID
                }),
                Ok(None) => {
                    eprintln!(
                        "no feasible gamma sequence at theta={} for {} K={}",
                        fmt_real(theta),
                        args.kind.tag(),
                        args.chain_length
                    );
                    Err(EXIT_UNSATISFIED)
                }
                Err(message) => {
                    eprintln!("error: {message}");
                    Err(EXIT_INVALID)
                }
            }
        }
    }
}

/// `simulate`: run one configured chain and print the report.
pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> i32 {
    if let Err(error) = args.kind.validate_n(args.n) {
        eprintln!("error: {error}");
        return EXIT_INVALID;
    }
    let config = match resolve_config(args) {
        Ok(config) => config,
        Err(code) => return code,
    };
    let report = match run_scenario(&config) {
        Ok(report) => report,
        Err(error) => {
            eprintln!("error: {error}");
            return EXIT_INVALID;
        }
    };
    let text = match args.format {
        OutputFormat::Json => {
            let mut json = report_json(&report);
            json.push('\n');
            json
        }
        OutputFormat::Csv => report_csv(&report),
    };
    if let Err(code) = write_or_io_error(out, &text) {
        return code;
    }
    if report.all_violated {
        EXIT_OK
    } else {
        EXIT_UNSATISFIED
    }
}

/// Arguments of `verify`.
#[derive(Debug, Clone)]
pub struct VerifyArgs {
    /// Scenario family.
    pub kind: ScenarioKind,
    /// Party counts to sweep.
    pub n_values: Vec<usize>,
    /// Chain length K per grid point.
    pub chain_length: usize,
    /// Random grid points per party count.
    pub samples: usize,
    /// RNG seed.
    pub seed: u64,
}

/// `verify`: compare the closed forms against the density-matrix oracle on
/// seeded random parameter draws; prints one residual line per n.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> i32 {
    if args.n_values.is_empty() || args.samples == 0 || args.chain_length == 0 {
        eprintln!("error: need at least one n, one sample, and K >= 1");
        return EXIT_INVALID;
    }
    for &n in &args.n_values {
        if let Err(error) = args.kind.validate_n(n) {
            eprintln!("error: {error}");
            return EXIT_INVALID;
        }
        if n > BRUTE_FORCE_MAX_PARTIES {
            eprintln!(
                "error: n={n} exceeds the brute-force cap of {BRUTE_FORCE_MAX_PARTIES}"
            );
            return EXIT_INVALID;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut overall = 0.0f64;
    for &n in &args.n_values {
        let mut thetas = Vec::with_capacity(args.samples);
        let mut gamma_lists = Vec::with_capacity(args.samples);
        for _ in 0..args.samples {
            let theta = match args.kind {
                ScenarioKind::WSingle3 => rng.random_range(0.05..1.47),
                _ => rng.random_range(-0.95..0.95),
            };
            thetas.push(theta);
            let gammas: Vec<f64> = (0..args.chain_length)
                .map(|_| rng.random_range(0.02..0.98))
                .collect();
            gamma_lists.push(gammas);
        }
        let residual = match verify_formula_grid(
            args.kind,
            n,
            &thetas,
            &gamma_lists,
            args.chain_length,
        ) {
            Ok(residual) => residual,
            Err(error) => {
                eprintln!("error: {error}");
                return EXIT_INVALID;
            }
        };
        overall = overall.max(residual);
        if let Err(code) = write_or_io_error(
            out,
            &format!("n={n} max_residual={}\n", fmt_real(residual)),
        ) {
            return code;
        }
    }
    if let Err(code) = write_or_io_error(
        out,
        &format!("overall max_residual={}\n", fmt_real(overall)),
    ) {
        return code;
    }
    if overall <= RESIDUAL_TOL {
        EXIT_OK
    } else {
        EXIT_UNSATISFIED
    }
}

/// Arguments of `certify`.
#[derive(Debug, Clone)]
pub struct CertifyArgs {
    /// Scenario family.
    pub kind: ScenarioKind,
    /// Party count.
    pub n: usize,
    /// Chain length K.
    pub chain_length: usize,
    /// Violation slack ε.
    pub epsilon: f64,
    /// Certificate file destination.
    pub out_path: PathBuf,
}

/// `certify`: search a violating configuration, verify it end to end, and
/// write the certificate JSON.
pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write) -> i32 {
    if let Err(error) = args.kind.validate_n(args.n) {
        eprintln!("error: {error}");
        return EXIT_INVALID;
    }
    let config = match find_theta_window(args.kind, args.n, args.chain_length, args.epsilon) {
        Ok(Some(config)) => config,
        Ok(None) => {
            eprintln!(
                "no feasible theta window found for {} n={} K={}",
                args.kind.tag(),
                args.n,
                args.chain_length
            );
            return EXIT_UNSATISFIED;
        }
        Err(error) => {
            eprintln!("error: {error}");
            return EXIT_INVALID;
        }
    };
    let report = match run_scenario(&config) {
        Ok(report) => report,
        Err(error) => {
            eprintln!("error: {error}");
            return EXIT_INVALID;
        }
    };
    let max_residual = max_report_residual(&report);
    let certificate = certificate_json(&report, max_residual);
    if let Err(error) = std::fs::write(&args.out_path, certificate) {
        eprintln!(
            "error: cannot write certificate to {}: {error}",
            args.out_path.display()
        );
        return EXIT_IO;
    }
    let summary = format!(
        "certificate: {} (all_violated={}, max_residual={})\n",
        args.out_path.display(),
        report.all_violated,
        fmt_real(max_residual),
    );
    if let Err(code) = write_or_io_error(out, &summary) {
        return code;
    }
    if report.all_violated && max_residual <= RESIDUAL_TOL {
        EXIT_OK
    } else {
        EXIT_UNSATISFIED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_is_fifteen_digits_and_round_trip() {
        assert_eq!(fmt_real(0.75), "7.50000000000000e-1");
        assert_eq!(fmt_real(1.0), "1.00000000000000e0");
        assert_eq!(fmt_real(-0.0), "0.00000000000000e0");
        for value in [0.1, -2.5e-13, 1.4142135623730951, 123456.789] {
            let text = fmt_real(value);
            let back: f64 = text.parse().unwrap();
            assert!((back - value).abs() <= value.abs() * 1e-14);
        }
    }

    #[test]
    fn theta_and_gamma_parsing() {
        assert_eq!(parse_theta("auto").unwrap(), ThetaChoice::Auto);
        assert_eq!(parse_theta("0.75").unwrap(), ThetaChoice::Fixed(0.75));
        assert!(parse_theta("fast").is_err());
        assert_eq!(parse_gammas("0.2,0.4").unwrap(), vec![0.2, 0.4]);
        assert!(parse_gammas("0.2,x").is_err());
    }

    #[test]
    fn n_range_parsing_is_inclusive() {
        assert_eq!(parse_n_range("4").unwrap(), vec![4]);
        assert_eq!(parse_n_range("3..6").unwrap(), vec![3, 4, 5, 6]);
        assert!(parse_n_range("6..3").is_err());
        assert!(parse_n_range("3..x").is_err());
    }

    #[test]
    fn coeffs_json_contains_bitstrings() {
        let table = closed_form_coefficients(3).unwrap();
        let json = coefficients_json(&table);
        assert!(json.contains("\"v\":\"100\""));
        assert!(json.contains("\"n\":3"));
        assert!(json.contains("5.00000000000000e-1"));
    }

    #[test]
    fn simulate_json_is_deterministic() {
        let args = SimulateArgs {
            kind: ScenarioKind::GhzSingle,
            n: 3,
            chain_length: 2,
            theta: ThetaChoice::Auto,
            epsilon: 0.01,
            gammas: None,
            format: OutputFormat::Json,
        };
        let mut first = Vec::new();
        let mut second = Vec::new();
        assert_eq!(cmd_simulate(&args, &mut first), EXIT_OK);
        assert_eq!(cmd_simulate(&args, &mut second), EXIT_OK);
        assert_eq!(first, second);
        let text = String::from_utf8(first).unwrap();
        assert!(text.contains("\"all_violated\":true"));
        assert!(text.contains("\"scenario\":\"ghz-single\""));
    }
}
