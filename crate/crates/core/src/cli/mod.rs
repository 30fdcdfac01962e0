//! The `synchan` command line: single bounds, block-length optimisation,
//! table regeneration, parameter sweeps and the verification suites.
//!
//! Exit codes: 0 on success, 1 when a table deviates, a verification check
//! fails or a computation errors, 2 on invalid flags or parameters.

pub mod grid;
pub mod tables;
pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{evaluate, optimize_block_length, BoundResult, ChannelParams, Method};
use crate::error::{Error, Result};
use tables::TableCell;
use verify::{run_verify, CheckRecord, Fault, Suite, VerifyOptions};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SYNCHAN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "synchan",
    version,
    about = "Capacity lower bounds for binary synchronization-error channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one bound.
    Bound(BoundArgs),
    /// Find the block length maximising a bound.
    Optimize(OptimizeArgs),
    /// Regenerate a reference table and compare every cell.
    Table(TableArgs),
    /// Evaluate methods side by side over a parameter grid, as CSV.
    Sweep(SweepArgs),
    /// Run the exact-oracle, property and statistical suites.
    Verify(VerifyArgs),
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_count_arg(s: &str) -> std::result::Result<usize, String> {
    grid::parse_count(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
#[group(id = "noise", multiple = false)]
struct NoiseArgs {
    /// Noise standard deviation of the AWGN stage.
    #[arg(long)]
    sigma: Option<f64>,
    /// Signal-to-noise ratio 1/sigma^2 in dB.
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Noise variance sigma^2.
    #[arg(long = "noise-var")]
    noise_var: Option<f64>,
}

impl NoiseArgs {
    fn sigma(&self) -> Result<f64> {
        let sigma = match (self.sigma, self.snr_db, self.noise_var) {
            (Some(s), ..) => s,
            (_, Some(db), _) => sigma_from_snr_db(db),
            (.., Some(v)) if v >= 0.0 => v.sqrt(),
            (.., Some(v)) => {
                return Err(Error::domain(format!(
                    "noise variance must be nonnegative, got {v}"
                )))
            }
            _ => 0.0,
        };
        Ok(sigma)
    }
}

/// `sigma` for unit-energy BPSK at `SNR = 1/sigma^2` given in dB.
pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// `10 log10(1/sigma^2)`; infinite for a noiseless channel.
pub fn snr_db_from_sigma(sigma: f64) -> f64 {
    // Adding zero turns -0 into 0 at sigma = 1.
    0.0 - 20.0 * sigma.log10()
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Deletion probability.
    #[arg(long = "pd", default_value_t = 0.0)]
    p_d: f64,
    /// Substitution probability.
    #[arg(long = "pe", default_value_t = 0.0)]
    p_e: f64,
    /// Insertion probability.
    #[arg(long = "pi", default_value_t = 0.0)]
    p_i: f64,
    #[command(flatten)]
    noise: NoiseArgs,
}

impl ChannelArgs {
    fn params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.p_d, self.p_e, self.p_i, self.noise.sigma()?)
    }
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Bound to evaluate, e.g. del-sub, deletion, del-awgn, insertion, gallager.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Block length.
    #[arg(long, conflicts_with = "optimize_n")]
    n: Option<usize>,
    /// Scan block lengths up to this value and report the best.
    #[arg(long = "optimize-n", value_name = "MAX")]
    optimize_n: Option<usize>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Largest block length scanned.
    #[arg(
        long = "optimize-n",
        visible_alias = "n-max",
        value_name = "MAX",
        default_value_t = 1000
    )]
    optimize_n: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    DeletionSubstitution,
    Insertion,
}

fn parse_which(s: &str) -> std::result::Result<Which, String> {
    match s.trim().to_ascii_uppercase().as_str() {
        "I" | "1" => Ok(Which::DeletionSubstitution),
        "II" | "2" => Ok(Which::Insertion),
        _ => Err(format!("unknown table '{s}'; use I or II")),
    }
}

#[derive(Debug, Args)]
struct TableArgs {
    /// I (deletion-substitution) or II (random insertion).
    #[arg(value_parser = parse_which)]
    which: Which,
    /// Also write the cells as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Methods to evaluate, comma separated.
    #[arg(long, value_parser = parse_method, value_delimiter = ',', required = true)]
    method: Vec<Method>,
    /// Block lengths; ignored with --optimize-n.
    #[arg(long, default_value = "100")]
    n: String,
    /// Deletion probabilities: list, a:b:count or log:a:b:count.
    #[arg(long = "pd", default_value = "0")]
    p_d: String,
    #[arg(long = "pe", default_value = "0")]
    p_e: String,
    #[arg(long = "pi", default_value = "0")]
    p_i: String,
    /// Noise standard deviations.
    #[arg(long, group = "noise_grid")]
    sigma: Option<String>,
    /// SNR values in dB.
    #[arg(long = "snr-db", group = "noise_grid", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Noise variances.
    #[arg(long = "noise-var", group = "noise_grid")]
    noise_var: Option<String>,
    /// Use the best block length up to MAX for each point and method.
    #[arg(long = "optimize-n", value_name = "MAX")]
    optimize_n: Option<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Monte-Carlo sample budget, e.g. 1e6.
    #[arg(long = "mc-samples", default_value = "1e6", value_parser = parse_count_arg)]
    mc_samples: usize,
    /// Suites to run, comma separated; defaults to oracle, properties, stats and awgn.
    #[arg(long, value_enum, value_delimiter = ',')]
    suite: Vec<Suite>,
    #[arg(long = "max-n-deletion", default_value_t = 10)]
    max_n_deletion: usize,
    #[arg(long = "max-n-insertion", default_value_t = 8)]
    max_n_insertion: usize,
    #[arg(long)]
    json: bool,
    /// Replace a closed form by a wrong one; verification must then fail.
    #[arg(long = "inject-fault", value_enum, hide = true)]
    inject_fault: Option<Fault>,
}

/// A rate with ten significant digits.
pub fn format_rate(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let decimals = 9 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&decimals) {
        format!("{x:.*}", decimals as usize)
    } else {
        format!("{x:.9e}")
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => 2,
        _ => 1,
    }
}

/// Runs the command line with the given arguments and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    // Output is buffered so the command can run inside a worker pool.
    let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
    let outcome = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(cli.command, &mut buf_out, &mut buf_err)),
        Ok(None) => dispatch(cli.command, &mut buf_out, &mut buf_err),
        Err(e) => Err(e),
    };
    let _ = out.write_all(&buf_out);
    let _ = err.write_all(&buf_err);
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::domain(format!(
            "{THREADS_ENV} must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Resource(format!("cannot start {threads} worker threads: {e}")))
}

fn dispatch(command: Command, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32> {
    match command {
        Command::Bound(a) => cmd_bound(a, out),
        Command::Optimize(a) => cmd_optimize(a, out),
        Command::Table(a) => cmd_table(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Verify(a) => cmd_verify(a, out, err),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Resource(format!("cannot write output: {e}"))
}

#[derive(Serialize)]
struct BoundReport<'a> {
    method: &'a str,
    n: Option<usize>,
    p_d: f64,
    p_e: f64,
    p_i: f64,
    sigma: f64,
    rate: f64,
    components: &'a [crate::bounds::Component],
}

fn print_bound(
    r: &BoundResult,
    params: &ChannelParams,
    json: bool,
    out: &mut dyn Write,
) -> Result<()> {
    if json {
        let report = BoundReport {
            method: r.method.tag(),
            n: r.block_length,
            p_d: params.p_d(),
            p_e: params.p_e(),
            p_i: params.p_i(),
            sigma: params.sigma(),
            rate: r.rate,
            components: &r.components,
        };
        let text = serde_json::to_string_pretty(&report).expect("plain data serialises");
        return writeln!(out, "{text}").map_err(io);
    }
    let mut s = String::new();
    let _ = writeln!(s, "method  {}", r.method.cli_name());
    if let Some(n) = r.block_length {
        let _ = writeln!(s, "n       {n}");
    }
    let _ = writeln!(s, "rate    {}", format_rate(r.rate));
    let width = r.components.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &r.components {
        let _ = writeln!(s, "  {:<width$}  {}", c.name, format_rate(c.value));
    }
    out.write_all(s.as_bytes()).map_err(io)
}

fn cmd_bound(a: BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let params = a.channel.params()?;
    let result = match (a.optimize_n, a.n) {
        (Some(max), _) if a.method.uses_block_length() => {
            optimize_block_length(a.method, &params, max)?.1
        }
        (None, None) if a.method.uses_block_length() => {
            return Err(Error::domain(format!(
                "{} needs --n or --optimize-n",
                a.method.cli_name()
            )))
        }
        (_, n) => evaluate(a.method, n.unwrap_or(0), &params)?,
    };
    print_bound(&result, &params, a.json, out)?;
    Ok(0)
}

fn cmd_optimize(a: OptimizeArgs, out: &mut dyn Write) -> Result<i32> {
    let params = a.channel.params()?;
    let (_, best) = optimize_block_length(a.method, &params, a.optimize_n)?;
    print_bound(&best, &params, a.json, out)?;
    Ok(0)
}

fn cells_csv(cells: &[TableCell]) -> String {
    let mut s = String::from("table,row,column,computed,reference,tolerance,within\n");
    for c in cells {
        let tol = match c.tolerance {
            tables::Tolerance::Absolute(t) => format!("abs {t:e}"),
            tables::Tolerance::Relative(t) => format!("rel {t:e}"),
            tables::Tolerance::Exact => "exact".to_string(),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.table,
            c.row,
            c.column,
            format_rate(c.computed),
            c.reference,
            tol,
            c.within
        );
    }
    s
}

fn cmd_table(a: TableArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cells = match a.which {
        Which::DeletionSubstitution => tables::deletion_substitution_table()?,
        Which::Insertion => tables::insertion_table()?,
    };
    if let Some(path) = &a.csv {
        std::fs::write(path, cells_csv(&cells))
            .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display())))?;
    }
    if a.json {
        let text = serde_json::to_string_pretty(&cells).expect("plain data serialises");
        writeln!(out, "{text}").map_err(io)?;
    } else {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<24} {:<16} {:>18} {:>12}  status",
            "row", "column", "computed", "reference"
        );
        for c in &cells {
            let status = if c.within { "ok" } else { "DEVIATES" };
            let _ = writeln!(
                s,
                "{:<24} {:<16} {:>18} {:>12}  {status}",
                c.row,
                c.column,
                format_rate(c.computed),
                c.reference
            );
        }
        out.write_all(s.as_bytes()).map_err(io)?;
    }
    let off: Vec<&TableCell> = cells.iter().filter(|c| !c.within).collect();
    for c in &off {
        let _ = writeln!(
            err,
            "deviation: table {} {} {}: computed {} reference {} (difference {:+.3e}, tolerance {:?})",
            c.table,
            c.row,
            c.column,
            format_rate(c.computed),
            c.reference,
            c.computed - c.reference,
            c.tolerance
        );
    }
    Ok(if off.is_empty() { 0 } else { 1 })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy)]
struct Point {
    n: usize,
    p_d: f64,
    p_e: f64,
    p_i: f64,
    sigma: f64,
    snr_db: f64,
}

fn sweep_cells(p: &Point, methods: &[Method], optimize_n: Option<usize>) -> Vec<(String, String)> {
    let params = ChannelParams::new(p.p_d, p.p_e, p.p_i, p.sigma);
    methods
        .iter()
        .map(|&m| {
            let result = params.as_ref().ok().and_then(|params| match optimize_n {
                Some(max) if m.uses_block_length() => {
                    optimize_block_length(m, params, max).ok().map(|r| r.1)
                }
                _ => evaluate(m, p.n, params).ok(),
            });
            match result {
                Some(r) => (
                    r.block_length.map(|n| n.to_string()).unwrap_or_default(),
                    format_rate(r.rate),
                ),
                None => (String::new(), String::new()),
            }
        })
        .collect()
}

/// Builds the sweep CSV: `n,p_d,p_e,p_i,sigma,snr_db` then `<tag>_n,<tag>_rate`
/// per method, one row per grid point with `n` varying slowest. Points where
/// a method is undefined leave its cells empty.
fn sweep_csv(a: &SweepArgs) -> Result<String> {
    let lengths = if a.optimize_n.is_some() {
        vec![0]
    } else {
        grid::parse_lengths(&a.n)?
    };
    let (p_d, p_e, p_i) = (
        grid::parse_grid(&a.p_d)?,
        grid::parse_grid(&a.p_e)?,
        grid::parse_grid(&a.p_i)?,
    );
    // (sigma, SNR in dB); a given SNR is echoed as typed, not recomputed.
    let noise: Vec<(f64, f64)> = match (&a.sigma, &a.snr_db, &a.noise_var) {
        (Some(g), ..) => grid::parse_grid(g)?
            .into_iter()
            .map(|s| (s, snr_db_from_sigma(s)))
            .collect(),
        (_, Some(g), _) => grid::parse_grid(g)?
            .into_iter()
            .map(|db| (sigma_from_snr_db(db), db))
            .collect(),
        (.., Some(g)) => grid::parse_grid(g)?
            .into_iter()
            .map(|v| (v.sqrt(), snr_db_from_sigma(v.sqrt())))
            .collect(),
        _ => vec![(0.0, f64::INFINITY)],
    };
    let mut points = Vec::new();
    for &n in &lengths {
        for &d in &p_d {
            for &e in &p_e {
                for &i in &p_i {
                    for &(sigma, snr_db) in &noise {
                        points.push(Point {
                            n,
                            p_d: d,
                            p_e: e,
                            p_i: i,
                            sigma,
                            snr_db,
                        });
                    }
                }
            }
        }
    }
    let rows: Vec<Vec<(String, String)>> = points
        .par_iter()
        .map(|p| sweep_cells(p, &a.method, a.optimize_n))
        .collect();

    let mut s = String::from("n,p_d,p_e,p_i,sigma,snr_db");
    for m in &a.method {
        let _ = write!(s, ",{0}_n,{0}_rate", m.tag());
    }
    s.push('\n');
    for (p, cells) in points.iter().zip(rows) {
        let n = if a.optimize_n.is_some() {
            String::new()
        } else {
            p.n.to_string()
        };
        let _ = write!(
            s,
            "{n},{},{},{},{},{}",
            p.p_d, p.p_e, p.p_i, p.sigma, p.snr_db
        );
        for (bn, rate) in cells {
            let _ = write!(s, ",{bn},{rate}");
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let csv = sweep_csv(&a)?;
    match &a.csv {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display())))?,
        None => out.write_all(csv.as_bytes()).map_err(io)?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    passed: bool,
    total: usize,
    failed: usize,
    failures: Vec<&'a CheckRecord>,
    checks: &'a [CheckRecord],
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let mut opts = VerifyOptions {
        seed: a.seed,
        mc_samples: a.mc_samples,
        suites: if a.suite.is_empty() {
            Suite::DEFAULT.to_vec()
        } else {
            a.suite
        },
        max_n_deletion: a.max_n_deletion,
        max_n_insertion: a.max_n_insertion,
        ..VerifyOptions::default()
    };
    if let Some(fault) = a.inject_fault {
        fault.apply(&mut opts.closed);
    }
    let checks = run_verify(&opts)?;
    let failures: Vec<&CheckRecord> = checks.iter().filter(|c| !c.passed).collect();
    if a.json {
        let report = VerifyReport {
            passed: failures.is_empty(),
            total: checks.len(),
            failed: failures.len(),
            failures: failures.clone(),
            checks: &checks,
        };
        let text = serde_json::to_string_pretty(&report).expect("plain data serialises");
        writeln!(out, "{text}").map_err(io)?;
    } else {
        let mut s = String::new();
        for c in &checks {
            let _ = writeln!(
                s,
                "{} [{:?}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.detail
            );
        }
        let _ = writeln!(
            s,
            "{} of {} checks passed",
            checks.len() - failures.len(),
            checks.len()
        );
        out.write_all(s.as_bytes()).map_err(io)?;
        for c in &failures {
            let _ = writeln!(err, "failed: [{:?}] {}: {}", c.suite, c.name, c.detail);
        }
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("synchan").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn rates_keep_ten_significant_digits() {
        assert_eq!(format_rate(0.5), "0.5000000000");
        assert_eq!(format_rate(0.84193), "0.8419300000");
        assert_eq!(format_rate(3.5817e-4), "0.0003581700000");
        assert_eq!(format_rate(1.5e-30), "1.500000000e-30");
        assert_eq!(format_rate(0.0), "0");
    }

    #[test]
    fn snr_convention() {
        assert!((sigma_from_snr_db(40.0) - 0.01).abs() < 1e-15);
        assert!((snr_db_from_sigma(0.1) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn bound_text_and_json() {
        let (code, out, _) = run_capture(&[
            "bound", "--method", "del-sub", "--n", "1000", "--pd", "0.01", "--pe", "0.01",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("rate    0.84"), "{out}");
        let (code, out, _) = run_capture(&[
            "bound",
            "--method",
            "insertion",
            "--pi",
            "0.1",
            "--optimize-n",
            "512",
            "--json",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["n"], 4);
        assert!((v["rate"].as_f64().unwrap() - 0.5702).abs() < 5e-4);
    }

    #[test]
    fn near_noiseless_awgn() {
        let (code, out, _) = run_capture(&[
            "bound", "--method", "del-awgn", "--n", "100", "--pd", "0", "--snr-db", "40", "--json",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["rate"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn usage_and_domain_errors() {
        assert_eq!(run_capture(&["bound", "--method", "nope", "--n", "3"]).0, 2);
        assert_eq!(
            run_capture(&["bound", "--method", "del-sub", "--pd", "0.1"]).0,
            2
        );
        assert_eq!(
            run_capture(&["bound", "--method", "del-sub", "--n", "10", "--pd", "1.5"]).0,
            2
        );
        assert_eq!(
            run_capture(&[
                "bound", "--method", "del-awgn", "--n", "5", "--sigma", "1", "--snr-db", "3"
            ])
            .0,
            2
        );
        assert_eq!(run_capture(&["table", "III"]).0, 2);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let (code, out, _) = run_capture(&[
            "sweep",
            "--method",
            "gallager,del-sub",
            "--pd",
            "",
            "--n",
            "10",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "n,p_d,p_e,p_i,sigma,snr_db,gallager_n,gallager_rate,deletion_substitution_n,deletion_substitution_rate\n");
    }

    #[test]
    fn sweep_rows_are_in_grid_order_with_empty_cells_off_domain() {
        let (code, out, _) = run_capture(&[
            "sweep",
            "--method",
            "insertion,gallager",
            "--pi",
            "0.1,0.2",
            "--n",
            "2,4",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("2,0,0,0.1,"));
        assert!(
            lines[1].contains(",inf,,,,0.53"),
            "n = 2 is below the insertion bound's range: {}",
            lines[1]
        );
        assert!(lines[4].starts_with("4,0,0,0.2,"));
    }

    #[test]
    fn injected_fault_fails_verification() {
        let base = [
            "verify",
            "--suite",
            "oracle",
            "--max-n-deletion",
            "4",
            "--max-n-insertion",
            "4",
        ];
        assert_eq!(run_capture(&base).0, 0);
        for fault in [
            "deletion-output-entropy",
            "deletion-conditional-bound",
            "insertion-output-entropy",
            "insertion-multi-bound",
        ] {
            let mut args = base.to_vec();
            args.extend(["--inject-fault", fault, "--json"]);
            let (code, out, _) = run_capture(&args);
            assert_eq!(code, 1, "{fault}");
            let v: serde_json::Value = serde_json::from_str(&out).unwrap();
            assert_eq!(v["passed"], false);
            assert!(v["failed"].as_u64().unwrap() > 0);
        }
    }
}
