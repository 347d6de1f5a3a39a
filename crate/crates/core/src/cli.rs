//! Command-line front end. [`run`] takes the argument list and output
//! streams and returns the process exit code, so the binary is a thin wrapper.
//!
//! Exit codes: 0 success, 1 failure or runtime error, 2 invalid arguments,
//! 3 degenerate parameter, 10 perfect cuboid found.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use crate::candidate::{CandidateRecord, CuboidCandidate, ParamId};
use crate::error::Error;
use crate::exact_arith::parse_ratio;
use crate::params::{check_theorem1, table, XiZeta};
use crate::search::{run_search, SearchOptions, SearchWindow, SieveConfig, DEFAULT_MODULI};
use crate::selftest;
use crate::verifier::{verify, Classification, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_PC_HIT: i32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    Jsonl,
    Csv,
    #[default]
    Human,
}

#[derive(Debug, Parser)]
#[command(name = "cuboid", version, about = "Nearly-perfect cuboid generator, verifier and search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one parametrization at t = P/Q.
    Generate {
        #[arg(long, value_parser = parse_param_id)]
        param: ParamId,
        /// Parameter as P/Q or an integer.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Re-verify every record of a JSONL candidate stream ("-" for stdin).
    Verify {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Check the three squareness conditions for a pair (ξ, ζ).
    Theorem1 {
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
    },
    /// Sieved exact search for a rational free face diagonal.
    Search {
        /// all, I, II or III.
        #[arg(long, default_value = "all")]
        param: String,
        #[arg(long, default_value_t = 3)]
        min_height: u64,
        #[arg(long)]
        max_height: u64,
        /// Defaults to the number of available cores.
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated moduli.
        #[arg(long, value_delimiter = ',')]
        sieve_moduli: Option<Vec<u64>>,
        /// Resume from and save progress to this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Save after this many completed heights.
        #[arg(long, default_value_t = 1)]
        checkpoint_every: u64,
        /// Write hits as JSONL.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stop_on_hit: bool,
        /// Checkpoint and exit once this height is complete.
        #[arg(long)]
        stop_after_height: Option<u64>,
        /// Also exactly test every sieve-rejected value.
        #[arg(long)]
        audit: bool,
    },
    /// Run the built-in fixed-seed property checks.
    Selftest,
}

fn parse_param_id(s: &str) -> Result<ParamId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_params(s: &str) -> Result<Vec<ParamId>, Error> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(ParamId::ALL.to_vec());
    }
    s.split(',').map(|part| part.trim().parse()).collect()
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate { param, t, format } => cmd_generate(param, &t, format, out, err),
        Command::Verify { input, format } => cmd_verify(&input, format, out, err),
        Command::Theorem1 { xi, zeta } => cmd_theorem1(&xi, &zeta, out, err),
        Command::Search {
            param,
            min_height,
            max_height,
            workers,
            sieve_moduli,
            checkpoint,
            checkpoint_every,
            out: hits_out,
            stop_on_hit,
            stop_after_height,
            audit,
        } => {
            let args = SearchArgs {
                param,
                min_height,
                max_height,
                workers,
                sieve_moduli,
                checkpoint,
                checkpoint_every,
                hits_out,
                opts: SearchOptions {
                    stop_on_hit,
                    audit,
                    stop_after_height,
                },
            };
            cmd_search(args, out, err)
        }
        Command::Selftest => cmd_selftest(out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_FAILURE
    })
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().from_writer(out)
}

const CSV_HEADER: [&str; 12] = [
    "param",
    "p",
    "q",
    "a",
    "b",
    "c",
    "d_ac",
    "d_bc",
    "d_s",
    "dab_sq",
    "dab_root",
    "primitive_gcd",
];

fn opt(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("")
}

fn csv_row(r: &CandidateRecord) -> [&str; 12] {
    [
        &r.param,
        opt(&r.p),
        opt(&r.q),
        &r.a,
        &r.b,
        &r.c,
        &r.d_ac,
        &r.d_bc,
        &r.d_s,
        &r.dab_sq,
        opt(&r.dab_root),
        &r.primitive_gcd,
    ]
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(io::Error::other(e))
}

/// Writes candidates as JSONL, CSV (with header) or a human-readable block.
pub fn write_candidates(
    candidates: &[CuboidCandidate],
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<(), Error> {
    match format {
        OutputFormat::Jsonl => {
            for c in candidates {
                serde_json::to_writer(&mut *out, &c.to_record())?;
                writeln!(out)?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            for c in candidates {
                w.write_record(csv_row(&c.to_record())).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Human => {
            for c in candidates {
                let r = c.to_record();
                match (&r.p, &r.q) {
                    (Some(p), Some(q)) => writeln!(out, "param {} t={p}/{q}", r.param)?,
                    _ => writeln!(out, "param {}", r.param)?,
                }
                writeln!(
                    out,
                    "({}, {}, {}, {}, {}, {})",
                    r.a, r.b, r.c, r.d_ac, r.d_bc, r.d_s
                )?;
                writeln!(
                    out,
                    "a={} b={} c={} d_ac={} d_bc={} d_s={}",
                    r.a, r.b, r.c, r.d_ac, r.d_bc, r.d_s
                )?;
                match &r.dab_root {
                    Some(root) => writeln!(out, "a²+b²={} = {root}²", r.dab_sq)?,
                    None => writeln!(out, "a²+b²={} (not a square)", r.dab_sq)?,
                }
                writeln!(out, "primitive_gcd={}", r.primitive_gcd)?;
            }
        }
    }
    Ok(())
}

fn cmd_generate(
    param: ParamId,
    t: &str,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let t = match parse_ratio(t) {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let candidate = match table(param).generate_pq(t.numer(), t.denom()) {
        Ok(c) => c,
        Err(e @ Error::Degenerate { .. }) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_DEGENERATE);
        }
        Err(e) => return Err(e),
    };
    write_candidates(std::slice::from_ref(&candidate), format, out)?;
    let report = verify(&candidate);
    Ok(match report.classification {
        Classification::Npc => EXIT_OK,
        Classification::PcHit => {
            writeln!(err, "PERFECT CUBOID: a²+b² is a square")?;
            EXIT_PC_HIT
        }
        Classification::Degenerate => {
            writeln!(
                err,
                "internal error: generated candidate failed verification: {}",
                report.reason.unwrap_or_default()
            )?;
            EXIT_FAILURE
        }
    })
}

/// One line of `verify` output.
#[derive(Debug, serde::Serialize)]
struct VerifyLine {
    record: usize,
    ok: bool,
    classification: String,
    identity_ac_ok: bool,
    identity_bc_ok: bool,
    identity_s_ok: bool,
    dab_root: Option<String>,
    primitive: bool,
    reason: Option<String>,
}

impl VerifyLine {
    fn failed(record: usize, reason: String) -> Self {
        VerifyLine {
            record,
            ok: false,
            classification: "malformed".into(),
            identity_ac_ok: false,
            identity_bc_ok: false,
            identity_s_ok: false,
            dab_root: None,
            primitive: false,
            reason: Some(reason),
        }
    }

    fn from_report(record: usize, r: &VerificationReport, stored_ok: bool) -> Self {
        let classification = match r.classification {
            Classification::Degenerate => "Degenerate",
            Classification::Npc => "NPC",
            Classification::PcHit => "PCHit",
        };
        let mut reason = r.reason.clone();
        if reason.is_none() && !stored_ok {
            reason = Some("stored derived fields disagree with the sides".into());
        }
        VerifyLine {
            record,
            ok: r.is_success() && stored_ok,
            classification: classification.into(),
            identity_ac_ok: r.identity_ac_ok,
            identity_bc_ok: r.identity_bc_ok,
            identity_s_ok: r.identity_s_ok,
            dab_root: r.dab_status.root().map(BigInt::to_string),
            primitive: r.primitive,
            reason,
        }
    }
}

fn verify_line(record: usize, line: &str) -> VerifyLine {
    let rec: CandidateRecord = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return VerifyLine::failed(record, format!("malformed JSON: {e}")),
    };
    let stored = match rec.parse() {
        Ok(s) => s,
        Err(e) => return VerifyLine::failed(record, e.to_string()),
    };
    let report = verify(&stored.candidate);
    let stored_ok = stored.stored_dab_sq == stored.candidate.dab_sq
        && stored.stored_dab_root.as_ref() == report.dab_status.root();
    VerifyLine::from_report(record, &report, stored_ok)
}

fn cmd_verify(
    input: &PathBuf,
    format: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let reader: Box<dyn Read> = if input.as_os_str() == "-" {
        Box::new(io::stdin())
    } else {
        match fs::File::open(input) {
            Ok(f) => Box::new(f),
            Err(e) => {
                writeln!(err, "{}: {e}", input.display())?;
                return Ok(EXIT_FAILURE);
            }
        }
    };
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines.push(verify_line(i + 1, &line));
    }

    match format {
        OutputFormat::Jsonl => {
            for l in &lines {
                serde_json::to_writer(&mut *out, l)?;
                writeln!(out)?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["record", "ok", "classification", "reason"])
                .map_err(csv_error)?;
            for l in &lines {
                w.write_record([
                    l.record.to_string().as_str(),
                    if l.ok { "true" } else { "false" },
                    &l.classification,
                    l.reason.as_deref().unwrap_or(""),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Human => {
            for l in &lines {
                let status = if l.ok { "ok" } else { "FAIL" };
                match &l.reason {
                    Some(reason) => writeln!(out, "line {}: {status} {} ({reason})", l.record, l.classification)?,
                    None => writeln!(out, "line {}: {status} {}", l.record, l.classification)?,
                }
            }
        }
    }
    let failed = lines.iter().filter(|l| !l.ok).count();
    writeln!(err, "{} records, {failed} failed", lines.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_theorem1(xi: &str, zeta: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let xz = match (parse_ratio(xi), parse_ratio(zeta)) {
        (Ok(xi), Ok(zeta)) => XiZeta::new(xi, zeta),
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    let xz = match xz {
        Ok(xz) => xz,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let c = check_theorem1(&xz);
    writeln!(out, "c4={} c5={} c6={}", c.c4, c.c5, c.c6)?;
    if c.all() {
        writeln!(out, "all three conditions hold: perfect cuboid certificate")?;
        return Ok(EXIT_OK);
    }
    Ok(EXIT_FAILURE)
}

struct SearchArgs {
    param: String,
    min_height: u64,
    max_height: u64,
    workers: Option<usize>,
    sieve_moduli: Option<Vec<u64>>,
    checkpoint: Option<PathBuf>,
    checkpoint_every: u64,
    hits_out: Option<PathBuf>,
    opts: SearchOptions,
}

fn cmd_search(args: SearchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let setup = parse_params(&args.param)
        .and_then(|ids| SearchWindow::new(args.min_height, args.max_height, ids))
        .and_then(|w| {
            let moduli = args.sieve_moduli.as_deref().unwrap_or(&DEFAULT_MODULI);
            Ok((w, SieveConfig::new(moduli)?))
        })
        .and_then(|setup| {
            if workers == 0 || args.checkpoint_every == 0 {
                return Err(Error::Domain(
                    "--workers and --checkpoint-every must be at least 1".into(),
                ));
            }
            Ok(setup)
        });
    let (window, cfg) = match setup {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(EXIT_USAGE);
        }
    };

    let ck = run_search(
        &window,
        &cfg,
        workers,
        args.checkpoint.as_deref(),
        args.checkpoint_every,
        &args.opts,
    )?;

    if let Some(path) = &args.hits_out {
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        let candidates: Vec<_> = ck.hits.iter().map(|h| h.candidate.clone()).collect();
        write_candidates(&candidates, OutputFormat::Jsonl, &mut f)?;
        f.flush()?;
    }

    write!(out, "{}", ck.summary())?;
    let rate = if ck.wall_time_s > 0.0 {
        ck.tested as f64 / ck.wall_time_s
    } else {
        0.0
    };
    writeln!(out, "wall_time_s: {:.3}", ck.wall_time_s)?;
    writeln!(out, "rate/s: {rate:.0}")?;
    if !ck.is_complete() && ck.hits.is_empty() {
        writeln!(out, "stopped before height {}; rerun with the same checkpoint to resume", ck.next_height)?;
    }
    if !ck.hits.is_empty() {
        writeln!(err, "PERFECT CUBOID FOUND: {} hit(s)", ck.hits.len())?;
        return Ok(EXIT_PC_HIT);
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(out: &mut dyn Write) -> Result<i32, Error> {
    let report = selftest::run();
    write!(out, "{}", report.render())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("cuboid").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn generate_spot_value() {
        let (code, out, _) = run_args(&["generate", "--param", "I", "--t", "2/1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("(448, 495, 840, 952, 975, 1073)"), "{out}");
    }

    #[test]
    fn generate_degenerate_and_parse_errors() {
        let (code, _, err) = run_args(&["generate", "--param", "I", "--t", "3/1"]);
        assert_eq!(code, EXIT_DEGENERATE);
        assert!(err.contains("degenerate: t⁴−10t²+9 = 0"), "{err}");
        assert_eq!(run_args(&["generate", "--param", "I", "--t", "x"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["generate", "--param", "IV", "--t", "2"]).0, EXIT_USAGE);
    }

    #[test]
    fn generate_accepts_negative_t() {
        let (code, out, _) = run_args(&["generate", "--param", "III", "--t", "-2/1", "--format", "jsonl"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains(r#""a":"975""#), "{out}");
    }

    #[test]
    fn csv_and_jsonl_agree() {
        let (_, jsonl, _) = run_args(&["generate", "--param", "II", "--t", "7/3", "--format", "jsonl"]);
        let (_, csv, _) = run_args(&["generate", "--param", "II", "--t", "7/3", "--format", "csv"]);
        let rec: CandidateRecord = serde_json::from_str(jsonl.trim()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), csv_row(&rec).join(","));
    }

    #[test]
    fn theorem1_outputs() {
        let (code, out, _) = run_args(&["theorem1", "--xi", "7/8", "--zeta", "7/128"]);
        assert_eq!(code, EXIT_FAILURE);
        assert_eq!(out.trim(), "c4=true c5=true c6=false");
        assert_eq!(run_args(&["theorem1", "--xi", "1/2", "--zeta", "1/2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["theorem1", "--xi", "0/1", "--zeta", "1/2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["theorem1", "--xi", "a", "--zeta", "1/2"]).0, EXIT_USAGE);
    }

    #[test]
    fn search_validation() {
        assert_eq!(run_args(&["search", "--max-height", "2"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["search", "--max-height", "10", "--param", "V"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["search", "--max-height", "10", "--sieve-moduli", "1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["search", "--max-height", "10", "--workers", "0"]).0, EXIT_USAGE);
    }

    #[test]
    fn search_small_window() {
        let (code, out, _) = run_args(&["search", "--param", "I,III", "--max-height", "20", "--workers", "2"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("hits: 0"), "{out}");
        assert!(out.contains("params: I,III"), "{out}");
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("generate"));
    }
}
