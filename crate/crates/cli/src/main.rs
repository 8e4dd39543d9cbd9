//! `uqsl2`: runs the verification suites and writes the deterministic exports.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use uqsl2::center_slf::{gta_labels, SlfVec};
use uqsl2::export::{central_basis_json, gta_table_csv, skein_json, theta1_json};
use uqsl2::handle_rep::slf_restrict;
use uqsl2::loop_wilson::{parse_loop, wilson_op};
use uqsl2::skein::skein_report;
use uqsl2::suites::{report_json, Context, Suite, DEFAULT_TOLERANCE, REPORT_SCHEMA};
use uqsl2::{Error, ExactMatrix};

#[derive(Parser)]
#[command(name = "uqsl2", version, about = "Exact checks for the restricted quantum group of sl2 and its graph algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and optionally write a JSON report.
    Verify(VerifyArgs),
    /// Print θ₁(τ_a), θ₁(τ_b) on SLF and optionally export them.
    Sl2z(SingleArgs),
    /// SLF matrix of the Wilson loop of a word in a1, b1.
    Wilson(WilsonArgs),
    /// Skein-module matrices of the solid torus.
    Skein(SingleArgs),
    /// Write the GTA table, central basis, θ₁ and skein matrices into a directory.
    Export(ExportArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Values of p (repeatable); defaults to 2, 3, 4, 5.
    #[arg(long = "p", value_parser = parse_p)]
    p: Vec<usize>,
    /// Genus of the surface; genus 2 adds the genus2 suite to the default selection.
    #[arg(long, default_value_t = 1, value_parser = parse_genus)]
    genus: usize,
    /// Suites to run (repeatable); defaults to all suites valid for the genus.
    #[arg(long = "suite", value_parser = parse_suite)]
    suite: Vec<Suite>,
    /// Path of the JSON report.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Tolerance of the numeric cross-checks.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct SingleArgs {
    #[arg(long = "p", value_parser = parse_p)]
    p: usize,
    /// Path of the JSON export.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args)]
struct WilsonArgs {
    #[arg(long = "p", value_parser = parse_p)]
    p: usize,
    /// Loop word, e.g. "b1^-1 a1".
    #[arg(long)]
    word: String,
    /// Only genus 1 has an SLF matrix.
    #[arg(long, default_value_t = 1, value_parser = parse_genus)]
    genus: usize,
    /// Treat the word as a simple closed curve even if it is not a named canonical loop.
    #[arg(long)]
    assert_simple: bool,
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "p", value_parser = parse_p)]
    p: usize,
    /// Output directory.
    #[arg(long)]
    export: PathBuf,
}

fn parse_p(s: &str) -> Result<usize, String> {
    let p: usize = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if p < 2 {
        return Err("p must be at least 2".into());
    }
    Ok(p)
}

fn parse_genus(s: &str) -> Result<usize, String> {
    let g: usize = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if !(1..=2).contains(&g) {
        return Err("genus must be 1 or 2".into());
    }
    Ok(g)
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
        format!("unknown suite '{s}' (expected one of {})", names.join(", "))
    })
}

/// Outcome of a command: check failures exit 1, bad input exits 2.
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Rejected(_) | Error::Guard(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Check(format!("cannot write {}: {e}", path.display()))
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Failure::Check(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Sl2z(a) => sl2z(a),
        Command::Wilson(a) => wilson(a),
        Command::Skein(a) => skein(a),
        Command::Export(a) => export(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn verify(a: VerifyArgs) -> Result<bool, Failure> {
    let ps = if a.p.is_empty() { vec![2, 3, 4, 5] } else { a.p };
    let suites: Vec<Suite> =
        if a.suite.is_empty() { Suite::ALL.iter().copied().filter(|s| *s != Suite::Genus2 || a.genus >= 2).collect() } else { a.suite };
    let mut runs = Vec::new();
    let mut pass = true;
    for p in ps {
        let ctx = Context::new(p)?.with_tolerance(a.tolerance);
        let mut reports = Vec::new();
        for s in &suites {
            let start = Instant::now();
            let r = ctx.run(*s);
            let ok = r.checks.iter().filter(|c| c.pass).count();
            println!(
                "p={p} {:<7} {} {ok}/{} checks ({:.1}s)",
                s.name(),
                if r.passed() { "PASS" } else { "FAIL" },
                r.checks.len(),
                start.elapsed().as_secs_f64()
            );
            for f in r.failures() {
                println!("    FAIL {}{}", f.name, if f.data.is_null() { String::new() } else { format!(": {}", f.data) });
            }
            pass &= r.passed();
            reports.push(r);
        }
        runs.push(report_json(p, &reports));
    }
    if let Some(path) = a.export {
        write_json(&path, &json!({ "schema": REPORT_SCHEMA, "pass": pass, "runs": runs }))?;
    }
    Ok(pass)
}

fn sl2z(a: SingleArgs) -> Result<bool, Failure> {
    let ctx = Context::new(a.p)?.with_tolerance(a.tolerance);
    let p = a.p;
    let th = ctx.theta()?;
    let labels = gta_labels(p);
    println!("xi = {}", th.xi);
    println!("theta_1(tau_a) diagonal:");
    for (i, l) in labels.iter().enumerate() {
        println!("  {l:<6} {}", th.a.get(i, i));
    }
    let report = ctx.run(Suite::Sl2z);
    for c in &report.checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    if let Some(path) = a.export {
        write_json(&path, &theta1_json(p, th))?;
    }
    Ok(report.passed())
}

/// Column j of the multiplication-by-φ matrix is φ·(basis j); φ is read off the ε column.
fn as_multiplication(ctx: &Context, m: &ExactMatrix) -> Result<Option<SlfVec>, Failure> {
    let p = ctx.p();
    let phi = SlfVec(m.column(0));
    for j in 0..3 * p - 1 {
        if ctx.gta.product(&ctx.uq, &phi, &SlfVec::unit(p, j))?.0 != m.column(j) {
            return Ok(None);
        }
    }
    Ok(Some(phi))
}

fn render(v: &SlfVec, labels: &[String]) -> String {
    let parts: Vec<String> = v.0.iter().zip(labels).filter(|(c, _)| !c.is_zero()).map(|(c, l)| format!("({c})·{l}")).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn wilson(a: WilsonArgs) -> Result<bool, Failure> {
    if a.genus != 1 {
        return Err(Failure::Usage("the SLF matrix of a Wilson loop is defined for --genus 1".into()));
    }
    let mut w = parse_loop(&a.word, a.genus)?;
    if a.assert_simple {
        w = w.asserted_simple();
    }
    let ctx = Context::new(a.p)?;
    let h = ctx.handle()?;
    let op = wilson_op(h, &w)?;
    let m = slf_restrict(&ctx.uq, &ctx.gta, &op)?;
    let labels = gta_labels(a.p);
    println!("W({w}) on SLF (column j = image of {}):", labels.join(", "));
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|c| c.to_string()).collect();
        println!("  {:<6} [{}]", labels[i], row.join(", "));
    }
    let mult = as_multiplication(&ctx, &m)?;
    if let Some(phi) = &mult {
        println!("acts as multiplication by {}", render(phi, &labels));
    }
    if let Some(path) = a.export {
        let v = json!({
            "p": a.p,
            "word": w.to_string(),
            "basis": labels,
            "matrix": m,
            "multiplication_by": mult.map(|v| v.0),
        });
        write_json(&path, &v)?;
    }
    Ok(true)
}

fn skein(a: SingleArgs) -> Result<bool, Failure> {
    let ctx = Context::new(a.p)?.with_tolerance(a.tolerance);
    let report = ctx.run(Suite::Skein);
    for c in &report.checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    if let Some(path) = a.export {
        let r = skein_report(&ctx.uq, &ctx.center, &ctx.rb, &ctx.gta, Some(ctx.handle()?))?;
        write_json(&path, &skein_json(&r))?;
    }
    Ok(report.passed())
}

fn export(a: ExportArgs) -> Result<bool, Failure> {
    let p = a.p;
    let ctx = Context::new(p)?;
    fs::create_dir_all(&a.export).map_err(|e| io_err(&a.export, e))?;
    let csv_path = a.export.join(format!("gta_table_p{p}.csv"));
    fs::write(&csv_path, gta_table_csv(&ctx.uq, &ctx.gta)?).map_err(|e| io_err(&csv_path, e))?;
    write_json(&a.export.join(format!("central_basis_p{p}.json")), &central_basis_json(p, &ctx.center))?;
    write_json(&a.export.join(format!("theta1_p{p}.json")), &theta1_json(p, ctx.theta()?))?;
    let r = skein_report(&ctx.uq, &ctx.center, &ctx.rb, &ctx.gta, Some(ctx.handle()?))?;
    write_json(&a.export.join(format!("skein_p{p}.json")), &skein_json(&r))?;
    for name in ["gta_table", "central_basis", "theta1", "skein"] {
        let ext = if name == "gta_table" { "csv" } else { "json" };
        println!("wrote {}", a.export.join(format!("{name}_p{p}.{ext}")).display());
    }
    Ok(r.all())
}
