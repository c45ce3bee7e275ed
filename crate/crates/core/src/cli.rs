//! The `curvdec` command line. Exit codes: 0 pass, 1 verification failure,
//! 2 input or usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::io::{Geometry, TensorFile};
use crate::report::{decompose_file, verify_file, DecompositionReport};
use crate::selftest::{run_all, DEFAULT_SEEDS};
use crate::spaces::{random_element, space_dimension, Element, Space};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding every tolerance.
pub const TOL_ENV: &str = "CURVDEC_TOL";

/// Largest real dimension `gen` and `dims` accept for `R^∇`; other spaces allow two more.
const MAX_NABLA_DIM: usize = 8;

#[derive(Debug, Parser)]
#[command(name = "curvdec", version, about = "Decompose and verify curvature tensors and their covariant derivatives")]
struct Cli {
    /// Tolerance for every identity check (overrides CURVDEC_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded random element of a space.
    Gen {
        /// R, RNABLA or P (or a full name such as RNABLA_SO).
        #[arg(long)]
        space: String,
        #[arg(long, value_enum, default_value = "riemann")]
        geometry: Geometry,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        q: usize,
        #[arg(long)]
        seed: u64,
        /// Output path; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a tensor file and write a report.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        geometry: Option<Geometry>,
        /// Report path; standard output if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Seed recorded in the report.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check membership and Bianchi-type identities without decomposing.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        geometry: Option<Geometry>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print space dimensions from the rank oracle.
    Dims {
        #[arg(long)]
        space: Option<String>,
        #[arg(long, value_enum, default_value = "riemann")]
        geometry: Geometry,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        q: usize,
    },
    /// Run acceptance criteria 1-10.
    Selftest {
        /// Run a single seed instead of seeds 1..20.
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant { .. } | Error::RouteMismatch { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn parse_tol(s: &str, source: &str) -> Result<f64, Usage> {
    match s.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(Usage(format!("{source}: expected a non-negative number, got {s:?}"))),
    }
}

fn resolve_tol(flag: Option<f64>, env: Option<String>) -> Result<Option<f64>, Usage> {
    if let Some(t) = flag {
        return parse_tol(&t.to_string(), "--tol").map(Some);
    }
    env.map(|v| parse_tol(&v, TOL_ENV)).transpose()
}

fn parse_space(name: &str, geometry: Geometry) -> Result<Space, Usage> {
    let kahler = geometry == Geometry::Kahler;
    let space = match Space::from_family(name, kahler) {
        Some(s) => s,
        None => name.parse::<Space>()?,
    };
    if space.is_kahler() != kahler {
        return Err(Usage(format!("space {space} does not match geometry {geometry:?}")));
    }
    Ok(space)
}

fn checked_context(space: Space, geometry: Geometry, p: usize, q: usize) -> Result<crate::MetricContext, Usage> {
    let limit = if matches!(space, Space::RNablaSo | Space::RNablaU) { MAX_NABLA_DIM } else { MAX_NABLA_DIM + 2 };
    match geometry.real_dim(p, q) {
        Some(n) if n > 0 && n <= limit => Ok(geometry.context(p, q)?),
        _ => Err(Usage(format!("signature ({p},{q}) out of range for {space} (real dimension 1..={limit})"))),
    }
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Usage> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Usage(e.to_string())),
    }
}

fn read_input(path: &Path, geometry: Option<Geometry>) -> Result<TensorFile, Usage> {
    let f = TensorFile::read(path)?;
    if let Some(g) = geometry {
        if g != f.geometry {
            return Err(Usage(format!("file geometry {:?} does not match --geometry {g:?}", f.geometry)));
        }
    }
    Ok(f)
}

fn finish_report(
    report: crate::Result<DecompositionReport>,
    output: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let text = match report.to_json() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(Usage(msg)) = write_out(output, &text, stdout) {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_USAGE;
    }
    let failures = report.failures();
    if failures.is_empty() {
        let _ = writeln!(stderr, "PASS: {} identities checked", report.identities_checked.len());
        EXIT_PASS
    } else {
        for c in &failures {
            let _ = writeln!(stderr, "FAIL: {} (residual {:.3e})", c.name, c.max_residual);
        }
        EXIT_FAIL
    }
}

fn execute(cli: Cli, env_tol: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Usage> {
    let tol = resolve_tol(cli.tol, env_tol)?;
    match cli.command {
        Command::Gen { space, geometry, p, q, seed, out } => {
            let space = parse_space(&space, geometry)?;
            let ctx = checked_context(space, geometry, p, q)?;
            let file = match random_element(space, &ctx, seed)? {
                Element::Curvature(r) => TensorFile::from_curvature(&r),
                Element::CovDeriv(s) => TensorFile::from_cov_deriv(&s),
                Element::Prim(x) => TensorFile::from_prim(&x),
            };
            write_out(out.as_deref(), &file.to_json()?, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Decompose { input, geometry, output, seed } => {
            let f = read_input(&input, geometry)?;
            Ok(finish_report(decompose_file(&f, tol, seed), output.as_deref(), stdout, stderr))
        }
        Command::Verify { input, geometry, output } => {
            let f = read_input(&input, geometry)?;
            Ok(finish_report(verify_file(&f, tol), output.as_deref(), stdout, stderr))
        }
        Command::Dims { space, geometry, p, q } => {
            let spaces: Vec<Space> = match space {
                Some(s) => vec![parse_space(&s, geometry)?],
                None => {
                    Space::ALL.into_iter().filter(|s| s.is_kahler() == (geometry == Geometry::Kahler)).collect()
                }
            };
            let mut text = String::new();
            for sp in &spaces {
                let ctx = checked_context(*sp, geometry, p, q)?;
                let d = space_dimension(*sp, &ctx)?;
                if spaces.len() == 1 {
                    text.push_str(&format!("{d}\n"));
                } else {
                    text.push_str(&format!("{:<10} {d}\n", sp.name()));
                }
            }
            write_out(None, &text, stdout)?;
            Ok(EXIT_PASS)
        }
        Command::Selftest { seed } => {
            let seeds: Vec<u64> = match seed {
                Some(s) => vec![s],
                None => DEFAULT_SEEDS.collect(),
            };
            let results = run_all(&seeds, tol);
            for c in &results {
                let _ = writeln!(stdout, "{c}");
            }
            let passed = results.iter().all(|c| c.pass);
            let _ = writeln!(stdout, "selftest: {}", if passed { "PASS" } else { "FAIL" });
            Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, env_tol: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(cli, env_tol, stdout, stderr) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Entry point for the binary: process arguments, `CURVDEC_TOL`, real stdio.
pub fn main_exit_code() -> i32 {
    let env_tol = std::env::var(TOL_ENV).ok();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), env_tol, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], env: Option<&str>) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("curvdec").chain(args.iter().copied());
        let code = run(argv, env.map(String::from), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn dims_examples() {
        assert_eq!(call(&["dims", "--space", "R", "--geometry", "riemann", "--q", "5"], None).1, "50\n");
        assert_eq!(call(&["dims", "--space", "P", "--q", "5"], None).1, "40\n");
        assert_eq!(call(&["dims", "--space", "RNABLA", "--geometry", "kahler", "--p", "1", "--q", "1"], None).1, "24\n");
        let (code, table, _) = call(&["dims", "--geometry", "kahler", "--q", "2"], None);
        assert_eq!(code, 0);
        assert!(table.contains("R_U") && table.contains("24"));
    }

    #[test]
    fn usage_errors_exit_2() {
        for args in [
            &["gen", "--space", "P", "--p", "0", "--q", "1", "--seed", "1"][..],
            &["gen", "--space", "Q", "--q", "3", "--seed", "1"],
            &["gen", "--space", "R_U", "--q", "3", "--seed", "1"],
            &["gen", "--space", "RNABLA", "--q", "40", "--seed", "1"],
            &["gen", "--space", "R", "--q", "0", "--seed", "1"],
            &["dims", "--space", "R"],
            &["frobnicate"],
            &["verify", "--input", "/nonexistent/file.json"],
            &["selftest", "--tol", "-1"],
        ] {
            assert_eq!(call(args, None).0, EXIT_USAGE, "{args:?}");
        }
        assert_eq!(call(&["selftest", "--seed", "1"], Some("abc")).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = call(&["--help"], None);
        assert_eq!(code, 0);
        assert!(out.contains("selftest"));
    }

    #[test]
    fn tolerance_resolution() {
        assert!(matches!(resolve_tol(None, None), Ok(None)));
        assert!(matches!(resolve_tol(None, Some("1e-3".into())), Ok(Some(t)) if t == 1e-3));
        assert!(matches!(resolve_tol(Some(0.5), Some("1e-3".into())), Ok(Some(t)) if t == 0.5));
        assert!(resolve_tol(Some(f64::NAN), None).is_err());
    }

    #[test]
    fn gen_writes_to_stdout_deterministically() {
        let a = call(&["gen", "--space", "R", "--q", "3", "--seed", "4"], None);
        let b = call(&["gen", "--space", "R", "--q", "3", "--seed", "4"], None);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        assert!(TensorFile::from_json(&a.1).unwrap().to_curvature().is_ok());
    }
}
