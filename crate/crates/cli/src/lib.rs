//! Command-line driver. [`run`] returns the process exit code:
//! 0 on success, 2 when a solve stopped with active points, 64 on usage
//! errors and 1 otherwise.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mandelroots::aberth::{newton_residuals, refine_any};
use mandelroots::analysis::{
    default_probe, delta_indicator, real_root_table, sep_report, write_real_root_csv, write_record_csv,
    write_sep_csv,
};
use mandelroots::{
    expand_seed, load_rootset_as, save_rootset, solve_from, solve_ladder, DoubleDouble, Error, Format,
    NumericContext, PolynomialFamily, Real, RootSet, SolverConfig, SweepResult,
};
use num_complex::Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const THREADS_ENV: &str = "MANDELROOTS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mandelroots", version, about = "All roots of Mandelbrot and quadratic-composition polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve p_k from scratch through the k-2 ladder.
    Roots(RootsArgs),
    /// Solve p_k seeded from converged roots of p_{k-2}.
    Step(StepArgs),
    /// Re-converge a root set in double-double arithmetic.
    Refine(RefineArgs),
    /// Check δ, the a-posteriori radii and disk disjointness.
    Verify(VerifyArgs),
    /// Write the real-root and separation tables.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// `mandelbrot` or `quad:<re>,<im>`.
    #[arg(long, default_value = "mandelbrot", value_parser = parse_family)]
    family: PolynomialFamily,
    #[arg(long)]
    k: u32,
}

#[derive(Debug, Args)]
struct RootsArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    /// `double` or `hp:<digits>`.
    #[arg(long, default_value = "double", value_parser = parse_precision)]
    precision: NumericContext,
    #[arg(long, default_value_t = 1)]
    split_q: usize,
    /// Sweep limit per rung.
    #[arg(long, default_value_t = 200)]
    max_sweeps: usize,
    /// Binary output; a CSV copy goes next to it with extension `.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Per-sweep record of the last rung as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StepArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    /// Roots of p_{k-2}.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    split_q: usize,
    /// Sweep limit per rung.
    #[arg(long, default_value_t = 200)]
    max_sweeps: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 30)]
    digits: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    fam: FamilyArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Read and check in double-double with this many digits.
    #[arg(long)]
    digits: Option<u32>,
    #[arg(long, default_value_t = 1e-10)]
    delta_tol: f64,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    digits: Option<u32>,
    /// Directory receiving `real_roots.csv` and `sep.csv`.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn parse_family(s: &str) -> Result<PolynomialFamily, String> {
    if s == "mandelbrot" {
        return Ok(PolynomialFamily::Mandelbrot);
    }
    let rest = s
        .strip_prefix("quad:")
        .ok_or_else(|| format!("unknown family '{s}'; expected mandelbrot or quad:<re>,<im>"))?;
    let (re, im) = rest.split_once(',').unwrap_or((rest, "0"));
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part '{re}': {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part '{im}': {e}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("c must be finite".into());
    }
    Ok(PolynomialFamily::QuadraticComposition(Complex64::new(re, im)))
}

pub fn parse_precision(s: &str) -> Result<NumericContext, String> {
    if s == "double" {
        return Ok(NumericContext::double());
    }
    let d = s
        .strip_prefix("hp:")
        .ok_or_else(|| format!("unknown precision '{s}'; expected double or hp:<digits>"))?;
    let d: u32 = d.parse().map_err(|e| format!("bad digit count '{d}': {e}"))?;
    NumericContext::high(d).map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Domain(_) => EXIT_USAGE,
        Error::NonConverged { .. } => EXIT_PARTIAL,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let out = match cli.command {
        Command::Roots(a) => cmd_roots(a),
        Command::Step(a) => cmd_step(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn csv_path(out: &Path) -> Result<PathBuf, Error> {
    if Format::from_path(out) == Format::Csv {
        return Err(Error::Validation(format!(
            "--out {} names the binary file; the CSV copy is written beside it",
            out.display()
        )));
    }
    Ok(out.with_extension("csv"))
}

fn save_both<T: Real>(rs: &RootSet<T>, out: &Path) -> Result<(), Error> {
    let csv = csv_path(out)?;
    save_rootset(rs, out, Format::Binary)?;
    save_rootset(rs, &csv, Format::Csv)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_with<F>(path: &Path, f: F) -> Result<(), Error>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn solver_config(split_q: usize, max_sweeps: usize) -> SolverConfig {
    SolverConfig { split_q, max_sweeps, ..SolverConfig::default() }
}

/// Writes the partial points of a stalled solve and returns the partial code.
fn handle_solve<T: Real>(
    res: Result<SweepResult<T>, Error>,
    out: &Path,
) -> Result<Result<SweepResult<T>, i32>, Error> {
    match res {
        Ok(r) => Ok(Ok(r)),
        Err(Error::NonConverged { k, active, residual_max, partial_points }) => {
            let rs = RootSet::new(partial_points, NumericContext::double());
            save_both(&rs, out)?;
            eprintln!(
                "k={k}: {} points active after the sweep limit (max |N| = {residual_max:e}); partial roots in {}",
                active.len(),
                out.display()
            );
            Ok(Err(EXIT_PARTIAL))
        }
        Err(e) => Err(e),
    }
}

fn summary<T: Real>(family: &PolynomialFamily, k: u32, res: &SweepResult<T>) -> Result<String, Error> {
    let delta = delta_indicator(&res.roots, family, k, default_probe())?;
    let sep = sep_report(&res.roots, k)?.sep;
    let radius = res.roots.max_apost_radius().unwrap_or(f64::NAN);
    Ok(format!(
        "k={k} n={} sweeps={} delta={delta:.3e} sep={sep:.6e} max_radius={radius:.3e}",
        res.roots.degree(),
        res.record.sweeps_total()
    ))
}

fn finish<T: Real>(
    family: &PolynomialFamily,
    k: u32,
    res: &SweepResult<T>,
    out: &Path,
    stats: Option<&Path>,
) -> Result<i32, Error> {
    save_both(&res.roots, out)?;
    if let Some(p) = stats {
        write_with(p, |w| write_record_csv(w, &res.record))?;
    }
    println!("{}", summary(family, k, res)?);
    Ok(EXIT_OK)
}

fn cmd_roots(a: RootsArgs) -> Result<i32, Error> {
    csv_path(&a.out)?;
    let cfg = solver_config(a.split_q, a.max_sweeps);
    let fam = &a.fam.family;
    let res = match handle_solve(solve_ladder(fam, a.fam.k, &cfg), &a.out)? {
        Ok(r) => r,
        Err(code) => return Ok(code),
    };
    if a.precision.epsilon() >= f64::EPSILON {
        return finish(fam, a.fam.k, &res, &a.out, a.stats.as_deref());
    }
    let mut hp = match handle_solve(refine_any(&res.roots, fam, a.fam.k, a.precision, &cfg), &a.out)? {
        Ok(r) => r,
        Err(code) => return Ok(code),
    };
    hp.record.timings.add(&res.record.timings);
    finish(fam, a.fam.k, &hp, &a.out, a.stats.as_deref())
}

fn cmd_step(a: StepArgs) -> Result<i32, Error> {
    csv_path(&a.out)?;
    let cfg = solver_config(a.split_q, a.max_sweeps);
    let fam = &a.fam.family;
    let k = a.fam.k;
    if k < 4 {
        return Err(Error::Domain(format!("step needs k >= 4, got {k}")));
    }
    let prev: RootSet<f64> = load_rootset_as(&a.input)?;
    // a loaded set carries no status; one confirming solve restores it
    let prev = solve_from(fam, k - 2, prev, &cfg)?.roots;
    let seed = expand_seed(&prev, fam, k, &cfg)?;
    match handle_solve(solve_from(fam, k, seed, &cfg), &a.out)? {
        Ok(r) => finish(fam, k, &r, &a.out, a.stats.as_deref()),
        Err(code) => Ok(code),
    }
}

fn cmd_refine(a: RefineArgs) -> Result<i32, Error> {
    csv_path(&a.out)?;
    let ctx = NumericContext::high(a.digits)?;
    let rs: RootSet<DoubleDouble> = load_rootset_as(&a.input)?;
    let fam = &a.fam.family;
    let res = refine_any(&rs, fam, a.fam.k, ctx, &SolverConfig::default());
    match handle_solve(res, &a.out)? {
        Ok(r) => {
            println!("moving_sweeps={}", r.record.moving_sweeps());
            finish(fam, a.fam.k, &r, &a.out, None)
        }
        Err(code) => Ok(code),
    }
}

fn load_in<T: Real>(path: &Path, digits: Option<u32>) -> Result<RootSet<T>, Error> {
    let rs: RootSet<T> = load_rootset_as(path)?;
    let ctx = match digits {
        Some(d) => NumericContext::high(d)?,
        None => NumericContext::double(),
    };
    Ok(rs.convert(ctx))
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Error> {
    match a.digits {
        Some(_) => verify::<DoubleDouble>(&a),
        None => verify::<f64>(&a),
    }
}

fn verify<T: Real>(a: &VerifyArgs) -> Result<i32, Error> {
    let rs: RootSet<T> = load_in(&a.input, a.digits)?;
    let fam = &a.fam.family;
    let k = a.fam.k;
    let n = fam.degree(k)?;
    if rs.degree() != n {
        return Err(Error::Validation(format!(
            "{} member k = {k} has degree {n}, file has {} points",
            fam.description(),
            rs.degree()
        )));
    }
    let eps = rs.context().epsilon();
    let nf = n as f64;
    let res = newton_residuals(fam, k, rs.points());
    let newton_max = res.iter().fold(0.0f64, |m, &r| m.max(r));
    let radius = nf * newton_max;
    let delta = delta_indicator(&rs, fam, k, default_probe())?;
    let sep = sep_report(&rs, k)?.sep;
    let checks = [
        ("delta", delta, a.delta_tol, delta <= a.delta_tol),
        ("newton", newton_max, 1024.0 * eps, newton_max <= 1024.0 * eps),
        ("radius", radius, 1024.0 * nf * eps, radius <= 1024.0 * nf * eps),
        ("disjoint", 2048.0 * nf * eps, sep, 2048.0 * nf * eps < sep),
    ];
    let mut ok = true;
    for (name, value, limit, pass) in checks {
        ok &= pass;
        println!("{} {name} {value:.3e} vs {limit:.3e}", if pass { "PASS" } else { "FAIL" });
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_stats(a: StatsArgs) -> Result<i32, Error> {
    match a.digits {
        Some(_) => stats::<DoubleDouble>(&a),
        None => stats::<f64>(&a),
    }
}

fn stats<T: Real>(a: &StatsArgs) -> Result<i32, Error> {
    let rs: RootSet<T> = load_in(&a.input, a.digits)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let table = real_root_table(&rs, a.k, None)?;
    let sep = sep_report(&rs, a.k)?;
    write_with(&a.out_dir.join("real_roots.csv"), |w| write_real_root_csv(w, &table))?;
    write_with(&a.out_dir.join("sep.csv"), |w| write_sep_csv(w, std::slice::from_ref(&sep)))?;
    println!(
        "k={} n={} real_roots={} psi={:.4} sep={:.6e} rsep={:.6e}",
        a.k,
        rs.degree(),
        table.n_r,
        table.psi,
        sep.sep,
        sep.rsep
    );
    Ok(EXIT_OK)
}
