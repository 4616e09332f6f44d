use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use conductor_core::arith::zeta_primes_removed;
use conductor_core::congruence::{build_plan, build_sqm, density_of, predicted_density, verify_no_d_property};
use conductor_core::empirics::{compare, power_law_fit, theory_mass, ConductorRecord};
use conductor_core::family::{enumerate_sequential, family_size, moebius_family_count};
use conductor_core::theory::{
    euler_ratio_check, identity_rad_euler, linear_grid, main_term, mass_one, mass_tail_bound, pdf_numeric,
    theory_grid, zeta6_ratio, zeta6_ratio_closed_form,
};
use conductor_core::tolerances as tol;
use conductor_core::{Error, FamilySpec};

/// Heights above this are refused rather than attempted.
const MAX_HEIGHT: f64 = 1e10;

/// λ values (in units of H) at which `compare` fits the counting exponent.
const FIT_LAMBDAS: [f64; 6] = [12.4, 24.8, 49.6, 99.2, 198.4, 396.8];

#[derive(Parser)]
#[command(name = "conductors", version, about = "Conductor distribution of the family y² = x³ + ax + b")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical CDF of N/H as CSV.
    Theory(TheoryArgs),
    /// Enumerate F(H) and report its size.
    Enumerate(EnumerateArgs),
    /// Empirical vs theoretical distribution; writes CSVs and summary.json.
    Compare(CompareArgs),
    /// Numerical identity checks as JSON; exit 1 if any fails.
    Identities(IdentityArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// Height H.
    #[arg(long = "H", value_name = "H")]
    height: f64,
    /// a ≡ r (mod 6).
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    r: i64,
    /// b ≡ t (mod 6).
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    t: i64,
}

#[derive(Args)]
struct TheoryArgs {
    /// λ grid as start:stop:step.
    #[arg(long, default_value = "0:496:0.496", allow_hyphen_values = true)]
    grid: String,
    /// Also emit the density by central differences over Δλ.
    #[arg(long)]
    pdf: bool,
    #[arg(long, default_value_t = 0.496)]
    dlambda: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// CDF output path; the density goes to `<stem>.pdf.csv` beside it.
    /// Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Write `a,b,delta,conductor` rows here.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Summary JSON path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "0:496:0.496", allow_hyphen_values = true)]
    grid: String,
    /// Largest |Δ|/N tabulated in mass.csv.
    #[arg(long, default_value_t = 1000)]
    max_m: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct IdentityArgs {
    /// Sieve bound for the residue checks.
    #[arg(long, default_value_t = 7)]
    q: u64,
    /// Seed for random lifts of residue classes.
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Budget(String),
    Check(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Twelve significant digits, printed in shortest round-trip form.
fn num(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x:?}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap();
    format!("{rounded:?}")
}

fn round12(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.11e}").parse().unwrap()
    } else {
        x
    }
}

fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Usage(format!("grid must be start:stop:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| bad())?;
    }
    if v[0] < 0.0 {
        return Err(Failure::Usage(format!("λ must be nonnegative, grid starts at {}", v[0])));
    }
    Ok(linear_grid(v[0], v[1], v[2])?)
}

fn family(args: &FamilyArgs) -> std::result::Result<FamilySpec, Failure> {
    if args.height > MAX_HEIGHT {
        return Err(Failure::Budget(format!("H = {} exceeds the supported maximum {MAX_HEIGHT:e}", args.height)));
    }
    Ok(FamilySpec::new(args.height, args.r, args.t)?)
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn theory(args: TheoryArgs) -> Outcome {
    let lambdas = parse_grid(&args.grid)?;
    let grid = theory_grid(&lambdas, args.tol)?;
    let density = if args.pdf { Some(pdf_numeric(&grid, args.dlambda)?) } else { None };
    let mut w = sink(args.out.as_deref())?;
    writeln!(w, "lambda,cdf")?;
    for (l, c) in grid.lambdas.iter().zip(&grid.cdf) {
        writeln!(w, "{},{}", num(*l), num(*c))?;
    }
    if let Some(density) = density {
        match &args.out {
            Some(p) => {
                w.flush()?;
                w = sink(Some(&p.with_extension("pdf.csv")))?;
            }
            None => writeln!(w)?,
        }
        writeln!(w, "lambda,density")?;
        for (l, d) in density {
            writeln!(w, "{},{}", num(l), num(d))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct EnumerateSummary {
    height: f64,
    r: u8,
    t: u8,
    count: u64,
    count_over_h_5_6: f64,
    /// Leading constant of #F(H) / H^{5/6}.
    reference: f64,
    moebius_count: u64,
}

fn enumerate_cmd(args: EnumerateArgs) -> Outcome {
    let spec = family(&args.family)?;
    let count = match &args.dump {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "a,b,delta,conductor")?;
            let mut err = None;
            let n = enumerate_sequential(&spec, |c| {
                if err.is_some() {
                    return;
                }
                let res = ConductorRecord::from_params(&c)
                    .map_err(Failure::from)
                    .and_then(|r| Ok(writeln!(w, "{},{},{},{}", r.a, r.b, r.delta, r.conductor)?));
                if let Err(e) = res {
                    err = Some(e);
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            w.flush()?;
            n
        }
        None => family_size(&spec),
    };
    let h = spec.height();
    let summary = EnumerateSummary {
        height: h,
        r: spec.r(),
        t: spec.t(),
        count,
        count_over_h_5_6: round12(count as f64 / h.powf(5.0 / 6.0)),
        reference: round12(1.0 / (9.0 * zeta_primes_removed(10.0, 6, 1e-15)?)),
        moebius_count: moebius_family_count(&spec)?,
    };
    let mut w = sink(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CompareSummary {
    height: f64,
    r: u8,
    t: u8,
    family_size: u64,
    sup_distance: f64,
    mass_one_empirical: f64,
    mass_one_theory: f64,
    multiples_of_3: u64,
    power_law_slope: Option<f64>,
}

fn compare_cmd(args: CompareArgs) -> Outcome {
    let spec = family(&args.family)?;
    let lambdas = parse_grid(&args.grid)?;
    let h = spec.height();
    let xs: Vec<f64> = FIT_LAMBDAS.iter().map(|l| l * h).collect();
    let rep = compare(&spec, &lambdas, args.max_m, &xs, args.tol)?;
    std::fs::create_dir_all(&args.out)?;

    let mut w = sink(Some(&args.out.join("report.csv")))?;
    writeln!(w, "lambda,cdf_empirical,cdf_theory,abs_diff")?;
    for ((l, e), t) in rep.lambdas.iter().zip(&rep.empirical).zip(&rep.theory) {
        writeln!(w, "{},{},{},{}", num(*l), num(*e), num(*t), num((e - t).abs()))?;
    }
    w.flush()?;

    let mut w = sink(Some(&args.out.join("mass.csv")))?;
    writeln!(w, "m,freq_empirical,w_theory")?;
    for m in 1..=args.max_m {
        writeln!(w, "{m},{},{}", num(rep.mass_hist.frequency(m)), num(theory_mass(m)?))?;
    }
    w.flush()?;

    let mut w = sink(Some(&args.out.join("counts.csv")))?;
    writeln!(w, "X,count")?;
    for (x, c) in &rep.counts {
        writeln!(w, "{},{c}", num(*x))?;
    }
    w.flush()?;

    let pts: Vec<(f64, f64)> = rep.counts.iter().filter(|c| c.1 > 0).map(|&(x, c)| (x, c as f64)).collect();
    let slope = if pts.len() >= 2 { Some(round12(power_law_fit(&pts)?)) } else { None };
    let summary = CompareSummary {
        height: h,
        r: spec.r(),
        t: spec.t(),
        family_size: rep.mass_hist.total,
        sup_distance: round12(rep.sup_distance),
        mass_one_empirical: round12(rep.mass_hist.frequency(1)),
        mass_one_theory: round12(mass_one()),
        multiples_of_3: rep.mass_hist.multiples_of_3,
        power_law_slope: slope,
    };
    let mut w = sink(Some(&args.out.join("summary.json")))?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Check {
    name: String,
    computed: f64,
    expected: f64,
    pass: bool,
}

fn check(name: impl Into<String>, computed: f64, expected: f64, pass: bool) -> Check {
    Check { name: name.into(), computed: round12(computed), expected: round12(expected), pass }
}

fn identities(args: IdentityArgs) -> Outcome {
    let plan = build_plan(args.q)?;
    let mut checks = Vec::new();

    let (z, zc) = (zeta6_ratio(), zeta6_ratio_closed_form());
    checks.push(check("zeta6_ratio", z, zc, (z - zc).abs() < tol::ZETA_RATIO));
    let norm = main_term(0.0, 496.0, 1e-10)?;
    checks.push(check("normalization", norm, 1.0, (norm - 1.0).abs() <= tol::NORMALIZATION));
    let tail = mass_tail_bound(1_000_000);
    checks.push(check("mass_tail_bound_1e6", tail, tol::MASS_TAIL, tail < tol::MASS_TAIL));
    let rad = identity_rad_euler(2.0, 100_000, 100_000)?;
    checks.push(check("rad_euler_s2", rad.lhs, rad.rhs, rad.agrees()));
    for q in [100u64, 1000, 10_000] {
        let v = euler_ratio_check(q)?;
        checks.push(check(format!("euler_ratio_q{q}"), v, 1.0, (v - 1.0).abs() <= tol::EULER_RATIO / q as f64));
    }

    let spec = FamilySpec::new(1.0, 1, 1)?;
    let mut total = 0.0;
    for m in plan.divisors_of_c() {
        let set = build_sqm(&plan, &spec, m, args.seed)?;
        let got = density_of(&set);
        let want = predicted_density(&plan, m)?;
        let g = set.cardinality() as f64 / (set.modulus() as f64).powi(2);
        let w = want.to_f64().unwrap_or(f64::NAN);
        total += g;
        checks.push(check(format!("sqm_density_q{}_m{m}", args.q), g, w, got == want));
        let no_d = verify_no_d_property(&set)?;
        checks.push(check(format!("sqm_no_d_q{}_m{m}", args.q), no_d as u8 as f64, 1.0, no_d));
    }
    checks.push(check(format!("sqm_partition_q{}", args.q), total, 1.0 / 36.0, (total - 1.0 / 36.0).abs() < 1e-12));

    let mut w = sink(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &checks)?;
    writeln!(w)?;
    w.flush()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match cli.command {
        Command::Theory(a) => theory(a),
        Command::Enumerate(a) => enumerate_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Identities(a) => identities(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
