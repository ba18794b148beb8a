//! Command-line front end for `cayleylab`.

pub mod parse;

use std::io::Write;

use cayleylab::cayley::{export_edge_list, growth_from_ball, Ball};
use cayleylab::criteria::{
    check_bs3, check_growth4, check_radius_half, lift_rho_scan, uniform_conductance_scan,
    ScanOptions,
};
use cayleylab::gensets::{lift_generating_set, power_set};
use cayleylab::isoperimetry::{h_lower_from_rho, iso_scan_on_ball};
use cayleylab::percolation::{
    pc_certified, pc_estimate, theta_csv, theta_r, PcOptions, DEFAULT_TAU,
};
use cayleylab::spectral::{
    rho_exact_catalog, rho_lower, rho_upper_power, series_csv, walk_series, DEFAULT_HORIZON,
};
use cayleylab::{
    BoundReport, Error, GenSet, GroupSpec, Interval, Provenance, Quantity, DEFAULT_MAX_VERTICES,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use parse::{parse_group_spec, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "cayleylab",
    version,
    about = "Non-amenability numerics on Cayley graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gens {
    Standard,
    Pow(u32),
    Lift(u32),
}

fn parse_gens(s: &str) -> Result<Gens, String> {
    let positive = |v: &str| match v.parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer in '{s}'")),
    };
    match s.split_once(':') {
        None if s == "standard" => Ok(Gens::Standard),
        Some(("pow", k)) => positive(k).map(Gens::Pow),
        Some(("lift", n)) => positive(n).map(Gens::Lift),
        _ => Err(format!(
            "unknown generating set '{s}'; use standard, pow:<k> or lift:<n>"
        )),
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Group, e.g. F2, Z^2, Z/2*Z/3, F2xZ^1.
    #[arg(value_parser = parse_spec)]
    group: GroupSpec,
    /// standard | pow:<k> | lift:<n>
    #[arg(long, default_value = "standard", value_parser = parse_gens)]
    gens: Gens,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,
}

fn parse_spec(s: &str) -> Result<GroupSpec, String> {
    parse_group_spec(s).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sphere and ball sizes.
    Ball {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        r: u32,
    },
    /// Growth-rate bounds from ball sizes.
    Growth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
    },
    /// Exact return probabilities and spectral-radius bounds.
    Rho {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u32,
    },
    /// Ball-family bounds on the isoperimetric and conductance constants.
    Conductance {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        r: u32,
    },
    /// Monte Carlo estimate of the origin-to-sphere connection probability.
    Percolate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        r: u32,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Critical-probability estimate with certified endpoints.
    Pc {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        r: u32,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
    },
    /// Tri-state verdicts for the three sufficient conditions.
    Conditions {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 12)]
        horizon: u32,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
    },
    /// Conductance bounds along the powers S^k.
    ScanSk {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        kmax: u32,
    },
    /// Spectral-radius estimates along lifts of S^(n) into Q x N.
    ScanLift {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        nmax: u32,
        #[arg(long, default_value_t = 8)]
        horizon: u32,
    },
    /// Edge list of a ball.
    ExportGraph {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        r: u32,
    },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Resource(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_limit() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("write failed: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(format!("serialization failed: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn generating_set(c: &Common) -> Result<GenSet, Failure> {
    match c.gens {
        Gens::Standard => Ok(GenSet::standard(&c.group)?),
        Gens::Pow(k) => Ok(power_set(&GenSet::standard(&c.group)?, k)?),
        Gens::Lift(n) => {
            let q = match &c.group {
                GroupSpec::DirectProduct(fs) if fs.len() == 2 => &fs[0],
                _ => {
                    return Err(Failure::Invalid(
                        "lift:<n> needs a two-factor direct product QxN".into(),
                    ))
                }
            };
            Ok(lift_generating_set(&c.group, &GenSet::standard(q)?, n)?.genset)
        }
    }
}

fn gens_label(g: Gens) -> String {
    match g {
        Gens::Standard => "standard".into(),
        Gens::Pow(k) => format!("pow:{k}"),
        Gens::Lift(n) => format!("lift:{n}"),
    }
}

fn header(c: &Common, s: &GenSet, extra: &str) -> String {
    let mut h = format!(
        "# group={} gens={} |S|={}",
        c.group,
        gens_label(c.gens),
        s.len()
    );
    if !extra.is_empty() {
        h.push(' ');
        h.push_str(extra);
    }
    h.push('\n');
    h
}

fn report_comment(r: &BoundReport) -> String {
    let side = |name: &str, e: &Option<cayleylab::Endpoint>| match e {
        Some(e) => format!(" {name}={} ({}; {})", e.value, e.provenance, e.source),
        None => format!(" {name}=none"),
    };
    let mut out = format!(
        "# {}:{}{}{}\n",
        r.quantity,
        side("lower", &r.lower),
        side("upper", &r.upper),
        side("estimate", &r.estimate)
    );
    for n in &r.notes {
        out.push_str(&format!("#   {n}\n"));
    }
    out
}

fn emit_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Outcome {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// Catalog value or, for `pow:<k>`, the power bound from the catalog value
/// of the standard set. No walks.
fn cheap_rho(c: &Common, s: &GenSet) -> Result<BoundReport, Failure> {
    let mut report = BoundReport::empty(Quantity::Rho);
    if let Some(r) = rho_exact_catalog(s) {
        report = report.tighten(&BoundReport::exact(Quantity::Rho, r, "catalog"));
    }
    if let Gens::Pow(k) = c.gens {
        let base = GenSet::standard(&c.group)?;
        if let Some(r) = rho_exact_catalog(&base) {
            let up = BoundReport::exact(Quantity::Rho, r, "catalog")
                .upper
                .expect("exact report");
            let p = rho_upper_power(&up, base.len(), s.len(), k)?;
            if p.certified_upper().is_some_and(|u| u <= 1.0) {
                report = report.tighten(&p);
            }
        }
    }
    Ok(report)
}

/// Walk lower bound at the largest even horizon `<= horizon` that fits the cap,
/// combined with [`cheap_rho`].
fn full_rho(c: &Common, s: &GenSet, horizon: u32) -> Result<BoundReport, Failure> {
    let mut h = horizon.max(2);
    let walk = loop {
        match walk_series(s, h, c.max_vertices) {
            Ok(series) => break Some(rho_lower(&series)?),
            Err(e) if e.is_resource_limit() && h > 2 => h -= 2,
            Err(e) if e.is_resource_limit() => break None,
            Err(e) => return Err(e.into()),
        }
    };
    let cheap = cheap_rho(c, s)?;
    Ok(match walk {
        Some(w) => {
            let estimate = cheap.estimate.clone().or(w.estimate.clone());
            let mut r = w.tighten(&cheap);
            r.estimate = estimate;
            r
        }
        None => cheap,
    })
}

fn phi_lower(rho: &BoundReport, size_s: usize) -> Option<BoundReport> {
    let h = h_lower_from_rho(rho, size_s)?;
    Some(BoundReport::empty(Quantity::Phi).with_lower(
        Interval::point(h).scale(size_s as f64).lo,
        Provenance::CertifiedBound,
        "|S| * h lower from certified rho upper",
    ))
}

fn cmd_ball(c: &Common, r: u32, out: &mut dyn Write) -> Outcome {
    let s = generating_set(c)?;
    let ball = Ball::build(&s, r, c.max_vertices)?;
    let spheres = ball.sphere_sizes();
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("r={r}")).as_bytes())?;
            writeln!(out, "j,sphere_size,ball_size")?;
            let mut total = 0usize;
            for (j, n) in spheres.iter().enumerate() {
                total += n;
                writeln!(out, "{j},{n},{total}")?;
            }
            writeln!(out, "total,,{}", ball.len())?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct BallOut {
                group: String,
                gens: String,
                radius: u32,
                sphere_sizes: Vec<usize>,
                total: usize,
            }
            emit_json(
                out,
                &BallOut {
                    group: c.group.to_string(),
                    gens: gens_label(c.gens),
                    radius: r,
                    sphere_sizes: spheres,
                    total: ball.len(),
                },
            )?;
        }
    }
    Ok(())
}

fn cmd_growth(c: &Common, kmax: u32, out: &mut dyn Write) -> Outcome {
    if kmax < 2 {
        return Err(Failure::Invalid("--kmax must be at least 2".into()));
    }
    let s = generating_set(c)?;
    let ball = Ball::build(&s, kmax, c.max_vertices)?;
    let report = growth_from_ball(&s, &ball, kmax);
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("kmax={kmax}")).as_bytes())?;
            out.write_all(report_comment(&report).as_bytes())?;
            writeln!(out, "k,ball_size,root")?;
            for (k, n) in ball.ball_sizes().iter().enumerate().skip(1) {
                writeln!(out, "{k},{n},{}", (*n as f64).powf(1.0 / k as f64))?;
            }
        }
        Format::Json => emit_json(out, &report)?,
    }
    Ok(())
}

fn cmd_rho(c: &Common, horizon: u32, out: &mut dyn Write) -> Outcome {
    let s = generating_set(c)?;
    let series = walk_series(&s, horizon, c.max_vertices)?;
    let mut report = rho_lower(&series)?;
    report = report.tighten(&cheap_rho(c, &s)?);
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("horizon={horizon}")).as_bytes())?;
            out.write_all(report_comment(&report).as_bytes())?;
            out.write_all(series_csv(&series).as_bytes())?;
        }
        Format::Json => emit_json(out, &report)?,
    }
    Ok(())
}

fn cmd_conductance(c: &Common, r: u32, out: &mut dyn Write) -> Outcome {
    if r == 0 {
        return Err(Failure::Invalid("--r must be at least 1".into()));
    }
    let s = generating_set(c)?;
    let ball = Ball::build(&s, r, c.max_vertices)?;
    let rho = cheap_rho(c, &s)?;
    let radii: Vec<u32> = (1..=r).collect();
    let scan = iso_scan_on_ball(&s, &ball, &radii, Some(&rho))?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("r={r}")).as_bytes())?;
            out.write_all(report_comment(&scan.phi).as_bytes())?;
            out.write_all(report_comment(&scan.h).as_bytes())?;
            out.write_all(scan.to_csv().as_bytes())?;
        }
        Format::Json => emit_json(out, &scan)?,
    }
    Ok(())
}

fn cmd_percolate(
    c: &Common,
    r: u32,
    ps: &[f64],
    trials: u64,
    seed: u64,
    out: &mut dyn Write,
) -> Outcome {
    let s = generating_set(c)?;
    let ball = Ball::build(&s, r, c.max_vertices)?;
    let rows = ps
        .iter()
        .map(|&p| theta_r(&ball, p, trials, seed))
        .collect::<cayleylab::Result<Vec<_>>>()?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("r={r} trials={trials} seed={seed}")).as_bytes())?;
            out.write_all(theta_csv(&rows).as_bytes())?;
        }
        Format::Json => emit_json(out, &rows)?,
    }
    Ok(())
}

fn cmd_pc(c: &Common, r: u32, trials: u64, seed: u64, tau: f64, out: &mut dyn Write) -> Outcome {
    let s = generating_set(c)?;
    let ball = Ball::build(&s, r, c.max_vertices)?;
    let phi = phi_lower(&cheap_rho(c, &s)?, s.len());
    let opts = PcOptions {
        tau,
        ..PcOptions::default()
    };
    let est = pc_estimate(&s, &ball, trials, seed, phi.as_ref(), &opts)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(
                header(
                    c,
                    &s,
                    &format!("r={r} trials={trials} seed={seed} tau={tau}"),
                )
                .as_bytes(),
            )?;
            out.write_all(report_comment(&est.report).as_bytes())?;
            out.write_all(theta_csv(&est.curve).as_bytes())?;
        }
        Format::Json => emit_json(out, &est)?,
    }
    Ok(())
}

fn cmd_conditions(c: &Common, horizon: u32, kmax: u32, out: &mut dyn Write) -> Outcome {
    let s = generating_set(c)?;
    let rho = full_rho(c, &s, horizon)?;
    let gr = {
        let mut k = kmax.max(2);
        loop {
            match Ball::build(&s, k, c.max_vertices) {
                Ok(ball) => break growth_from_ball(&s, &ball, k),
                Err(e) if e.is_resource_limit() && k > 2 => k -= 1,
                Err(e) => return Err(e.into()),
            }
        }
    };
    let pc = pc_certified(s.len(), phi_lower(&rho, s.len()).as_ref());
    let reports = vec![
        check_bs3(&rho, &pc, s.len())?,
        check_growth4(&rho, s.len(), &gr)?,
        check_radius_half(&rho)?,
    ];
    match c.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(out, &reports)?,
        Format::Csv => {
            out.write_all(header(c, &s, "").as_bytes())?;
            writeln!(
                out,
                "condition,verdict,expression_lo,expression_hi,threshold"
            )?;
            for r in &reports {
                let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.condition,
                    r.verdict,
                    f(r.expression_interval[0]),
                    f(r.expression_interval[1]),
                    r.threshold
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_scan_sk(c: &Common, kmax: u32, out: &mut dyn Write) -> Outcome {
    if c.gens != Gens::Standard {
        return Err(Failure::Invalid(
            "scan-sk takes powers of the standard set; use --gens standard".into(),
        ));
    }
    let s = generating_set(c)?;
    let opts = ScanOptions {
        max_vertices: c.max_vertices,
        ..ScanOptions::default()
    };
    let scan = uniform_conductance_scan(&s, kmax, &opts)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write_all(header(c, &s, &format!("kmax={kmax}")).as_bytes())?;
            out.write_all(scan.to_csv().as_bytes())?;
        }
        Format::Json => emit_json(out, &scan)?,
    }
    Ok(())
}

fn cmd_scan_lift(c: &Common, nmax: u32, horizon: u32, out: &mut dyn Write) -> Outcome {
    let q = match &c.group {
        GroupSpec::DirectProduct(fs) if fs.len() == 2 => &fs[0],
        _ => {
            return Err(Failure::Invalid(
                "scan-lift needs a two-factor direct product QxN".into(),
            ))
        }
    };
    let s_q = GenSet::standard(q)?;
    let scan = lift_rho_scan(&c.group, &s_q, nmax, horizon, c.max_vertices)?;
    match c.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            writeln!(
                out,
                "# ambient={} quotient={q} nmax={nmax} horizon={horizon}",
                c.group
            )?;
            out.write_all(scan.to_csv().as_bytes())?;
        }
        Format::Json => emit_json(out, &scan)?,
    }
    Ok(())
}

fn cmd_export(c: &Common, r: u32, out: &mut dyn Write) -> Outcome {
    let s = generating_set(c)?;
    let ball = Ball::build(&s, r, c.max_vertices)?;
    out.write_all(export_edge_list(&s, &ball).as_bytes())?;
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Ball { common, r } => cmd_ball(&common, r, out),
        Command::Growth { common, kmax } => cmd_growth(&common, kmax, out),
        Command::Rho { common, horizon } => cmd_rho(&common, horizon, out),
        Command::Conductance { common, r } => cmd_conductance(&common, r, out),
        Command::Percolate {
            common,
            r,
            p,
            trials,
            seed,
        } => cmd_percolate(&common, r, &p, trials, seed, out),
        Command::Pc {
            common,
            r,
            trials,
            seed,
            tau,
        } => cmd_pc(&common, r, trials, seed, tau, out),
        Command::Conditions {
            common,
            horizon,
            kmax,
        } => cmd_conditions(&common, horizon, kmax, out),
        Command::ScanSk { common, kmax } => cmd_scan_sk(&common, kmax, out),
        Command::ScanLift {
            common,
            nmax,
            horizon,
        } => cmd_scan_lift(&common, nmax, horizon, out),
        Command::ExportGraph { common, r } => cmd_export(&common, r, out),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(cli, out)));
    match result {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(Failure::Invalid(m))) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INVALID
        }
        Ok(Err(Failure::Resource(m))) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RESOURCE
        }
        Ok(Err(Failure::Internal(m))) => {
            let _ = writeln!(err, "internal error: {m}");
            EXIT_INTERNAL
        }
        Err(_) => {
            let _ = writeln!(err, "internal error: invariant violation");
            EXIT_INTERNAL
        }
    }
}
