//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64;

use zernike_optics::coupling;
use zernike_optics::field::{FieldGrid, GridSpec, Plane};
use zernike_optics::propagation::{self, FresnelParams, Limit, TruncationRule};
use zernike_optics::quadrature::{gauss_legendre_01, DiscQuadrature};
use zernike_optics::spdc;
use zernike_optics::special::bessel_j_sequence;
use zernike_optics::zernike::{self, fmt_f64, ZernikeExpansion};
use zernike_optics::ModeIndex;

use crate::config::{write_atomic, write_config_echo};
use crate::{CliError, CliResult, EXIT_GRID_COVERAGE, EXIT_VERIFY_FAILED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Pgm,
    Both,
}

impl OutputFormat {
    fn wants_csv(&self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    fn wants_pgm(&self) -> bool {
        matches!(self, OutputFormat::Pgm | OutputFormat::Both)
    }
}

fn parse_mode(text: &str) -> CliResult<ModeIndex> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::bad_flags(format!(
            "mode must be given as n,m (got {text:?})"
        )));
    }
    let n: i64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::bad_flags(format!("bad radial order in {text:?}")))?;
    let m: i64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::bad_flags(format!("bad azimuthal frequency in {text:?}")))?;
    Ok(ModeIndex::new(n, m)?)
}

fn check_nmax(n_max: i64) -> CliResult<u32> {
    if !(0..=50).contains(&n_max) {
        return Err(CliError::bad_flags(format!(
            "--nmax must be in 0..=50 (got {n_max})"
        )));
    }
    Ok(n_max as u32)
}

fn write_field_outputs(
    grid: &FieldGrid,
    out: &Path,
    format: OutputFormat,
) -> CliResult<Vec<String>> {
    let mut written = Vec::new();
    if format.wants_csv() {
        let mut bytes = Vec::new();
        grid.write_csv(&mut bytes)?;
        let path = out.with_extension("csv");
        write_atomic(&path, &bytes)?;
        written.push(path.display().to_string());
    }
    if format.wants_pgm() {
        let mut bytes = Vec::new();
        grid.write_pgm(&mut bytes)?;
        let path = out.with_extension("pgm");
        write_atomic(&path, &bytes)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Radial order n.
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// Azimuthal frequency m.
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    /// Grid pixels per side.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Half-width of the sampled square (pupil units).
    #[arg(long, default_value_t = 1.0)]
    extent: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Output path prefix.
    #[arg(long)]
    out: PathBuf,
}

pub fn eval(args: EvalArgs) -> CliResult<i32> {
    let idx = ModeIndex::new(args.n, args.m)?;
    let spec = GridSpec::square(args.size, args.extent);
    spec.validate()?;
    let grid = FieldGrid::sample(spec, Plane::Pupil, |x, y| {
        let rho = x.hypot(y);
        if rho > 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            zernike::zernike(idx, rho, y.atan2(x)).expect("rho in range")
        }
    })?;
    let files = write_field_outputs(&grid, &args.out, args.format)?;
    write_config_echo(
        &args.out,
        "eval",
        &[
            ("n", args.n.to_string()),
            ("m", args.m.to_string()),
            ("size", args.size.to_string()),
            ("extent", fmt_f64(args.extent)),
            ("format", format!("{:?}", args.format).to_lowercase()),
        ],
    )?;
    for f in files {
        println!("wrote {f}");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input pupil-plane field CSV.
    #[arg(long)]
    input: PathBuf,
    /// Expansion cutoff.
    #[arg(long, allow_hyphen_values = true)]
    nmax: i64,
    /// Drop fitted coefficients below this magnitude.
    #[arg(long)]
    prune: Option<f64>,
    /// Output expansion JSON path.
    #[arg(long)]
    out: PathBuf,
}

pub fn fit(args: FitArgs) -> CliResult<i32> {
    let n_max = check_nmax(args.nmax)?;
    let grid = FieldGrid::read_csv_path(&args.input)?;
    if grid.spec.extent_x < 1.0 || grid.spec.extent_y < 1.0 {
        return Err(CliError::new(
            EXIT_GRID_COVERAGE,
            format!(
                "input grid extent ({}, {}) does not cover the unit disc",
                grid.spec.extent_x, grid.spec.extent_y
            ),
        ));
    }
    let (mut exp, rms) = zernike::fit_grid(&grid, n_max)?;
    if let Some(threshold) = args.prune {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(CliError::bad_flags("--prune must be non-negative"));
        }
        exp = exp.prune(threshold);
    }
    write_atomic(&args.out, exp.to_json_string().as_bytes())?;
    write_config_echo(
        &args.out,
        "fit",
        &[
            ("input", args.input.display().to_string()),
            ("nmax", n_max.to_string()),
            (
                "prune",
                args.prune.map(fmt_f64).unwrap_or_else(|| "none".into()),
            ),
        ],
    )?;
    println!("residual_rms {}", fmt_f64(rms));
    println!("wrote {}", args.out.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// ft
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FtArgs {
    /// Input expansion JSON.
    #[arg(long)]
    expansion: PathBuf,
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Half-width of the image-plane window (diffraction units).
    #[arg(long, default_value_t = 3.0)]
    extent: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    #[arg(long)]
    out: PathBuf,
}

pub fn ft(args: FtArgs) -> CliResult<i32> {
    let text = std::fs::read_to_string(&args.expansion)?;
    let exp = ZernikeExpansion::from_json_str(&text)?;
    let spec = GridSpec::square(args.size, args.extent);
    let grid = propagation::fraunhofer_field(&exp, spec)?;
    let files = write_field_outputs(&grid, &args.out, args.format)?;
    write_config_echo(
        &args.out,
        "ft",
        &[
            ("expansion", args.expansion.display().to_string()),
            ("size", args.size.to_string()),
            ("extent", fmt_f64(args.extent)),
            ("format", format!("{:?}", args.format).to_lowercase()),
        ],
    )?;
    for f in files {
        println!("wrote {f}");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// propagate
// ---------------------------------------------------------------------------

fn parse_limit(text: &str) -> CliResult<Limit> {
    if text == "auto" {
        return Ok(Limit::Auto);
    }
    text.parse::<u32>()
        .map(Limit::Fixed)
        .map_err(|_| CliError::bad_flags(format!("truncation limit must be 'auto' or an integer (got {text:?})")))
}

#[derive(Args, Debug)]
pub struct PropagateArgs {
    /// Input expansion JSON.
    #[arg(long)]
    expansion: PathBuf,
    /// Propagation distance (z > 0).
    #[arg(long, allow_hyphen_values = true)]
    z: f64,
    /// Wavenumber (k > 0).
    #[arg(long, allow_hyphen_values = true)]
    k: f64,
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Half-width of the observation window (diffraction units).
    #[arg(long, default_value_t = 3.0)]
    extent: f64,
    /// Bessel-order cap of the series ('auto' or integer).
    #[arg(long, default_value = "auto")]
    hmax: String,
    /// Spherical-Bessel-order cap of the series ('auto' or integer).
    #[arg(long, default_value = "auto")]
    lmax: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    #[arg(long)]
    out: PathBuf,
}

pub fn propagate(args: PropagateArgs) -> CliResult<i32> {
    let params = FresnelParams::new(args.z, args.k)?;
    let rule = TruncationRule {
        h_max: parse_limit(&args.hmax)?,
        l_max: parse_limit(&args.lmax)?,
        ..TruncationRule::default()
    };
    let text = std::fs::read_to_string(&args.expansion)?;
    let exp = ZernikeExpansion::from_json_str(&text)?;
    let spec = GridSpec::square(args.size, args.extent);
    let grid = propagation::fresnel_field(&exp, params, rule, spec)?;
    let files = write_field_outputs(&grid, &args.out, args.format)?;
    write_config_echo(
        &args.out,
        "propagate",
        &[
            ("expansion", args.expansion.display().to_string()),
            ("z", fmt_f64(args.z)),
            ("k", fmt_f64(args.k)),
            ("size", args.size.to_string()),
            ("extent", fmt_f64(args.extent)),
            ("hmax", args.hmax.clone()),
            ("lmax", args.lmax.clone()),
            ("format", format!("{:?}", args.format).to_lowercase()),
        ],
    )?;
    for f in files {
        println!("wrote {f}");
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// product
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct ProductArgs {
    /// First mode as n,m.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Second mode as n,m.
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn product(args: ProductArgs) -> CliResult<i32> {
    let a = parse_mode(&args.a)?;
    let b = parse_mode(&args.b)?;
    let table = coupling::coupling_coefficients(a, b);
    let rows: Vec<String> = coupling::table_rows(&table)
        .into_iter()
        .map(|(n1, m1, n2, m2, n3, m3, coeff)| {
            format!(
                "  {{\"n1\": {n1}, \"m1\": {m1}, \"n2\": {n2}, \"m2\": {m2}, \"n3\": {n3}, \"m3\": {m3}, \"A\": {}}}",
                fmt_f64(coeff)
            )
        })
        .collect();
    let body = format!("[\n{}\n]\n", rows.join(",\n"));
    match &args.out {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            write_config_echo(
                path,
                "product",
                &[("a", args.a.clone()), ("b", args.b.clone())],
            )?;
            println!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// spdc
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SpdcArgs {
    /// Pump as a single mode n,m (unit coefficient).
    #[arg(long, conflicts_with = "pump_file", allow_hyphen_values = true)]
    pump: Option<String>,
    /// Pump as an expansion JSON file.
    #[arg(long)]
    pump_file: Option<PathBuf>,
    /// Signal/idler cutoff.
    #[arg(long, allow_hyphen_values = true)]
    nmax: i64,
    /// Verdict threshold on 1 − purity.
    #[arg(long, default_value_t = spdc::DEFAULT_VERDICT_EPSILON)]
    epsilon: f64,
    /// Output path prefix (writes <out>.state.json and <out>.report.json).
    #[arg(long)]
    out: PathBuf,
}

pub fn spdc(args: SpdcArgs) -> CliResult<i32> {
    let n_max = check_nmax(args.nmax)?;
    let pump = match (&args.pump, &args.pump_file) {
        (Some(mode), None) => ZernikeExpansion::single_mode(parse_mode(mode)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            ZernikeExpansion::from_json_str(&text)?
        }
        _ => {
            return Err(CliError::bad_flags(
                "exactly one of --pump or --pump-file is required",
            ))
        }
    };
    let state = spdc::spdc_zeta(&pump, n_max)?;
    let report = spdc::entanglement_verdict(&state, args.epsilon)?;

    let state_path = out_with_suffix(&args.out, ".state.json");
    let report_path = out_with_suffix(&args.out, ".report.json");
    write_atomic(&state_path, state.to_json_string().as_bytes())?;
    write_atomic(&report_path, report.to_json_string().as_bytes())?;
    write_config_echo(
        &args.out,
        "spdc",
        &[
            (
                "pump",
                args.pump
                    .clone()
                    .unwrap_or_else(|| args.pump_file.as_ref().unwrap().display().to_string()),
            ),
            ("nmax", n_max.to_string()),
            ("epsilon", fmt_f64(args.epsilon)),
        ],
    )?;
    println!(
        "raw_norm {}  purity {}  verdict {}",
        fmt_f64(state.raw_norm()),
        fmt_f64(report.purity),
        report.verdict.label()
    );
    println!("wrote {}", state_path.display());
    println!("wrote {}", report_path.display());
    Ok(0)
}

fn out_with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(suffix);
    match base.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(d) => d.join(name),
        None => PathBuf::from(name),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyPlane {
    Pupil,
    Image,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    nmax: i64,
    #[arg(long, value_enum, default_value_t = VerifyPlane::Pupil)]
    plane: VerifyPlane,
}

pub fn verify(args: VerifyArgs) -> CliResult<i32> {
    let n_max = check_nmax(args.nmax)?;
    match args.plane {
        VerifyPlane::Pupil => verify_pupil(n_max),
        VerifyPlane::Image => verify_image(n_max),
    }
}

/// Gram matrix of all modes n ≤ n_max under disc quadrature vs π·I, plus the
/// coupling normalization self-check.
fn verify_pupil(n_max: u32) -> CliResult<i32> {
    const TOLERANCE: f64 = 1e-12;
    let modes = ModeIndex::enumerate_up_to(n_max);
    let quad = DiscQuadrature::with_capacity(n_max as usize);
    // mode values at every node
    let thetas: Vec<f64> = quad.theta_nodes().collect();
    let mut values =
        Vec::with_capacity(modes.len() * quad.radial_nodes().len() * thetas.len());
    for &rho in quad.radial_nodes() {
        for &theta in &thetas {
            for idx in &modes {
                values.push(zernike::zernike(*idx, rho, theta).expect("node in range"));
            }
        }
    }
    let wt = quad.theta_weight();
    let n_modes = modes.len();
    let mut max_dev = 0.0f64;
    for a in 0..n_modes {
        for b in 0..n_modes {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut node = 0usize;
            for (ir, &wr) in quad.radial_weights().iter().enumerate() {
                let _ = ir;
                for _ in 0..thetas.len() {
                    acc += values[node * n_modes + a].conj() * values[node * n_modes + b] * wr;
                    node += 1;
                }
            }
            acc *= wt;
            let target = if a == b {
                Complex64::new(std::f64::consts::PI, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            max_dev = max_dev.max((acc - target).norm());
        }
    }
    let coupling_residual = coupling::self_check();
    println!("pupil Gram max |deviation from pi*I| = {}", fmt_f64(max_dev));
    println!(
        "coupling linearization self-check residual = {}",
        fmt_f64(coupling_residual)
    );
    if max_dev < TOLERANCE && coupling_residual < 1e-10 {
        println!("verify pupil: ok (nmax = {n_max})");
        Ok(0)
    } else {
        println!("verify pupil: FAILED (tolerance {TOLERANCE:e})");
        Ok(EXIT_VERIFY_FAILED)
    }
}

/// Transform-plane orthonormality: ∫ Z̃_a* Z̃_b d²q over q ≤ Q vs π·I.
///
/// The truncation tail is analytic: the deviation of the truncated Gram is
/// `2 √((n_a+1)(n_b+1)) / (2πQ)` to leading order, so Q must grow with the
/// mode order for a fixed tolerance; `Q = 180 (n_max+1)` keeps the worst
/// pair near 1.8e-3, inside the 2e-3 budget.
fn verify_image(n_max: u32) -> CliResult<i32> {
    const TOLERANCE: f64 = 2e-3;
    let q_cutoff = 180.0 * (n_max as f64 + 1.0);
    let modes = ModeIndex::enumerate_up_to(n_max);
    // ∫ Z̃_a* Z̃_b d²q = 2π √((na+1)(nb+1)) i^{nb−na} δ_{ma,mb} ∫ J_{na+1} J_{nb+1} dt/t
    let t_max = 2.0 * std::f64::consts::PI * q_cutoff;
    let panels = (t_max / 1.5).ceil() as usize;
    let (gl_x, gl_w) = gauss_legendre_01(6);
    let top = n_max as usize + 1;
    let mut radial = vec![0.0f64; (top + 1) * (top + 1)];
    let dt = t_max / panels as f64;
    for p in 0..panels {
        let t0 = p as f64 * dt;
        for (xi, wi) in gl_x.iter().zip(&gl_w) {
            let t = t0 + xi * dt;
            let seq = bessel_j_sequence(top as u32, t).expect("t within domain");
            let w_over_t = wi * dt / t;
            for a in 1..=top {
                for b in 1..=top {
                    radial[a * (top + 1) + b] += seq[a] * seq[b] * w_over_t;
                }
            }
        }
    }
    let mut max_dev = 0.0f64;
    for ia in &modes {
        for ib in &modes {
            if ia.m() != ib.m() {
                continue; // azimuthal integral vanishes identically
            }
            let (na, nb) = (ia.n() as usize, ib.n() as usize);
            let phase = match ((nb as i64 - na as i64).rem_euclid(4)) as u8 {
                0 => 1.0,
                2 => -1.0,
                _ => unreachable!("same m forces same n parity"),
            };
            let gram = 2.0
                * std::f64::consts::PI
                * (((na + 1) * (nb + 1)) as f64).sqrt()
                * phase
                * radial[(na + 1) * (top + 1) + (nb + 1)];
            let target = if ia == ib { std::f64::consts::PI } else { 0.0 };
            max_dev = max_dev.max((gram - target).abs());
        }
    }
    println!(
        "image-plane Gram (q <= {q_cutoff}) max |deviation from pi*I| = {}",
        fmt_f64(max_dev)
    );
    if max_dev < TOLERANCE {
        println!("verify image: ok (nmax = {n_max})");
        Ok(0)
    } else {
        println!("verify image: FAILED (tolerance {TOLERANCE:e})");
        Ok(EXIT_VERIFY_FAILED)
    }
}
