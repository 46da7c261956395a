//! The `dpw` command line: profile, surface, factorize, bessel and verify.
//!
//! Settings come from built-in defaults, then an optional JSON file given
//! with `--config`, then flags. The effective settings are echoed into every
//! output. Exit codes: 0 ok, 1 usage or validation, 2 numerical failure,
//! 3 verification failure.

pub mod verify;

use crate::bessel::{self, BranchPoint, EULER_GAMMA, N_TERMS, X_SWITCH};
use crate::error::{DpwError, Result};
use crate::geometry::{self, GeometryOptions, SurfaceOptions};
use crate::rhfactor::{self, ContourGrid, FactorizeOptions, Method};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct ProfileConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub out: Option<PathBuf>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { r_min: 1e-3, r_max: 4.0, points: 200, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct SurfaceConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub nr: usize,
    pub ntheta: usize,
    #[serde(rename = "H")]
    pub h: f64,
    pub lambda0: [f64; 2],
    /// Circle samples per frame.
    pub n: usize,
    pub dr: f64,
    pub dtheta: f64,
    pub stencil: usize,
    pub out: Option<PathBuf>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        let s = SurfaceOptions::default();
        SurfaceConfig {
            r_min: s.r_range.0,
            r_max: s.r_range.1,
            theta_min: s.theta_range.0,
            theta_max: s.theta_range.1,
            nr: s.nr,
            ntheta: s.ntheta,
            h: s.h,
            lambda0: [s.lambda0.re, s.lambda0.im],
            n: s.geometry.n,
            dr: s.geometry.dr,
            dtheta: s.geometry.dtheta,
            stencil: s.geometry.half_width,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct FactorizeConfig {
    pub r: f64,
    /// "rh" or "circle"; unset picks the route for `a`.
    pub method: Option<String>,
    /// Circle samples of the loops.
    pub n: usize,
    /// RH contour truncation S (the contour is ±e^t, |t| ≤ S).
    pub s_max: Option<f64>,
    /// RH collocation nodes over both half lines, 2 mod 4.
    pub n_nodes: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        FactorizeConfig { r: 1.0, method: None, n: 256, s_max: None, n_nodes: None, out: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct VerifyConfig {
    pub only: Vec<String>,
    pub tol_scale: f64,
    pub report: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { only: Vec::new(), tol_scale: 1.0, report: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    /// Dressing parameter of the potential.
    pub a: f64,
    pub threads: Option<usize>,
    pub profile: ProfileConfig,
    pub surface: SurfaceConfig,
    pub factorize: FactorizeConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: EULER_GAMMA,
            threads: None,
            profile: ProfileConfig::default(),
            surface: SurfaceConfig::default(),
            factorize: FactorizeConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DpwError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| DpwError::Config(format!("{}: {e}", path.display())))
    }

    fn check_common(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(DpwError::Config(format!("a must be positive, got {}", self.a)));
        }
        if self.threads == Some(0) {
            return Err(DpwError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_complex(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("expected RE or RE,IM, got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpw", version, about = "Global DPW construction for the Smyth potential in SU(1,1)")]
struct Cli {
    /// JSON file with settings; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dressing parameter a (default: Euler's constant).
    #[arg(long, global = true)]
    a: Option<f64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// sinh-Gordon profile u(x) on log-spaced radii, as JSON lines.
    Profile(ProfileArgs),
    /// Spacelike CMC surface as a Wavefront OBJ with a JSON sidecar.
    Surface(SurfaceArgs),
    /// Global Iwasawa factorization at one radius, dumped as loop JSON.
    Factorize(FactorizeArgs),
    /// Point evaluation of I₀ and Y₀(ix) on a sheet of the cover.
    Bessel(BesselArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    ntheta: Option<usize>,
    /// Mean curvature.
    #[arg(long = "H", visible_alias = "h-mean")]
    h: Option<f64>,
    /// Point of the associated family on the unit circle, RE or RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda0: Option<[f64; 2]>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dr: Option<f64>,
    #[arg(long)]
    dtheta: Option<f64>,
    /// Half-width of the difference stencil.
    #[arg(long)]
    stencil: Option<usize>,
    /// OBJ path; the sidecar goes next to it with a .json extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FactorizeArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    n_nodes: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BesselArgs {
    /// Point on the cover, RE or RE,IM.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    x: [f64; 2],
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    sheet: i64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated module names, check keys or ids.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    /// Multiplies every upper bound and tolerance band.
    #[arg(long)]
    tol_scale: Option<f64>,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    json: bool,
}

fn merge<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Runs one invocation and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {e}", e.module());
            e.exit_code()
        }
    }
}

fn init_threads(cfg: &RunConfig) {
    let env = std::env::var("DPW_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    let n = match (cfg.threads, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if let Some(n) = n {
        // Only the first pool of the process can be installed; later calls
        // keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_json_file(p)?,
        None => RunConfig::default(),
    };
    merge(&mut cfg.a, cli.a);
    cfg.check_common()?;
    match cli.cmd {
        Command::Profile(a) => {
            let p = &mut cfg.profile;
            merge(&mut p.r_min, a.r_min);
            merge(&mut p.r_max, a.r_max);
            merge(&mut p.points, a.points);
            p.out = a.out.or(p.out.take());
            init_threads(&cfg);
            cmd_profile(&cfg, out)
        }
        Command::Surface(a) => {
            let s = &mut cfg.surface;
            merge(&mut s.r_min, a.r_min);
            merge(&mut s.r_max, a.r_max);
            merge(&mut s.theta_min, a.theta_min);
            merge(&mut s.theta_max, a.theta_max);
            merge(&mut s.nr, a.nr);
            merge(&mut s.ntheta, a.ntheta);
            merge(&mut s.h, a.h);
            merge(&mut s.lambda0, a.lambda0);
            merge(&mut s.n, a.n);
            merge(&mut s.dr, a.dr);
            merge(&mut s.dtheta, a.dtheta);
            merge(&mut s.stencil, a.stencil);
            s.out = a.out.or(s.out.take());
            init_threads(&cfg);
            cmd_surface(&cfg, out)
        }
        Command::Factorize(a) => {
            let f = &mut cfg.factorize;
            merge(&mut f.r, a.r);
            f.method = a.method.or(f.method.take());
            merge(&mut f.n, a.n);
            f.s_max = a.s_max.or(f.s_max);
            f.n_nodes = a.n_nodes.or(f.n_nodes);
            f.out = a.out.or(f.out.take());
            init_threads(&cfg);
            cmd_factorize(&cfg, out)
        }
        Command::Bessel(a) => cmd_bessel(a.x, a.sheet, out),
        Command::Verify(a) => {
            let v = &mut cfg.verify;
            merge(&mut v.only, a.only);
            merge(&mut v.tol_scale, a.tol_scale);
            v.report = a.report.or(v.report.take());
            init_threads(&cfg);
            cmd_verify(&cfg, a.json, out)
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> DpwError {
    DpwError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| DpwError::Io(format!("stdout: {e}")))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn config_echo(cfg: &RunConfig, section: Value) -> Value {
    json!({ "a": cfg.a, "threads": cfg.threads, "command": section })
}

pub fn cmd_profile(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let p = &cfg.profile;
    if p.points == 0 {
        return Err(DpwError::Config("points must be at least 1".into()));
    }
    if !(p.r_min > 0.0 && p.r_max >= p.r_min && p.r_max.is_finite()) {
        return Err(DpwError::Config(format!("bad r range [{}, {}]", p.r_min, p.r_max)));
    }
    let radii = geometry::log_spaced_r(0.5 * p.r_min * p.r_min, 0.5 * p.r_max * p.r_max, p.points);
    let prof = geometry::sinh_profile(&radii, cfg.a)?;
    let lines = prof.to_json_lines();
    let failures: Vec<Value> = prof
        .failures()
        .map(|n| json!({ "r": n.r, "x": n.x, "error": n.error }))
        .collect();
    let first = &prof.nodes[0];
    let law = first.v.map(|v| (0.5 * v).exp() / (-EULER_GAMMA - 2.0 * first.r.ln()).sqrt());
    let summary = json!({
        "config": config_echo(cfg, serde_json::to_value(p).expect("config serializes")),
        "points": prof.nodes.len(),
        "failures": failures.len(),
        "failedNodes": failures,
        "maxResidual": prof.max_residual(),
        "maxImaginary": prof.max_imag(),
        "nearZero": { "r": first.r, "x": first.x, "uOverLogX": prof.near_zero_ratio(), "ev2OverLaw": law },
    });
    match &p.out {
        Some(path) => {
            write_file(path, &lines)?;
            write_file(&path.with_extension("summary.json"), &pretty(&summary))?;
            emit(out, &pretty(&summary))?;
        }
        None => emit(out, &lines)?,
    }
    if !failures.is_empty() {
        let first = prof.failures().next().and_then(|n| n.error.clone()).unwrap_or_default();
        return Err(DpwError::NotFactorizable(format!(
            "{} of {} profile nodes failed; first: {first}",
            failures.len(),
            prof.nodes.len()
        )));
    }
    Ok(EXIT_OK)
}

pub fn surface_options(cfg: &RunConfig) -> Result<SurfaceOptions> {
    let s = &cfg.surface;
    let lambda0 = C::new(s.lambda0[0], s.lambda0[1]);
    if (lambda0.norm() - 1.0).abs() > 1e-12 {
        return Err(DpwError::Config(format!("lambda0 = {lambda0} is not on the unit circle")));
    }
    if s.h == 0.0 || !s.h.is_finite() {
        return Err(DpwError::Config(format!("H must be finite and nonzero, got {}", s.h)));
    }
    if s.nr < 2 || s.ntheta < 2 {
        return Err(DpwError::Config("nr and ntheta must be at least 2".into()));
    }
    if !(s.dr > 0.0 && s.dtheta > 0.0) || s.stencil == 0 || s.n < 8 {
        return Err(DpwError::Config("dr, dtheta must be positive, stencil >= 1 and n >= 8".into()));
    }
    Ok(SurfaceOptions {
        r_range: (s.r_min, s.r_max),
        theta_range: (s.theta_min, s.theta_max),
        nr: s.nr,
        ntheta: s.ntheta,
        lambda0,
        h: s.h,
        a: cfg.a,
        geometry: GeometryOptions { n: s.n, dr: s.dr, dtheta: s.dtheta, half_width: s.stencil },
    })
}

pub fn cmd_surface(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let opts = surface_options(cfg)?;
    let mesh = geometry::surface_mesh(&opts)?;
    let mut side = mesh.sidecar();
    side["config"] = config_echo(cfg, serde_json::to_value(&cfg.surface).expect("config serializes"));
    match &cfg.surface.out {
        Some(path) => {
            write_file(path, &mesh.to_obj())?;
            write_file(&path.with_extension("json"), &pretty(&side))?;
            emit(out, &pretty(&side))?;
        }
        None => emit(out, &mesh.to_obj())?,
    }
    Ok(EXIT_OK)
}

pub fn factorize_options(cfg: &RunConfig) -> Result<FactorizeOptions> {
    let f = &cfg.factorize;
    let method = f.method.as_deref().map(str::parse::<Method>).transpose()?;
    let grid = if f.s_max.is_some() || f.n_nodes.is_some() {
        let base = ContourGrid::for_radius(f.r)?;
        let s = f.s_max.unwrap_or(base.truncation().1);
        let per_half = match f.n_nodes {
            Some(n) if n < 8 || n % 2 != 0 => {
                return Err(DpwError::Config(format!("nNodes must be even and at least 8, got {n}")));
            }
            Some(n) if (n / 2) % 2 == 0 => {
                return Err(DpwError::Config(format!(
                    "nNodes / 2 must be odd so the grid has nodes at lambda = +-1, got {n}"
                )));
            }
            Some(n) => n / 2,
            None => base.per_half(),
        };
        // Validate here so a bad grid is a usage error.
        ContourGrid::new(s, per_half)?;
        Some((s, per_half))
    } else {
        None
    };
    if f.n < 16 || !f.n.is_power_of_two() {
        return Err(DpwError::Config(format!("n must be a power of two >= 16, got {}", f.n)));
    }
    Ok(FactorizeOptions { n: f.n, method, grid, ..Default::default() })
}

pub fn cmd_factorize(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let f = &cfg.factorize;
    if !(f.r > 0.0 && f.r.is_finite()) {
        return Err(DpwError::Config(format!("r must be positive, got {}", f.r)));
    }
    let opts = factorize_options(cfg)?;
    let gf = rhfactor::global_factorize_with(f.r, cfg.a, &opts)?;
    let mut doc = json!({
        "config": config_echo(cfg, serde_json::to_value(f).expect("config serializes")),
        "r": gf.r,
        "a": gf.a,
        "method": gf.method.label(),
        "wCase": gf.w_case,
        "epsilon": gf.epsilon,
        "v": gf.v,
        "ev2": gf.ev2(),
        "defects": {
            "reconstruction": gf.reconstruction_defect,
            "unitarity": gf.unitarity_defect,
            "identityMiddle": gf.identity_middle_defect,
            "b0": gf.b0_defect,
        },
        "F": gf.f.to_json(),
        "B": gf.b.to_json(),
    });
    if let Some(sol) = &gf.rh {
        let pos = rhfactor::positivity_check(gf.r, &sol.grid);
        doc["rh"] = sol.diagnostics(pos.min_eigenvalue, Some(gf.v));
    }
    let text = pretty(&doc);
    match &f.out {
        Some(path) => write_file(path, &text)?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

fn cjson(z: C) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_bessel(x: [f64; 2], sheet: i64, out: &mut dyn Write) -> Result<i32> {
    let p = BranchPoint::new(C::new(x[0], x[1]), sheet).map_err(|e| DpwError::Config(e.to_string()))?;
    let pair = bessel::eval_y0i(p);
    let route = if p.x.norm() <= X_SWITCH { "series" } else { "asymptotic" };
    let mut doc = json!({
        "x": cjson(p.x),
        "sheet": p.sheet,
        "totalArg": p.total_arg(),
        "value": cjson(p.value()),
        "route": route,
        "I0": cjson(pair.i0),
        "dI0": cjson(pair.d_i0),
        "Y0i": cjson(pair.y0i),
        "dY0i": cjson(pair.d_y0i),
        "scaledWronskian": cjson(pair.scaled_wronskian()),
    });
    if let Ok((_, rem)) = bessel::asymptotic_pair(p, N_TERMS) {
        doc["T1"] = cjson(rem.t1);
        doc["T2"] = cjson(rem.t2);
        doc["asymptoticTerms"] = json!(rem.n_terms);
    }
    emit(out, &pretty(&doc))?;
    Ok(EXIT_OK)
}

pub fn cmd_verify(cfg: &RunConfig, as_json: bool, out: &mut dyn Write) -> Result<i32> {
    let v = &cfg.verify;
    if !(v.tol_scale > 0.0 && v.tol_scale.is_finite()) {
        return Err(DpwError::Config(format!("tol-scale must be positive, got {}", v.tol_scale)));
    }
    let known = verify::selectors();
    if let Some(bad) = v.only.iter().find(|o| !known.contains(o)) {
        return Err(DpwError::Config(format!("unknown check selector {bad:?}; known: {}", known.join(", "))));
    }
    let opts = verify::VerifyOptions { only: v.only.clone(), tol_scale: v.tol_scale };
    let results = verify::run_checks(&opts);
    let mut report = verify::report_json(&results, &opts);
    report["config"] = config_echo(cfg, serde_json::to_value(v).expect("config serializes"));
    if let Some(path) = &v.report {
        write_file(path, &pretty(&report))?;
    }
    if as_json {
        emit(out, &pretty(&report))?;
    } else {
        emit(out, &verify::report_table(&results))?;
    }
    Ok(if results.iter().all(verify::CheckResult::passed) { EXIT_OK } else { EXIT_VERIFY })
}
