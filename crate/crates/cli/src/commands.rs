//! Implementations of the four subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use biharmonic_core::catalog::{
    self, CaseId, FamilyKind, FamilySpec, Tolerances, VerifyOptions, Window,
};
use biharmonic_core::curves::{
    family_from_complex_polys, family_from_hpn_polys, family_from_real_polys, CurveFamily,
    PolyVec, PolyVecC,
};
use biharmonic_core::frenet::{
    classify_biharmonic_tangent, frenet_plane_sampled, frenet_space_sampled,
};
use biharmonic_core::integrator::{solve_lift_monitored, IntegratorConfig, Method};
use biharmonic_core::liealg::Complex64;
use biharmonic_core::planar::GridSpec;
use biharmonic_core::spaces::Model;

use crate::io::{
    csv_header, csv_row, fmt_f64, read_csv, write_atomic, RunManifest,
};

pub fn default_n(case: CaseId) -> usize {
    match case {
        CaseId::SphereHelix | CaseId::EuclideanPoly => 3,
        _ => 2,
    }
}

pub fn default_params(case: CaseId) -> Vec<f64> {
    match case {
        CaseId::SphereGreatCircle => vec![1.0, 0.0],
        CaseId::SphereCircleII | CaseId::SphereCircleIII => vec![],
        CaseId::SphereHelix => vec![0.6, 0.8],
        _ if case.is_planar() => vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
        _ => vec![0.0, 0.0, 1.0],
    }
}

pub fn parse_window(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("window must be t0:t1:n, got '{s}'");
    }
    let t0: f64 = parts[0].parse().context("window t0")?;
    let t1: f64 = parts[1].parse().context("window t1")?;
    let n: usize = parts[2].parse().context("window sample count")?;
    Ok((t0, t1, n))
}

pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        bail!("range must be t0:t1, got '{s}'");
    }
    Ok((
        parts[0].parse().context("range t0")?,
        parts[1].parse().context("range t1")?,
    ))
}

pub fn parse_grid(s: &str) -> Result<GridSpec> {
    let axes: Vec<&str> = s.split(',').collect();
    if axes.len() != 2 {
        bail!("grid must be x0:x1:nx,y0:y1:ny, got '{s}'");
    }
    let (x0, x1, nx) = parse_window(axes[0]).context("grid x-axis")?;
    let (y0, y1, ny) = parse_window(axes[1]).context("grid y-axis")?;
    Ok(GridSpec::new(x0, x1, y0, y1, nx, ny)?)
}

fn resolve_spec(
    space: &str,
    case: &str,
    n: Option<usize>,
    params: Option<Vec<f64>>,
    axis: usize,
) -> Result<FamilySpec> {
    let case = catalog::parse_case(space, case)?;
    let n = n.unwrap_or_else(|| default_n(case));
    let params = params.unwrap_or_else(|| default_params(case));
    Ok(FamilySpec::new(case, n, params).with_axis(axis))
}

fn resolve_window(
    case: CaseId,
    window: &Option<String>,
    grid: &Option<String>,
) -> Result<Window> {
    if case.is_planar() {
        Ok(match grid {
            Some(g) => Window::Grid(parse_grid(g)?),
            None => Window::default_for(case),
        })
    } else {
        Ok(match window {
            Some(w) => {
                let (t0, t1, samples) = parse_window(w)?;
                Window::Curve { t0, t1, samples }
            }
            None => Window::default_for(case),
        })
    }
}

#[allow(clippy::too_many_arguments)]
pub struct VerifyCmd {
    pub space: String,
    pub case: String,
    pub n: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub axis: usize,
    pub window: Option<String>,
    pub grid: Option<String>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub skip_closed_form: bool,
}

pub fn cmd_verify(args: VerifyCmd) -> Result<i32> {
    let spec = resolve_spec(&args.space, &args.case, args.n, args.params, args.axis)?;
    let window = resolve_window(spec.case, &args.window, &args.grid)?;
    let tol = match args.tol {
        Some(t) => Tolerances {
            harmonic: t,
            biharmonic: t,
            integrability: t,
            closed_form: t,
        },
        None => Tolerances::default(),
    };
    let opts = VerifyOptions {
        check_closed_form: !args.skip_closed_form && spec.case.has_closed_form(),
        ..Default::default()
    };
    let report = catalog::verify_family(&spec, window, tol, opts)?;
    let exit = if report.verdict_match { 0 } else { 1 };
    let json = serde_json::to_string_pretty(&report)?;

    if let Some(out) = &args.out {
        write_atomic(out, json.as_bytes())?;
        let mut manifest = RunManifest::new("verify");
        manifest
            .arg("space", &args.space)
            .arg("case", &args.case)
            .arg("n", spec.n)
            .arg(
                "params",
                spec.params
                    .iter()
                    .map(|p| fmt_f64(*p))
                    .collect::<Vec<_>>()
                    .join(","),
            )
            .arg("axis", spec.axis)
            .arg("tolerances", serde_json::to_string(&tol)?)
            .arg("window", serde_json::to_string(&window)?)
            .output(out);
        manifest.exit_status = exit;
        manifest.write_beside(out)?;
    } else {
        println!("{json}");
    }
    if exit != 0 {
        eprintln!(
            "verdict mismatch: expected {}, measured {} (harmonic max {:.3e}, biharmonic max {:.3e}{})",
            report.expected,
            report.measured,
            report.harmonic.max,
            report.biharmonic.max,
            report
                .closed_form_max_distance
                .map(|d| format!(", closed-form distance {d:.3e}"))
                .unwrap_or_default(),
        );
    }
    Ok(exit)
}

/// Polynomial coordinate family description accepted by `--family-file`.
#[derive(Debug, Deserialize)]
struct FamilyFile {
    #[allow(dead_code)]
    schema_version: u32,
    space: String,
    n: usize,
    #[serde(default)]
    coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    coeffs_re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    coeffs_im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    z_re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    z_im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    w_re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    w_im: Option<Vec<Vec<f64>>>,
}

fn complex_polys(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<PolyVecC> {
    if re.len() != im.len() {
        bail!("real and imaginary coefficient tables differ in length");
    }
    let coeffs = re
        .iter()
        .zip(im)
        .map(|(r, i)| {
            let deg = r.len().max(i.len());
            (0..deg)
                .map(|k| {
                    Complex64::new(
                        r.get(k).copied().unwrap_or(0.0),
                        i.get(k).copied().unwrap_or(0.0),
                    )
                })
                .collect()
        })
        .collect();
    Ok(PolyVecC { coeffs })
}

fn load_family_file(path: &Path) -> Result<CurveFamily> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: FamilyFile = serde_json::from_str(&text).context("parsing family file")?;
    let fam = match file.space.as_str() {
        "sphere" | "euclidean" => {
            let coeffs = file
                .coeffs
                .context("'coeffs' required for sphere/euclidean families")?;
            let model = if file.space == "sphere" {
                Model::new(biharmonic_core::spaces::Family::Sphere(file.n))?
            } else {
                Model::new(biharmonic_core::spaces::Family::Euclidean(file.n))?
            };
            family_from_real_polys(model, PolyVec { coeffs })?
        }
        "cpn" => {
            let re = file.coeffs_re.context("'coeffs_re' required for cpn")?;
            let im = file.coeffs_im.context("'coeffs_im' required for cpn")?;
            let model = Model::new(biharmonic_core::spaces::Family::ComplexProjective(file.n))?;
            family_from_complex_polys(model, complex_polys(&re, &im)?)?
        }
        "hpn" => {
            let z = complex_polys(
                &file.z_re.context("'z_re' required for hpn")?,
                &file.z_im.context("'z_im' required for hpn")?,
            )?;
            let w = complex_polys(
                &file.w_re.context("'w_re' required for hpn")?,
                &file.w_im.context("'w_im' required for hpn")?,
            )?;
            let model =
                Model::new(biharmonic_core::spaces::Family::QuaternionProjective(file.n))?;
            family_from_hpn_polys(model, z, w)?
        }
        other => bail!("unknown space '{other}' in family file"),
    };
    Ok(fam)
}

#[allow(clippy::too_many_arguments)]
pub struct IntegrateCmd {
    pub space: Option<String>,
    pub case: Option<String>,
    pub n: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub axis: usize,
    pub family_file: Option<PathBuf>,
    pub t_range: String,
    pub method: String,
    pub steps: usize,
    pub drift_tol: f64,
    pub out: PathBuf,
    pub tangent_out: Option<PathBuf>,
}

pub fn cmd_integrate(args: IntegrateCmd) -> Result<i32> {
    let (t0, t1) = parse_range(&args.t_range)?;
    let method = Method::parse(&args.method)?;

    let (family, spec) = match (&args.family_file, &args.space, &args.case) {
        (Some(path), _, _) => (load_family_file(path)?, None),
        (None, Some(space), Some(case)) => {
            let spec = resolve_spec(space, case, args.n, args.params.clone(), args.axis)?;
            match catalog::make_family(&spec)? {
                FamilyKind::Curve(fam) => (fam, Some(spec)),
                FamilyKind::Planar(_) => {
                    bail!("integrate expects a curve case; '{}' is planar", spec.case.id())
                }
            }
        }
        _ => bail!("provide either --space/--case or --family-file"),
    };

    let model = *family.model();
    let cfg = IntegratorConfig::new(method, args.steps).with_drift_tol(args.drift_tol);
    let (traj, failure) = solve_lift_monitored(&family, &model.identity(), (t0, t1), &cfg)?;

    // Trajectory CSV: t, canonical point coordinates, drift.
    let labels = {
        let mut l = vec!["t".to_string()];
        l.extend(traj.points[0].coord_labels());
        l.push("drift".into());
        l
    };
    let mut csv = csv_header(&labels);
    for i in 0..traj.len() {
        let mut row = vec![traj.times[i]];
        row.extend(traj.points[i].canonicalize().flat_coords());
        row.push(traj.drift[i]);
        csv.push_str(&csv_row(&row));
    }
    write_atomic(&args.out, csv.as_bytes())?;

    let mut outputs = vec![args.out.clone()];
    if let Some(tangent_out) = &args.tangent_out {
        let spec = spec
            .as_ref()
            .context("--tangent-out needs a catalog case built from a tangent curve")?;
        let dim = spec.case.tangent_curve_dim().with_context(|| {
            format!("{} is not built from a tangent curve", spec.case.id())
        })?;
        let labels: Vec<String> = std::iter::once("s".to_string())
            .chain(["x", "y", "z"].iter().take(dim).map(|s| s.to_string()))
            .collect();
        let mut csv = csv_header(&labels);
        for &t in &traj.times {
            let mut row = vec![t];
            row.extend(catalog::tangent_curve_point(spec, t)?);
            csv.push_str(&csv_row(&row));
        }
        write_atomic(tangent_out, csv.as_bytes())?;
        outputs.push(tangent_out.clone());
    }

    let exit = if failure.is_some() { 1 } else { 0 };
    let mut manifest = RunManifest::new("integrate");
    manifest
        .arg("t_range", &args.t_range)
        .arg("method", method.name())
        .arg("steps", args.steps)
        .arg("drift_tol", fmt_f64(args.drift_tol));
    if let Some(spec) = &spec {
        manifest
            .arg("space", spec.case.space())
            .arg("case", spec.case.case())
            .arg("n", spec.n)
            .arg(
                "params",
                spec.params
                    .iter()
                    .map(|p| fmt_f64(*p))
                    .collect::<Vec<_>>()
                    .join(","),
            );
    }
    if let Some(path) = &args.family_file {
        manifest.arg("family_file", path.display());
    }
    for out in &outputs {
        manifest.output(out);
    }
    manifest.partial = failure.is_some();
    manifest.exit_status = exit;
    manifest.write_beside(&args.out)?;

    if let Some(f) = failure {
        eprintln!(
            "drift {:.3e} exceeded tolerance {:.3e} at step {} (t = {}); partial trajectory written",
            f.drift, f.tol, f.step, f.t
        );
    }
    Ok(exit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Harmonic,
    Biharmonic,
    Integrability,
}

impl ResidualKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(Self::Harmonic),
            "biharmonic" => Ok(Self::Biharmonic),
            "integrability" => Ok(Self::Integrability),
            other => bail!("unknown residual kind '{other}' (harmonic, biharmonic, integrability)"),
        }
    }
}

/// One scanned parameter axis: name and its values.
#[derive(Debug, Clone)]
pub struct ScanAxis {
    pub key: String,
    pub values: Vec<f64>,
}

pub fn parse_scan_axis(s: &str) -> Result<ScanAxis> {
    let (key, range) = s
        .split_once('=')
        .with_context(|| format!("scan axis must be key=lo:hi:count, got '{s}'"))?;
    let (lo, hi, count) = parse_window(range)?;
    let values = match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    };
    Ok(ScanAxis {
        key: key.trim().to_string(),
        values,
    })
}

fn param_index(case: CaseId, key: &str) -> Result<usize> {
    let keys: &[&str] = if case.is_planar() {
        &["a1", "b1", "c1", "a2", "b2", "c2"]
    } else if case == CaseId::SphereGreatCircle {
        &["a", "b"]
    } else {
        &["a", "b", "c"]
    };
    keys.iter()
        .position(|&k| k == key)
        .with_context(|| format!("'{key}' is not a parameter of {} ({keys:?})", case.id()))
}

pub struct ScanCmd {
    pub space: String,
    pub case: String,
    pub n: Option<usize>,
    pub params: Option<Vec<f64>>,
    pub axis: usize,
    pub scan: Vec<String>,
    pub residual: String,
    pub window: Option<String>,
    pub grid: Option<String>,
    pub out: PathBuf,
}

pub fn cmd_scan(args: ScanCmd) -> Result<i32> {
    let base = resolve_spec(&args.space, &args.case, args.n, args.params.clone(), args.axis)?;
    let window = resolve_window(base.case, &args.window, &args.grid)?;
    let kind = ResidualKind::parse(&args.residual)?;
    if kind == ResidualKind::Integrability && !base.case.is_planar() {
        bail!("integrability residuals are defined for planar cases only");
    }

    let mut axes = args
        .scan
        .iter()
        .map(|s| parse_scan_axis(s))
        .collect::<Result<Vec<_>>>()?;
    axes.sort_by(|a, b| a.key.cmp(&b.key));
    for axis in &axes {
        param_index(base.case, &axis.key)?;
    }

    // Cartesian product in lexicographic (sorted-key, row-major) order.
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for &v in &axis.values {
                let mut c = combo.clone();
                c.push(v);
                next.push(c);
            }
        }
        combos = next;
    }
    if axes.iter().any(|a| a.values.is_empty()) {
        combos.clear();
    }

    let evaluate = |combo: &Vec<f64>| -> Result<f64> {
        let mut spec = base.clone();
        for (axis, &value) in axes.iter().zip(combo.iter()) {
            let idx = param_index(spec.case, &axis.key)?;
            spec.params[idx] = value;
        }
        let report = catalog::verify_family(
            &spec,
            window,
            Tolerances::default(),
            VerifyOptions {
                check_closed_form: false,
                ..Default::default()
            },
        )?;
        Ok(match kind {
            ResidualKind::Harmonic => report.harmonic.max,
            ResidualKind::Biharmonic => report.biharmonic.max,
            ResidualKind::Integrability => {
                let ik = report.integrability_k.map(|s| s.max).unwrap_or(0.0);
                let im = report.integrability_m.map(|s| s.max).unwrap_or(0.0);
                ik.max(im)
            }
        })
    };

    // BIHARMONIC_LAB_THREADS caps the worker count (0 = rayon default).
    let threads = std::env::var("BIHARMONIC_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building scan thread pool")?;
    let residuals: Vec<Result<f64>> = pool.install(|| {
        use rayon::prelude::*;
        combos.par_iter().map(evaluate).collect()
    });

    let mut labels: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
    labels.push("max_residual".into());
    let mut csv = csv_header(&labels);
    for (combo, value) in combos.iter().zip(residuals) {
        let mut row = combo.clone();
        row.push(value?);
        csv.push_str(&csv_row(&row));
    }
    write_atomic(&args.out, csv.as_bytes())?;

    let mut manifest = RunManifest::new("scan");
    manifest
        .arg("space", &args.space)
        .arg("case", &args.case)
        .arg("n", base.n)
        .arg("residual", &args.residual)
        .arg("scan", args.scan.join(";"))
        .arg("window", serde_json::to_string(&window)?)
        .output(&args.out);
    manifest.write_beside(&args.out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct FrenetReport {
    schema_version: u32,
    input: String,
    ambient: usize,
    samples: usize,
    kappa_mean: f64,
    kappa_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_deviation: Option<f64>,
    verdict: String,
    detail: String,
    s: Vec<f64>,
    kappa: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<f64>>,
}

pub struct FrenetCmd {
    pub input: PathBuf,
    pub ambient: usize,
    pub out: Option<PathBuf>,
}

pub fn cmd_frenet(args: FrenetCmd) -> Result<i32> {
    let (header, rows) = read_csv(&args.input)?;
    if rows.len() < 7 {
        bail!("need at least 7 samples, got {}", rows.len());
    }
    if header.len() != args.ambient + 1 {
        bail!(
            "expected {} columns (s plus {} coordinates), got {}",
            args.ambient + 1,
            args.ambient,
            header.len()
        );
    }
    let s: Vec<f64> = rows.iter().map(|r| r[0]).collect();

    let (data, class) = match args.ambient {
        2 => {
            let pts: Vec<[f64; 2]> = rows.iter().map(|r| [r[1], r[2]]).collect();
            let data = frenet_plane_sampled(&s, &pts)?;
            let class = classify_biharmonic_tangent(&data, 2)?;
            (data, class)
        }
        3 => {
            let pts: Vec<[f64; 3]> = rows.iter().map(|r| [r[1], r[2], r[3]]).collect();
            let data = frenet_space_sampled(&s, &pts)?;
            let class = classify_biharmonic_tangent(&data, 3)?;
            (data, class)
        }
        other => bail!("ambient dimension must be 2 or 3, got {other}"),
    };

    let report = FrenetReport {
        schema_version: 1,
        input: args.input.display().to_string(),
        ambient: args.ambient,
        samples: data.s.len(),
        kappa_mean: class.kappa_mean,
        kappa_deviation: class.kappa_deviation,
        tau_mean: class.tau_mean,
        tau_deviation: class.tau_deviation,
        verdict: class.verdict.name().to_string(),
        detail: class.detail.clone(),
        s: data.s.clone(),
        kappa: data.kappa.clone(),
        tau: data.tau.clone(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(out) = &args.out {
        write_atomic(out, json.as_bytes())?;
        let mut manifest = RunManifest::new("frenet");
        manifest
            .arg("input", args.input.display())
            .arg("ambient", args.ambient)
            .output(out);
        manifest.write_beside(out)?;
    } else {
        println!("{json}");
    }
    Ok(0)
}
