//! Frenet apparatus for plane and space tangent curves, and the
//! classification of biharmonic tangent curves via curvature and torsion.
//!
//! For a unit-speed plane curve the signed curvature is kappa = <e1', e2>
//! with e2 the +90 degree rotation of e1; a tangent curve is biharmonic
//! exactly when kappa is constant in {0, 1, -1}. For a space curve,
//! kappa = |e1'| and tau = -<e3', e2>; the biharmonic condition is kappa = 0
//! or constant (kappa, tau) with kappa^2 + tau^2 = 1.

use crate::curves::Provenance;
use crate::error::{Error, Result};
use crate::numdiff::fornberg_weights;

#[derive(Debug, Clone, Copy)]
pub struct PlaneCurveJet {
    pub p: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct SpaceCurveJet {
    pub p: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub d3: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct Frame2 {
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct Frame3 {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub e3: [f64; 3],
}

#[derive(Debug, Clone)]
pub enum Frames {
    Plane(Vec<Frame2>),
    Space(Vec<Frame3>),
}

/// Arc-length samples with curvature, torsion (space curves with
/// non-vanishing curvature), and frames.
#[derive(Debug, Clone)]
pub struct FrenetData {
    pub s: Vec<f64>,
    pub kappa: Vec<f64>,
    pub tau: Option<Vec<f64>>,
    pub frames: Frames,
    pub provenance: Provenance,
}

impl FrenetData {
    pub fn ambient_dim(&self) -> usize {
        match self.frames {
            Frames::Plane(_) => 2,
            Frames::Space(_) => 3,
        }
    }

    pub fn torsion(&self) -> Result<&[f64]> {
        match &self.tau {
            Some(t) => Ok(t),
            None => Err(Error::VanishingCurvature {
                s: self.s.first().copied().unwrap_or(0.0),
                kappa: self.kappa.iter().copied().fold(f64::INFINITY, f64::min),
            }),
        }
    }
}

const UNIT_SPEED_TOL_ANALYTIC: f64 = 1e-8;
const UNIT_SPEED_TOL_SAMPLED: f64 = 1e-4;
/// Below this, curvature counts as vanishing and torsion is not reported.
pub const KAPPA_FLOOR: f64 = 1e-10;

fn dot2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn check_unit_speed(speeds: &[f64], tol: f64) -> Result<()> {
    let min = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    let max = speeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (min - 1.0).abs() > tol || (max - 1.0).abs() > tol {
        return Err(Error::NonUnitSpeed { min, max });
    }
    Ok(())
}

/// Frenet data of an analytic unit-speed plane curve on an s-grid. The
/// frame is oriented (e2 is e1 rotated by +90 degrees) and kappa is signed.
pub fn frenet_plane(
    curve: impl Fn(f64) -> PlaneCurveJet,
    grid: &[f64],
) -> Result<FrenetData> {
    let jets: Vec<PlaneCurveJet> = grid.iter().map(|&s| curve(s)).collect();
    let speeds: Vec<f64> = jets.iter().map(|j| dot2(&j.d1, &j.d1).sqrt()).collect();
    check_unit_speed(&speeds, UNIT_SPEED_TOL_ANALYTIC)?;
    Ok(plane_data_from_jets(
        grid.to_vec(),
        &jets,
        Provenance::Analytic,
    ))
}

fn plane_data_from_jets(s: Vec<f64>, jets: &[PlaneCurveJet], provenance: Provenance) -> FrenetData {
    let mut kappa = Vec::with_capacity(jets.len());
    let mut frames = Vec::with_capacity(jets.len());
    for j in jets {
        let e1 = j.d1;
        let e2 = [-e1[1], e1[0]];
        kappa.push(dot2(&j.d2, &e2));
        frames.push(Frame2 { e1, e2 });
    }
    FrenetData {
        s,
        kappa,
        tau: None,
        frames: Frames::Plane(frames),
        provenance,
    }
}

/// Frenet data of an analytic unit-speed space curve. Torsion comes from
/// tau = <p' x p'', p'''> / kappa^2 and is reported only where the
/// curvature stays above `KAPPA_FLOOR` on the whole grid.
pub fn frenet_space(
    curve: impl Fn(f64) -> SpaceCurveJet,
    grid: &[f64],
) -> Result<FrenetData> {
    let jets: Vec<SpaceCurveJet> = grid.iter().map(|&s| curve(s)).collect();
    let speeds: Vec<f64> = jets.iter().map(|j| dot3(&j.d1, &j.d1).sqrt()).collect();
    check_unit_speed(&speeds, UNIT_SPEED_TOL_ANALYTIC)?;
    Ok(space_data_from_jets(
        grid.to_vec(),
        &jets,
        Provenance::Analytic,
    ))
}

fn space_data_from_jets(s: Vec<f64>, jets: &[SpaceCurveJet], provenance: Provenance) -> FrenetData {
    let mut kappa = Vec::with_capacity(jets.len());
    let mut tau = Vec::with_capacity(jets.len());
    let mut frames = Vec::with_capacity(jets.len());
    let mut torsion_defined = true;
    for j in jets {
        let e1 = j.d1;
        let k = dot3(&j.d2, &j.d2).sqrt();
        kappa.push(k);
        if k > KAPPA_FLOOR {
            let e2 = [j.d2[0] / k, j.d2[1] / k, j.d2[2] / k];
            let e3 = cross(&e1, &e2);
            frames.push(Frame3 { e1, e2, e3 });
            tau.push(dot3(&cross(&j.d1, &j.d2), &j.d3) / (k * k));
        } else {
            torsion_defined = false;
            // Degenerate normal: complete the tangent to a frame.
            let pick = if e1[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let raw = cross(&e1, &pick);
            let norm = dot3(&raw, &raw).sqrt();
            let e2 = [raw[0] / norm, raw[1] / norm, raw[2] / norm];
            let e3 = cross(&e1, &e2);
            frames.push(Frame3 { e1, e2, e3 });
            tau.push(0.0);
        }
    }
    FrenetData {
        s,
        kappa,
        tau: torsion_defined.then_some(tau),
        frames: Frames::Space(frames),
        provenance,
    }
}

fn validate_samples(s: &[f64], len: usize) -> Result<()> {
    if len < 5 {
        return Err(Error::TooFewSamples { got: len, need: 5 });
    }
    if s.len() != len {
        return Err(Error::ShapeMismatch(format!(
            "{} arc-length values for {len} points",
            s.len()
        )));
    }
    if s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "arc-length column must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Derivative rows (orders 0..=m) at node `i` of possibly non-uniform
/// samples, from a five-node window.
fn window_weights(s: &[f64], i: usize, m: usize) -> (usize, Vec<Vec<f64>>) {
    let n = s.len();
    let start = i.saturating_sub(2).min(n - 5);
    let nodes = &s[start..start + 5];
    (start, fornberg_weights(s[i], nodes, m))
}

/// Frenet data from sampled plane-curve points (finite-difference
/// provenance); the grid may be non-uniform.
pub fn frenet_plane_sampled(s: &[f64], points: &[[f64; 2]]) -> Result<FrenetData> {
    validate_samples(s, points.len())?;
    let mut jets = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let (start, w) = window_weights(s, i, 2);
        let mut jet = PlaneCurveJet {
            p: points[i],
            d1: [0.0; 2],
            d2: [0.0; 2],
        };
        for (k, point) in points[start..start + 5].iter().enumerate() {
            for (c, &coord) in point.iter().enumerate() {
                jet.d1[c] += w[1][k] * coord;
                jet.d2[c] += w[2][k] * coord;
            }
        }
        jets.push(jet);
    }
    let speeds: Vec<f64> = jets.iter().map(|j| dot2(&j.d1, &j.d1).sqrt()).collect();
    check_unit_speed(&speeds, UNIT_SPEED_TOL_SAMPLED)?;
    Ok(plane_data_from_jets(
        s.to_vec(),
        &jets,
        Provenance::FiniteDifference,
    ))
}

/// Frenet data from sampled space-curve points.
pub fn frenet_space_sampled(s: &[f64], points: &[[f64; 3]]) -> Result<FrenetData> {
    validate_samples(s, points.len())?;
    let mut jets = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let (start, w) = window_weights(s, i, 3);
        let mut jet = SpaceCurveJet {
            p: points[i],
            d1: [0.0; 3],
            d2: [0.0; 3],
            d3: [0.0; 3],
        };
        for (k, point) in points[start..start + 5].iter().enumerate() {
            for (c, &coord) in point.iter().enumerate() {
                jet.d1[c] += w[1][k] * coord;
                jet.d2[c] += w[2][k] * coord;
                jet.d3[c] += w[3][k] * coord;
            }
        }
        jets.push(jet);
    }
    let speeds: Vec<f64> = jets.iter().map(|j| dot3(&j.d1, &j.d1).sqrt()).collect();
    check_unit_speed(&speeds, UNIT_SPEED_TOL_SAMPLED)?;
    Ok(space_data_from_jets(
        s.to_vec(),
        &jets,
        Provenance::FiniteDifference,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HarmonicLine,
    Biharmonic,
    NotBiharmonic,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::HarmonicLine => "harmonic-line",
            Verdict::Biharmonic => "biharmonic",
            Verdict::NotBiharmonic => "not-biharmonic",
        }
    }
}

/// Tolerances for the constancy and value checks of the classification.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyTolerances {
    /// Max allowed deviation of kappa (and tau) from its mean.
    pub constancy: f64,
    /// Max allowed distance of the constant from its admissible value.
    pub value: f64,
}

impl ClassifyTolerances {
    pub fn for_provenance(p: Provenance) -> Self {
        match p {
            Provenance::Analytic => Self {
                constancy: 1e-7,
                value: 1e-6,
            },
            Provenance::FiniteDifference => Self {
                constancy: 1e-4,
                value: 1e-3,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub kappa_mean: f64,
    pub kappa_deviation: f64,
    pub tau_mean: Option<f64>,
    pub tau_deviation: Option<f64>,
    /// Which condition decided the verdict.
    pub detail: String,
}

fn mean_and_deviation(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values
        .iter()
        .map(|v| (v - mean).abs())
        .fold(0.0f64, f64::max);
    (mean, dev)
}

/// Classifies the tangent curve behind the Frenet data: a harmonic line,
/// a biharmonic tangent curve, or neither, with diagnostics.
pub fn classify_biharmonic_tangent(data: &FrenetData, ambient: usize) -> Result<Classification> {
    if ambient != data.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "ambient dimension {ambient} does not match data ({})",
            data.ambient_dim()
        )));
    }
    let tol = ClassifyTolerances::for_provenance(data.provenance);
    let (k_mean, k_dev) = mean_and_deviation(&data.kappa);

    let mut out = Classification {
        verdict: Verdict::NotBiharmonic,
        kappa_mean: k_mean,
        kappa_deviation: k_dev,
        tau_mean: None,
        tau_deviation: None,
        detail: String::new(),
    };

    if k_dev > tol.constancy {
        out.detail = format!("curvature is not constant (max deviation {k_dev:.3e})");
        return Ok(out);
    }
    if k_mean.abs() <= tol.value {
        out.verdict = Verdict::HarmonicLine;
        out.detail = "curvature vanishes: straight line (harmonic)".into();
        return Ok(out);
    }

    match ambient {
        2 => {
            if (k_mean.abs() - 1.0).abs() <= tol.value {
                out.verdict = Verdict::Biharmonic;
                out.detail = format!("constant signed curvature {k_mean:.6} in {{1, -1}}");
            } else {
                out.detail = format!(
                    "constant curvature {k_mean:.6} is not 0, 1, or -1"
                );
            }
        }
        3 => {
            let tau = match &data.tau {
                Some(t) => t,
                None => {
                    out.detail =
                        "curvature vanishes somewhere but not everywhere; torsion undefined"
                            .into();
                    return Ok(out);
                }
            };
            let (t_mean, t_dev) = mean_and_deviation(tau);
            out.tau_mean = Some(t_mean);
            out.tau_deviation = Some(t_dev);
            if t_dev > tol.constancy {
                out.detail = format!("torsion is not constant (max deviation {t_dev:.3e})");
                return Ok(out);
            }
            let kt = k_mean * k_mean + t_mean * t_mean;
            if (kt - 1.0).abs() <= tol.value {
                out.verdict = Verdict::Biharmonic;
                out.detail = format!(
                    "constant (kappa, tau) = ({k_mean:.6}, {t_mean:.6}) with kappa^2 + tau^2 = 1"
                );
            } else {
                out.detail = format!(
                    "kappa^2 + tau^2 = {kt:.6} differs from 1 by {:.3e}",
                    (kt - 1.0).abs()
                );
            }
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "ambient dimension {other} not supported (2 or 3)"
            )))
        }
    }
    Ok(out)
}
