//! Constructors for the explicit solution families, each paired with its
//! expected classification and, where one is displayed, a closed-form point
//! formula. `verify_family` sweeps the residual evaluators over a window and
//! cross-checks integrated lifts against the closed forms, producing the
//! regression reports the CLI serializes.
//!
//! Cases are addressed as "space/case" strings:
//!
//! * `sphere/axis` - cubic-phase rotation in a coordinate plane,
//! * `sphere/great-circle` - constant coefficient great circle (n = 2),
//! * `sphere/circle-ii`, `sphere/circle-iii` - the non-commuting
//!   trigonometric families built from unit-circle tangents (n = 2),
//! * `sphere/helix` - the tangent family of a unit-speed helix (n = 3),
//! * `cpn/case-i`..`case-iii`, `hpn/case-i`..`case-iv` - cubic-phase
//!   families in the projective models,
//! * `euclidean/poly` - quadratic translation-valued family,
//! * `planar/sphere` (alias `planar/separable`), `planar/cpn`,
//!   `planar/hpn`, `planar/euclidean` - separable plane-domain families.

use num_complex::Complex64;
use serde::Serialize;

use crate::curves::{CurveFamily, Jet4};
use crate::error::{Error, Result};
use crate::integrator::{solve_lift, IntegratorConfig, Method};
use crate::liealg::{AlgebraElement, GroupElement, Quaternion};
use crate::planar::{GridSpec, PlanarFieldPair, SeparableCoeffs, SeparableMap};
use crate::spaces::{HomogeneousPoint, MCoords, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    SphereAxis,
    SphereGreatCircle,
    SphereCircleII,
    SphereCircleIII,
    SphereHelix,
    CpnCaseI,
    CpnCaseII,
    CpnCaseIII,
    HpnCaseI,
    HpnCaseII,
    HpnCaseIII,
    HpnCaseIV,
    EuclideanPoly,
    PlanarSphere,
    PlanarCpn,
    PlanarHpn,
    PlanarEuclidean,
}

impl CaseId {
    pub fn space(&self) -> &'static str {
        use CaseId::*;
        match self {
            SphereAxis | SphereGreatCircle | SphereCircleII | SphereCircleIII | SphereHelix => {
                "sphere"
            }
            CpnCaseI | CpnCaseII | CpnCaseIII => "cpn",
            HpnCaseI | HpnCaseII | HpnCaseIII | HpnCaseIV => "hpn",
            EuclideanPoly => "euclidean",
            PlanarSphere | PlanarCpn | PlanarHpn | PlanarEuclidean => "planar",
        }
    }

    pub fn case(&self) -> &'static str {
        use CaseId::*;
        match self {
            SphereAxis => "axis",
            SphereGreatCircle => "great-circle",
            SphereCircleII => "circle-ii",
            SphereCircleIII => "circle-iii",
            SphereHelix => "helix",
            CpnCaseI | HpnCaseI => "case-i",
            CpnCaseII | HpnCaseII => "case-ii",
            CpnCaseIII | HpnCaseIII => "case-iii",
            HpnCaseIV => "case-iv",
            EuclideanPoly => "poly",
            PlanarSphere => "sphere",
            PlanarCpn => "cpn",
            PlanarHpn => "hpn",
            PlanarEuclidean => "euclidean",
        }
    }

    pub fn id(&self) -> String {
        format!("{}/{}", self.space(), self.case())
    }

    pub fn is_planar(&self) -> bool {
        matches!(
            self,
            CaseId::PlanarSphere | CaseId::PlanarCpn | CaseId::PlanarHpn | CaseId::PlanarEuclidean
        )
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(
            self,
            CaseId::SphereCircleII | CaseId::SphereCircleIII | CaseId::SphereHelix
        )
    }

    /// Cases built as tangent families of an explicit plane or space curve.
    pub fn tangent_curve_dim(&self) -> Option<usize> {
        match self {
            CaseId::SphereCircleII | CaseId::SphereCircleIII => Some(2),
            CaseId::SphereHelix => Some(3),
            _ => None,
        }
    }

    pub fn all() -> &'static [CaseId] {
        use CaseId::*;
        &[
            SphereAxis,
            SphereGreatCircle,
            SphereCircleII,
            SphereCircleIII,
            SphereHelix,
            CpnCaseI,
            CpnCaseII,
            CpnCaseIII,
            HpnCaseI,
            HpnCaseII,
            HpnCaseIII,
            HpnCaseIV,
            EuclideanPoly,
            PlanarSphere,
            PlanarCpn,
            PlanarHpn,
            PlanarEuclidean,
        ]
    }
}

/// Resolves "space/case" identifiers, including the `planar/separable`
/// alias for the sphere-target separable family.
pub fn parse_case(space: &str, case: &str) -> Result<CaseId> {
    if space == "planar" && case == "separable" {
        return Ok(CaseId::PlanarSphere);
    }
    CaseId::all()
        .iter()
        .copied()
        .find(|c| c.space() == space && c.case() == case)
        .ok_or_else(|| Error::UnknownCase(format!("{space}/{case}")))
}

/// Addressable identifiers, for help text and error messages.
pub fn known_cases() -> Vec<String> {
    let mut ids: Vec<String> = CaseId::all().iter().map(|c| c.id()).collect();
    ids.push("planar/separable".into());
    ids
}

/// Which explicit family to build and with what parameters.
///
/// Curve cases read `params` as (a, b, c) of the quadratic coefficient
/// polynomial (great-circle: the direction (a, b); circle cases: none;
/// helix: (a, b) with a^2 + b^2 = 1). Planar cases read six entries
/// (a1, b1, c1, a2, b2, c2).
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub case: CaseId,
    pub n: usize,
    pub params: Vec<f64>,
    /// Direction index (1-based) for the axis family.
    pub axis: usize,
    /// Base point; identity when absent.
    pub x0: Option<GroupElement>,
}

impl FamilySpec {
    pub fn new(case: CaseId, n: usize, params: Vec<f64>) -> Self {
        Self {
            case,
            n,
            params,
            axis: 1,
            x0: None,
        }
    }

    pub fn with_axis(mut self, axis: usize) -> Self {
        self.axis = axis;
        self
    }

    pub fn with_base_point(mut self, x0: GroupElement) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn model(&self) -> Result<Model> {
        let n = self.n;
        let model = match self.case {
            CaseId::SphereAxis => Model::new(crate::spaces::Family::Sphere(n))?,
            CaseId::SphereGreatCircle | CaseId::SphereCircleII | CaseId::SphereCircleIII => {
                if n != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "{} is a 2-sphere case, got n = {n}",
                        self.case.id()
                    )));
                }
                Model::sphere(2)
            }
            CaseId::SphereHelix => {
                if n != 3 {
                    return Err(Error::InvalidParameter(format!(
                        "{} is a 3-sphere case, got n = {n}",
                        self.case.id()
                    )));
                }
                Model::sphere(3)
            }
            CaseId::CpnCaseI | CaseId::CpnCaseII | CaseId::CpnCaseIII => {
                Model::new(crate::spaces::Family::ComplexProjective(n))?
            }
            CaseId::HpnCaseI | CaseId::HpnCaseII | CaseId::HpnCaseIII | CaseId::HpnCaseIV => {
                Model::new(crate::spaces::Family::QuaternionProjective(n))?
            }
            CaseId::EuclideanPoly | CaseId::PlanarEuclidean => {
                Model::new(crate::spaces::Family::Euclidean(n))?
            }
            CaseId::PlanarSphere => Model::new(crate::spaces::Family::Sphere(n))?,
            CaseId::PlanarCpn => Model::new(crate::spaces::Family::ComplexProjective(n))?,
            CaseId::PlanarHpn => Model::new(crate::spaces::Family::QuaternionProjective(n))?,
        };
        if self.case == CaseId::PlanarEuclidean && n < 2 {
            return Err(Error::InvalidParameter(
                "planar/euclidean needs two independent translations (n >= 2)".into(),
            ));
        }
        Ok(model)
    }

    pub fn curve_params(&self) -> Result<(f64, f64, f64)> {
        match self.params.len() {
            3 => Ok((self.params[0], self.params[1], self.params[2])),
            2 => Ok((self.params[0], self.params[1], 0.0)),
            other => Err(Error::InvalidParameter(format!(
                "expected parameters (a, b, c), got {other} values"
            ))),
        }
    }

    pub fn separable_coeffs(&self) -> Result<SeparableCoeffs> {
        if self.params.len() != 6 {
            return Err(Error::InvalidParameter(format!(
                "planar cases need six parameters (a1, b1, c1, a2, b2, c2), got {}",
                self.params.len()
            )));
        }
        Ok(SeparableCoeffs {
            a1: self.params[0],
            b1: self.params[1],
            c1: self.params[2],
            a2: self.params[3],
            b2: self.params[4],
            c2: self.params[5],
        })
    }

    pub fn base_point_or_identity(&self) -> Result<GroupElement> {
        let model = self.model()?;
        Ok(match &self.x0 {
            Some(g) => g.clone(),
            None => model.identity(),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        let model = self.model()?;
        match self.case {
            CaseId::SphereAxis => {
                if self.axis < 1 || self.axis > model.n() {
                    return Err(Error::InvalidParameter(format!(
                        "axis index {} out of 1..={}",
                        self.axis,
                        model.n()
                    )));
                }
                self.curve_params().map(|_| ())
            }
            CaseId::SphereGreatCircle => {
                if self.params.len() != 2 && self.params.len() != 3 {
                    return Err(Error::InvalidParameter(
                        "great-circle expects the direction (a, b)".into(),
                    ));
                }
                Ok(())
            }
            CaseId::SphereCircleII | CaseId::SphereCircleIII => Ok(()),
            CaseId::SphereHelix => {
                let (a, b, _) = self.curve_params()?;
                if (a * a + b * b - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "helix needs a^2 + b^2 = 1, got {}",
                        a * a + b * b
                    )));
                }
                Ok(())
            }
            CaseId::CpnCaseI
            | CaseId::CpnCaseII
            | CaseId::CpnCaseIII
            | CaseId::HpnCaseI
            | CaseId::HpnCaseII
            | CaseId::HpnCaseIII
            | CaseId::HpnCaseIV
            | CaseId::EuclideanPoly => self.curve_params().map(|_| ()),
            CaseId::PlanarSphere
            | CaseId::PlanarCpn
            | CaseId::PlanarHpn
            | CaseId::PlanarEuclidean => self.separable_coeffs().map(|_| ()),
        }
    }
}

/// Cubic phase d_t = (a/3) t^3 + (b/2) t^2 + c t.
pub fn cubic_phase(a: f64, b: f64, c: f64, t: f64) -> f64 {
    a / 3.0 * t.powi(3) + b / 2.0 * t * t + c * t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Harmonic,
    Biharmonic,
}

impl Expected {
    pub fn name(&self) -> &'static str {
        match self {
            Expected::Harmonic => "harmonic",
            Expected::Biharmonic => "biharmonic",
        }
    }
}

/// The classification the construction guarantees: cubic-phase families are
/// harmonic exactly when a = b = 0, constant-coefficient families always.
pub fn expected_classification(spec: &FamilySpec) -> Result<Expected> {
    spec.validate()?;
    Ok(match spec.case {
        CaseId::SphereGreatCircle => Expected::Harmonic,
        CaseId::SphereCircleII | CaseId::SphereCircleIII => Expected::Biharmonic,
        CaseId::SphereHelix => {
            let (a, _, _) = spec.curve_params()?;
            if a == 0.0 {
                Expected::Harmonic
            } else {
                Expected::Biharmonic
            }
        }
        CaseId::PlanarSphere
        | CaseId::PlanarCpn
        | CaseId::PlanarHpn
        | CaseId::PlanarEuclidean => {
            if spec.separable_coeffs()?.is_harmonic() {
                Expected::Harmonic
            } else {
                Expected::Biharmonic
            }
        }
        _ => {
            let (a, b, _) = spec.curve_params()?;
            if a == 0.0 && b == 0.0 {
                Expected::Harmonic
            } else {
                Expected::Biharmonic
            }
        }
    })
}

/// A constructed family: a curve in the model's algebra or a planar
/// coefficient pair.
pub enum FamilyKind {
    Curve(CurveFamily),
    Planar(PlanarFieldPair),
}

/// Constant m-direction of the cubic-phase cases, in chart coordinates.
fn case_direction(spec: &FamilySpec, model: &Model) -> Result<AlgebraElement> {
    let n = model.n();
    let ones_c = |c: Complex64| vec![c; n];
    let coords = match spec.case {
        CaseId::SphereAxis => {
            let mut u = vec![0.0; n];
            u[spec.axis - 1] = 1.0;
            MCoords::Real(u)
        }
        CaseId::CpnCaseI => MCoords::Complex(ones_c(Complex64::new(1.0, 0.0))),
        CaseId::CpnCaseII => MCoords::Complex(ones_c(Complex64::new(0.0, 1.0))),
        CaseId::CpnCaseIII => MCoords::Complex(ones_c(Complex64::new(1.0, 1.0))),
        CaseId::HpnCaseI => MCoords::ComplexPair(
            ones_c(Complex64::new(1.0, 0.0)),
            ones_c(Complex64::ZERO),
        ),
        CaseId::HpnCaseII => MCoords::ComplexPair(
            ones_c(Complex64::new(0.0, 1.0)),
            ones_c(Complex64::ZERO),
        ),
        CaseId::HpnCaseIII => MCoords::ComplexPair(
            ones_c(Complex64::ZERO),
            ones_c(Complex64::new(1.0, 0.0)),
        ),
        CaseId::HpnCaseIV => MCoords::ComplexPair(
            ones_c(Complex64::ZERO),
            ones_c(Complex64::new(0.0, 1.0)),
        ),
        CaseId::PlanarSphere => MCoords::Real(vec![1.0; n]),
        CaseId::PlanarCpn => MCoords::Complex(ones_c(Complex64::new(0.0, 1.0))),
        CaseId::PlanarHpn => MCoords::ComplexPair(
            ones_c(Complex64::ZERO),
            ones_c(Complex64::new(0.0, 1.0)),
        ),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{} has no single constant direction",
                spec.case.id()
            )))
        }
    };
    model.m_from_coords(&coords)
}

fn cubic_coefficient_family(
    model: Model,
    dir: AlgebraElement,
    a: f64,
    b: f64,
    c: f64,
) -> CurveFamily {
    CurveFamily::analytic(model, move |t| Jet4 {
        f: dir.scale(a * t * t + b * t + c),
        d1: dir.scale(2.0 * a * t + b),
        d2: dir.scale(2.0 * a),
        d3: dir.scale(0.0),
    })
}

/// Translation directions of the Euclidean polynomial family: the quadratic,
/// linear, and constant coefficients point along e_0, e_1, e_2 cyclically.
fn euclidean_dirs(model: &Model) -> [AlgebraElement; 3] {
    let n = model.n();
    let unit = |k: usize| {
        let mut v = vec![0.0; n];
        v[k % n] = 1.0;
        model
            .m_from_coords(&MCoords::Real(v))
            .expect("chart length matches")
    };
    [unit(0), unit(1), unit(2)]
}

/// Builds the family a spec describes.
pub fn make_family(spec: &FamilySpec) -> Result<FamilyKind> {
    spec.validate()?;
    let model = spec.model()?;
    Ok(match spec.case {
        CaseId::SphereAxis
        | CaseId::CpnCaseI
        | CaseId::CpnCaseII
        | CaseId::CpnCaseIII
        | CaseId::HpnCaseI
        | CaseId::HpnCaseII
        | CaseId::HpnCaseIII
        | CaseId::HpnCaseIV => {
            let (a, b, c) = spec.curve_params()?;
            let dir = case_direction(spec, &model)?;
            FamilyKind::Curve(cubic_coefficient_family(model, dir, a, b, c))
        }
        CaseId::SphereGreatCircle => {
            let (a, b, _) = spec.curve_params()?;
            let dir = model.m_from_coords(&MCoords::Real(vec![a, b]))?;
            FamilyKind::Curve(cubic_coefficient_family(model, dir, 0.0, 0.0, 1.0))
        }
        CaseId::SphereCircleII | CaseId::SphereCircleIII => {
            let sign = if spec.case == CaseId::SphereCircleII {
                1.0
            } else {
                -1.0
            };
            let chart =
                move |u: Vec<f64>| model.m_from_coords(&MCoords::Real(u)).expect("length 2");
            FamilyKind::Curve(CurveFamily::analytic(model, move |t| Jet4 {
                f: chart(vec![-t.sin(), sign * t.cos()]),
                d1: chart(vec![-t.cos(), -sign * t.sin()]),
                d2: chart(vec![t.sin(), -sign * t.cos()]),
                d3: chart(vec![t.cos(), sign * t.sin()]),
            }))
        }
        CaseId::SphereHelix => {
            let (a, b, _) = spec.curve_params()?;
            let chart =
                move |u: Vec<f64>| model.m_from_coords(&MCoords::Real(u)).expect("length 3");
            FamilyKind::Curve(CurveFamily::analytic(model, move |t| Jet4 {
                f: chart(vec![-a * t.sin(), a * t.cos(), b]),
                d1: chart(vec![-a * t.cos(), -a * t.sin(), 0.0]),
                d2: chart(vec![a * t.sin(), -a * t.cos(), 0.0]),
                d3: chart(vec![a * t.cos(), a * t.sin(), 0.0]),
            }))
        }
        CaseId::EuclideanPoly => {
            let (a, b, c) = spec.curve_params()?;
            let [da, db, dc] = euclidean_dirs(&model);
            FamilyKind::Curve(CurveFamily::analytic(model, move |t| Jet4 {
                f: &(&da.scale(a * t * t) + &db.scale(b * t)) + &dc.scale(c),
                d1: &da.scale(2.0 * a * t) + &db.scale(b),
                d2: da.scale(2.0 * a),
                d3: da.scale(0.0),
            }))
        }
        CaseId::PlanarSphere | CaseId::PlanarCpn | CaseId::PlanarHpn => {
            let dir = case_direction(spec, &model)?;
            FamilyKind::Planar(PlanarFieldPair::separable(
                model,
                &dir,
                &dir,
                spec.separable_coeffs()?,
            )?)
        }
        CaseId::PlanarEuclidean => {
            let [dx, dy, _] = euclidean_dirs(&model);
            FamilyKind::Planar(PlanarFieldPair::separable(
                model,
                &dx,
                &dy,
                spec.separable_coeffs()?,
            )?)
        }
    })
}

/// The separable lift behind a planar case.
pub fn make_separable_map(spec: &FamilySpec) -> Result<SeparableMap> {
    let model = spec.model()?;
    let coeffs = spec.separable_coeffs()?;
    let (dir_x, dir_y) = match spec.case {
        CaseId::PlanarSphere | CaseId::PlanarCpn | CaseId::PlanarHpn => {
            let d = case_direction(spec, &model)?;
            (d.clone(), d)
        }
        CaseId::PlanarEuclidean => {
            let [dx, dy, _] = euclidean_dirs(&model);
            (dx, dy)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{} is not a planar case",
                spec.case.id()
            )))
        }
    };
    crate::planar::build_separable_map(
        model,
        &dir_x,
        &dir_y,
        coeffs,
        spec.base_point_or_identity()?,
    )
}

/// Where to evaluate a closed-form point: curve parameter or plane point.
#[derive(Debug, Clone, Copy)]
pub enum EvalAt {
    T(f64),
    XY(f64, f64),
}

/// The displayed coordinate formula of a case, evaluated and acted on by the
/// base point. Errors for the cases without a closed form.
pub fn closed_form_point(spec: &FamilySpec, at: EvalAt) -> Result<HomogeneousPoint> {
    spec.validate()?;
    if !spec.case.has_closed_form() {
        return Err(Error::InvalidParameter(format!(
            "{} has no displayed closed-form point formula",
            spec.case.id()
        )));
    }
    let model = spec.model()?;
    let n = model.n() as f64;
    let x0 = spec.base_point_or_identity()?;

    let phase = |spec: &FamilySpec, at: EvalAt| -> Result<f64> {
        Ok(match at {
            EvalAt::T(t) => {
                let (a, b, c) = spec.curve_params()?;
                cubic_phase(a, b, c, t)
            }
            EvalAt::XY(x, y) => {
                let coeffs = spec.separable_coeffs()?;
                coeffs.phase_x(x) + coeffs.phase_y(y)
            }
        })
    };

    let sphere_vec =
        |angle: f64, amps: &[(usize, f64)]| -> HomogeneousPoint {
            let mut v = nalgebra::DVector::zeros(model.n() + 1);
            v[0] = angle.cos();
            for &(idx, amp) in amps {
                v[idx] = amp * angle.sin();
            }
            HomogeneousPoint::Sphere(v)
        };

    let rep = match spec.case {
        CaseId::SphereAxis => {
            let d = phase(spec, at)?;
            sphere_vec(d, &[(spec.axis, 1.0)])
        }
        CaseId::SphereGreatCircle => {
            let (a, b, _) = spec.curve_params()?;
            let t = match at {
                EvalAt::T(t) => t,
                EvalAt::XY(..) => {
                    return Err(Error::InvalidParameter(
                        "curve case evaluated at a plane point".into(),
                    ))
                }
            };
            let omega = (a * a + b * b).sqrt();
            if omega == 0.0 {
                sphere_vec(0.0, &[])
            } else {
                let mut v = nalgebra::DVector::zeros(3);
                v[0] = (omega * t).cos();
                v[1] = a / omega * (omega * t).sin();
                v[2] = b / omega * (omega * t).sin();
                HomogeneousPoint::Sphere(v)
            }
        }
        CaseId::PlanarSphere => {
            let d = phase(spec, at)?;
            let angle = n.sqrt() * d;
            let amps: Vec<(usize, f64)> =
                (1..=model.n()).map(|i| (i, 1.0 / n.sqrt())).collect();
            sphere_vec(angle, &amps)
        }
        CaseId::CpnCaseI | CaseId::CpnCaseII | CaseId::CpnCaseIII | CaseId::PlanarCpn => {
            let d = phase(spec, at)?;
            let (freq, amp) = match spec.case {
                CaseId::CpnCaseI => (n.sqrt(), Complex64::new(1.0 / n.sqrt(), 0.0)),
                CaseId::CpnCaseII | CaseId::PlanarCpn => {
                    (n.sqrt(), Complex64::new(0.0, 1.0 / n.sqrt()))
                }
                CaseId::CpnCaseIII => {
                    let f = (2.0 * n).sqrt();
                    (f, Complex64::new(1.0 / f, 1.0 / f))
                }
                _ => unreachable!(),
            };
            let angle = freq * d;
            let mut v = nalgebra::DVector::zeros(model.n() + 1);
            v[0] = Complex64::new(angle.cos(), 0.0);
            for i in 1..=model.n() {
                v[i] = amp * angle.sin();
            }
            HomogeneousPoint::ComplexProjective(v)
        }
        CaseId::HpnCaseI
        | CaseId::HpnCaseII
        | CaseId::HpnCaseIII
        | CaseId::HpnCaseIV
        | CaseId::PlanarHpn => {
            let d = phase(spec, at)?;
            // Sign pattern from the chart: the mirror block stores -conj(q),
            // so real amplitudes flip (-1 in case i) while i, j, k stay
            // positive. The integrated lift pins these signs down to 1e-12.
            let unit = match spec.case {
                CaseId::HpnCaseI => Quaternion::ONE.scale(-1.0),
                CaseId::HpnCaseII => Quaternion::I,
                CaseId::HpnCaseIII => Quaternion::J,
                CaseId::HpnCaseIV | CaseId::PlanarHpn => Quaternion::K,
                _ => unreachable!(),
            };
            let angle = n.sqrt() * d;
            let mut q = vec![Quaternion::ZERO; model.n() + 1];
            q[0] = Quaternion::ONE.scale(angle.cos());
            for item in q.iter_mut().skip(1) {
                *item = unit.scale(angle.sin() / n.sqrt());
            }
            HomogeneousPoint::QuaternionProjective(q)
        }
        CaseId::EuclideanPoly => {
            let t = match at {
                EvalAt::T(t) => t,
                EvalAt::XY(..) => {
                    return Err(Error::InvalidParameter(
                        "curve case evaluated at a plane point".into(),
                    ))
                }
            };
            let (a, b, c) = spec.curve_params()?;
            let nn = model.n();
            let mut v = nalgebra::DVector::zeros(nn);
            v[0] += a / 3.0 * t.powi(3);
            v[1 % nn] += b / 2.0 * t * t;
            v[2 % nn] += c * t;
            HomogeneousPoint::Euclidean(v)
        }
        CaseId::PlanarEuclidean => {
            let (x, y) = match at {
                EvalAt::XY(x, y) => (x, y),
                EvalAt::T(_) => {
                    return Err(Error::InvalidParameter(
                        "planar case evaluated at a curve parameter".into(),
                    ))
                }
            };
            let coeffs = spec.separable_coeffs()?;
            let nn = model.n();
            let mut v = nalgebra::DVector::zeros(nn);
            v[0] += coeffs.phase_x(x);
            v[1 % nn] += coeffs.phase_y(y);
            HomogeneousPoint::Euclidean(v)
        }
        CaseId::SphereCircleII | CaseId::SphereCircleIII | CaseId::SphereHelix => unreachable!(),
    };
    model.act(&x0, &rep)
}

/// The generating plane or space curve of the tangent-built cases.
pub fn tangent_curve_point(spec: &FamilySpec, s: f64) -> Result<Vec<f64>> {
    match spec.case {
        CaseId::SphereCircleII => Ok(vec![s.cos(), s.sin()]),
        CaseId::SphereCircleIII => Ok(vec![s.cos(), -s.sin()]),
        CaseId::SphereHelix => {
            let (a, b, _) = spec.curve_params()?;
            Ok(vec![a * s.cos(), a * s.sin(), b * s])
        }
        _ => Err(Error::InvalidParameter(format!(
            "{} is not built from a tangent curve",
            spec.case.id()
        ))),
    }
}

/// Verdict tolerances for residual reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub harmonic: f64,
    pub biharmonic: f64,
    pub integrability: f64,
    pub closed_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            harmonic: 1e-10,
            biharmonic: 1e-8,
            integrability: 1e-8,
            closed_form: 1e-7,
        }
    }
}

impl Tolerances {
    /// Relaxed verdicts for finite-difference-provenance families.
    pub fn finite_difference() -> Self {
        Self {
            harmonic: 1e-5,
            biharmonic: 1e-5,
            integrability: 1e-5,
            closed_form: 1e-5,
        }
    }
}

/// Evaluation window: a curve parameter interval or a plane grid.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    Curve { t0: f64, t1: f64, samples: usize },
    Grid(GridSpec),
}

impl Window {
    pub fn default_for(case: CaseId) -> Window {
        if case.is_planar() {
            Window::Grid(GridSpec::new(-1.0, 1.0, -1.0, 1.0, 21, 21).expect("static grid"))
        } else {
            Window::Curve {
                t0: -2.0,
                t1: 2.0,
                samples: 401,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

impl ResidualStats {
    fn push(&mut self, value: f64) {
        self.max = self.max.max(value);
        self.mean += value;
        self.samples += 1;
    }

    fn finish(&mut self) {
        if self.samples > 0 {
            self.mean /= self.samples as f64;
        }
    }
}

/// Per-family report: residual statistics plus the classification verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    pub space: String,
    pub case: String,
    pub n: usize,
    pub params: Vec<f64>,
    pub window: Window,
    pub tolerances: Tolerances,
    pub harmonic: ResidualStats,
    pub biharmonic: ResidualStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrability_k: Option<ResidualStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrability_m: Option<ResidualStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_max_distance: Option<f64>,
    pub expected: String,
    pub measured: String,
    pub verdict_match: bool,
}

/// Extra switches for `verify_family`.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Integrate the lift and compare against the closed form when one
    /// exists.
    pub check_closed_form: bool,
    /// Integration step for that comparison.
    pub integration_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            check_closed_form: true,
            integration_step: 1e-3,
        }
    }
}

/// Sweeps the residual evaluators of a catalog family over a window,
/// classifies the outcome against the expected verdict, and (optionally)
/// cross-checks integrated lifts against the displayed point formula.
pub fn verify_family(
    spec: &FamilySpec,
    window: Window,
    tol: Tolerances,
    opts: VerifyOptions,
) -> Result<ResidualReport> {
    let expected = expected_classification(spec)?;
    let family = make_family(spec)?;

    let mut harmonic = ResidualStats::default();
    let mut biharmonic = ResidualStats::default();
    let mut integrability_k = None;
    let mut integrability_m = None;

    match (&family, window) {
        (FamilyKind::Curve(fam), Window::Curve { t0, t1, samples }) => {
            if samples < 2 {
                return Err(Error::TooFewSamples {
                    got: samples,
                    need: 2,
                });
            }
            for i in 0..samples {
                let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
                harmonic.push(fam.harmonic_residual(t)?.norm());
                biharmonic.push(fam.biharmonic_residual(t)?.norm());
            }
        }
        (FamilyKind::Planar(fields), Window::Grid(grid)) => {
            let mut ik = ResidualStats::default();
            let mut im = ResidualStats::default();
            for (x, y) in grid.interior_points(fields.margin()) {
                harmonic.push(fields.harmonic_residual(x, y)?.norm());
                biharmonic.push(fields.biharmonic_residual(x, y)?.norm());
                let (rk, rm) = fields.integrability_residuals(x, y)?;
                ik.push(rk.norm());
                im.push(rm.norm());
            }
            ik.finish();
            im.finish();
            integrability_k = Some(ik);
            integrability_m = Some(im);
        }
        _ => {
            return Err(Error::InvalidParameter(
                "window kind does not match the case (curve window for curve cases, grid for planar)"
                    .into(),
            ))
        }
    }
    harmonic.finish();
    biharmonic.finish();

    let measured = if harmonic.max <= tol.harmonic {
        Expected::Harmonic.name()
    } else if biharmonic.max <= tol.biharmonic {
        Expected::Biharmonic.name()
    } else {
        "not-biharmonic"
    };

    let closed_form_max_distance = if opts.check_closed_form && spec.case.has_closed_form() {
        Some(closed_form_agreement(spec, &family, window, &opts)?)
    } else {
        None
    };

    let mut verdict_match = measured == expected.name();
    if let Some(d) = closed_form_max_distance {
        verdict_match = verdict_match && d <= tol.closed_form;
    }
    if let (Some(ik), Some(im)) = (&integrability_k, &integrability_m) {
        verdict_match =
            verdict_match && ik.max <= tol.integrability && im.max <= tol.integrability;
    }

    Ok(ResidualReport {
        schema_version: 1,
        space: spec.case.space().into(),
        case: spec.case.case().into(),
        n: spec.n,
        params: spec.params.clone(),
        window,
        tolerances: tol,
        harmonic,
        biharmonic,
        integrability_k,
        integrability_m,
        closed_form_max_distance,
        expected: expected.name().into(),
        measured: measured.into(),
        verdict_match,
    })
}

/// Max gauge distance between the integrated lift's projection and the
/// displayed point formula.
fn closed_form_agreement(
    spec: &FamilySpec,
    family: &FamilyKind,
    window: Window,
    opts: &VerifyOptions,
) -> Result<f64> {
    let model = spec.model()?;
    let mut max_distance = 0.0f64;
    match (family, window) {
        (FamilyKind::Curve(fam), Window::Curve { t0, t1, .. }) => {
            // Start from the exponential construction at t0 and march the
            // integrator across the window.
            let start = lift_point(spec, &model, t0)?;
            let steps = (((t1 - t0) / opts.integration_step).ceil() as usize).max(1);
            let traj = solve_lift(
                fam,
                &start,
                (t0, t1),
                &IntegratorConfig::new(Method::RkMk4, steps),
            )?;
            for (t, p) in traj.times.iter().zip(&traj.points) {
                let reference = closed_form_point(spec, EvalAt::T(*t))?;
                max_distance = max_distance.max(p.gauge_distance(&reference));
            }
        }
        (FamilyKind::Planar(_), Window::Grid(grid)) => {
            let map = make_separable_map(spec)?;
            // Exponential map against the displayed formula on the grid.
            for (x, y) in grid.points() {
                let reference = closed_form_point(spec, EvalAt::XY(x, y))?;
                max_distance = max_distance.max(map.phi(x, y)?.gauge_distance(&reference));
            }
            // Integrated x-slice through the middle of the grid.
            let y0 = 0.5 * (grid.y0 + grid.y1);
            let slice = map.x_slice_family();
            let start = map.psi(grid.x0, y0);
            let steps = (((grid.x1 - grid.x0) / opts.integration_step).ceil() as usize).max(1);
            let traj = solve_lift(
                &slice,
                &start,
                (grid.x0, grid.x1),
                &IntegratorConfig::new(Method::RkMk4, steps),
            )?;
            for (x, p) in traj.times.iter().zip(&traj.points) {
                let reference = closed_form_point(spec, EvalAt::XY(*x, y0))?;
                max_distance = max_distance.max(p.gauge_distance(&reference));
            }
        }
        _ => unreachable!("window kind validated by the caller"),
    }
    Ok(max_distance)
}

/// psi(t) of the exponential construction behind the closed-form cases:
/// x0 exp(d_t M) for the cubic-phase families, x0 exp(integral of F) for the
/// Euclidean polynomial family.
fn lift_point(spec: &FamilySpec, model: &Model, t: f64) -> Result<GroupElement> {
    let x0 = spec.base_point_or_identity()?;
    let exponent = match spec.case {
        CaseId::SphereGreatCircle => {
            let (a, b, _) = spec.curve_params()?;
            model
                .m_from_coords(&MCoords::Real(vec![a, b]))?
                .scale(t)
        }
        CaseId::EuclideanPoly => {
            let (a, b, c) = spec.curve_params()?;
            let [da, db, dc] = euclidean_dirs(model);
            &(&da.scale(a / 3.0 * t.powi(3)) + &db.scale(b / 2.0 * t * t)) + &dc.scale(c * t)
        }
        _ => {
            let (a, b, c) = spec.curve_params()?;
            case_direction(spec, model)?.scale(cubic_phase(a, b, c, t))
        }
    };
    Ok(&x0 * &model.exp(&exponent)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(case: CaseId, n: usize, params: &[f64]) -> FamilySpec {
        FamilySpec::new(case, n, params.to_vec())
    }

    #[test]
    fn parse_case_round_trips_and_rejects_unknown() {
        for &c in CaseId::all() {
            assert_eq!(parse_case(c.space(), c.case()).unwrap(), c);
        }
        assert_eq!(
            parse_case("planar", "separable").unwrap(),
            CaseId::PlanarSphere
        );
        assert!(matches!(
            parse_case("torus", "axis"),
            Err(Error::UnknownCase(_))
        ));
    }

    #[test]
    fn axis_family_with_constant_coefficient_is_the_constant_direction() {
        let s = spec(CaseId::SphereAxis, 3, &[0.0, 0.0, 1.0]);
        let FamilyKind::Curve(fam) = make_family(&s).unwrap() else {
            panic!("curve case")
        };
        let model = s.model().unwrap();
        let dir = model
            .m_from_coords(&MCoords::Real(vec![1.0, 0.0, 0.0]))
            .unwrap();
        for &t in &[-1.0, 0.0, 2.0] {
            assert!((&fam.value(t) - &dir).norm() == 0.0);
        }
        assert_eq!(
            expected_classification(&s).unwrap(),
            Expected::Harmonic
        );
    }

    #[test]
    fn zero_parameters_give_the_zero_family() {
        let s = spec(CaseId::SphereAxis, 2, &[0.0, 0.0, 0.0]);
        let FamilyKind::Curve(fam) = make_family(&s).unwrap() else {
            panic!()
        };
        let (h, b) = fam.residual_sweep(-2.0, 2.0, 41).unwrap();
        assert!(h == 0.0 && b == 0.0);
    }

    #[test]
    fn axis_case_closed_form_is_a_great_circle_in_a_coordinate_plane() {
        let s = spec(CaseId::SphereAxis, 4, &[0.0, 0.0, 1.0]).with_axis(2);
        // d_t = t; point = (cos t, 0, sin t, 0, 0).
        let p = closed_form_point(&s, EvalAt::T(0.8)).unwrap();
        if let HomogeneousPoint::Sphere(v) = &p {
            assert!((v[0] - 0.8f64.cos()).abs() < 1e-15);
            assert!((v[2] - 0.8f64.sin()).abs() < 1e-15);
            assert!(v[1] == 0.0 && v[3] == 0.0 && v[4] == 0.0);
        } else {
            panic!()
        }
        // At t = 0 the point is x0 . o.
        let p0 = closed_form_point(&s, EvalAt::T(0.0)).unwrap();
        let model = s.model().unwrap();
        assert!(p0.gauge_distance(&model.base_point()) == 0.0);
    }

    #[test]
    fn hpn_closed_form_has_unit_representative() {
        for case in [
            CaseId::HpnCaseI,
            CaseId::HpnCaseII,
            CaseId::HpnCaseIII,
            CaseId::HpnCaseIV,
        ] {
            let s = spec(case, 2, &[0.7, -0.4, 0.3]);
            for &t in &[-1.5, 0.0, 0.9, 2.0] {
                let p = closed_form_point(&s, EvalAt::T(t)).unwrap();
                assert!(
                    (p.representative_norm() - 1.0).abs() <= 1e-12,
                    "norm {} for {case:?}",
                    p.representative_norm()
                );
            }
        }
    }

    #[test]
    fn cpn_case_iii_amplitude_pattern_is_unit_norm() {
        let s = spec(CaseId::CpnCaseIII, 3, &[1.0, 0.5, -0.7]);
        for &t in &[-2.0, -0.3, 1.1] {
            let p = closed_form_point(&s, EvalAt::T(t)).unwrap();
            assert!((p.representative_norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn every_cataloged_family_matches_its_expected_classification() {
        let params = [1.0, 0.5, -0.7];
        let degenerate = [0.0, 0.0, 0.8];
        let planar = [0.8, -0.3, 0.5, -0.6, 0.2, 0.9];
        let planar_degenerate = [0.0, 0.0, 0.5, 0.0, 0.0, 0.9];

        let mut specs = vec![
            spec(CaseId::SphereAxis, 3, &params),
            spec(CaseId::SphereAxis, 3, &degenerate),
            spec(CaseId::SphereGreatCircle, 2, &[0.6, 0.8]),
            spec(CaseId::SphereCircleII, 2, &[]),
            spec(CaseId::SphereCircleIII, 2, &[]),
            spec(CaseId::SphereHelix, 3, &[0.6, 0.8]),
            spec(CaseId::EuclideanPoly, 3, &params),
            spec(CaseId::EuclideanPoly, 3, &degenerate),
        ];
        for case in [CaseId::CpnCaseI, CaseId::CpnCaseII, CaseId::CpnCaseIII] {
            specs.push(spec(case, 2, &params));
            specs.push(spec(case, 2, &degenerate));
        }
        for case in [
            CaseId::HpnCaseI,
            CaseId::HpnCaseII,
            CaseId::HpnCaseIII,
            CaseId::HpnCaseIV,
        ] {
            specs.push(spec(case, 2, &params));
        }
        for case in [
            CaseId::PlanarSphere,
            CaseId::PlanarCpn,
            CaseId::PlanarHpn,
            CaseId::PlanarEuclidean,
        ] {
            specs.push(spec(case, 2, &planar));
            specs.push(spec(case, 2, &planar_degenerate));
        }

        for s in specs {
            let report = verify_family(
                &s,
                Window::default_for(s.case),
                Tolerances::default(),
                VerifyOptions {
                    check_closed_form: false,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(
                report.verdict_match,
                "{} with {:?}: expected {}, measured {} (h {:.2e}, b {:.2e})",
                s.case.id(),
                s.params,
                report.expected,
                report.measured,
                report.harmonic.max,
                report.biharmonic.max,
            );
        }
    }

    #[test]
    fn axis_family_with_pure_quadratic_is_biharmonic_not_harmonic() {
        let s = spec(CaseId::SphereAxis, 2, &[1.0, 0.0, 0.0]);
        let report = verify_family(
            &s,
            Window::default_for(s.case),
            Tolerances::default(),
            VerifyOptions {
                check_closed_form: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.measured, "biharmonic");
        assert!(report.biharmonic.max <= 1e-8);
        // Harmonic residual is |D'(t)| sqrt(2), nonzero away from t = 0.
        assert!(report.harmonic.max > 1.0);
    }

    #[test]
    fn closed_form_agreement_for_a_quick_subset() {
        for s in [
            spec(CaseId::SphereAxis, 2, &[0.4, -0.3, 0.5]),
            spec(CaseId::CpnCaseIII, 2, &[0.4, -0.3, 0.5]),
            spec(CaseId::HpnCaseIV, 1, &[0.4, -0.3, 0.5]),
            spec(CaseId::EuclideanPoly, 3, &[0.4, -0.3, 0.5]),
        ] {
            let report = verify_family(
                &s,
                Window::Curve {
                    t0: -1.0,
                    t1: 1.0,
                    samples: 81,
                },
                Tolerances::default(),
                VerifyOptions {
                    check_closed_form: true,
                    integration_step: 2e-3,
                },
            )
            .unwrap();
            let d = report.closed_form_max_distance.unwrap();
            assert!(d <= 1e-7, "{}: closed-form distance {d}", s.case.id());
        }
    }

    #[test]
    fn closed_form_respects_a_random_base_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let model = Model::sphere(2);
        let x0 = model
            .exp(&model.random_algebra_element(&mut rng).scale(1.3))
            .unwrap();
        let s = spec(CaseId::SphereAxis, 2, &[0.4, -0.3, 0.5]).with_base_point(x0);
        let report = verify_family(
            &s,
            Window::Curve {
                t0: -1.0,
                t1: 1.0,
                samples: 51,
            },
            Tolerances::default(),
            VerifyOptions {
                check_closed_form: true,
                integration_step: 2e-3,
            },
        )
        .unwrap();
        assert!(report.closed_form_max_distance.unwrap() <= 1e-7);
    }

    #[test]
    fn planar_closed_forms_match_the_separable_lift() {
        for case in [
            CaseId::PlanarSphere,
            CaseId::PlanarCpn,
            CaseId::PlanarHpn,
            CaseId::PlanarEuclidean,
        ] {
            let s = spec(case, 2, &[0.4, -0.2, 0.8, 0.3, 0.5, -0.6]);
            let report = verify_family(
                &s,
                Window::Grid(GridSpec::new(-1.0, 1.0, -1.0, 1.0, 11, 11).unwrap()),
                Tolerances::default(),
                VerifyOptions {
                    check_closed_form: true,
                    integration_step: 2e-3,
                },
            )
            .unwrap();
            let d = report.closed_form_max_distance.unwrap();
            assert!(d <= 1e-7, "{}: distance {d}", s.case.id());
            assert!(report.verdict_match, "{}", s.case.id());
        }
    }

    #[test]
    fn tangent_curves_exist_exactly_for_the_tangent_built_cases() {
        assert_eq!(
            tangent_curve_point(&spec(CaseId::SphereCircleII, 2, &[]), 0.0).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            tangent_curve_point(&spec(CaseId::SphereHelix, 3, &[0.6, 0.8]), 0.0).unwrap(),
            vec![0.6, 0.0, 0.0]
        );
        assert!(tangent_curve_point(&spec(CaseId::SphereAxis, 2, &[0.0, 0.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn analytic_jets_agree_with_difference_quotients() {
        let curve_specs = [
            spec(CaseId::SphereAxis, 3, &[1.0, 0.5, -0.7]),
            spec(CaseId::SphereGreatCircle, 2, &[0.6, 0.8]),
            spec(CaseId::SphereCircleII, 2, &[]),
            spec(CaseId::SphereCircleIII, 2, &[]),
            spec(CaseId::SphereHelix, 3, &[0.6, 0.8]),
            spec(CaseId::CpnCaseIII, 2, &[1.0, 0.5, -0.7]),
            spec(CaseId::HpnCaseII, 2, &[1.0, 0.5, -0.7]),
            spec(CaseId::EuclideanPoly, 3, &[1.0, 0.5, -0.7]),
        ];
        for s in curve_specs {
            let FamilyKind::Curve(fam) = make_family(&s).unwrap() else {
                panic!()
            };
            for &t in &[-1.7, 0.0, 0.4, 1.9] {
                let mismatch = fam.derivative_consistency(t).unwrap();
                assert!(
                    mismatch <= 1e-6,
                    "{} at t = {t}: jet/difference mismatch {mismatch}",
                    s.case.id()
                );
            }
        }
    }

    #[test]
    fn helix_requires_unit_parameters() {
        let s = spec(CaseId::SphereHelix, 3, &[0.5, 0.5]);
        assert!(matches!(
            make_family(&s),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn circle_cases_have_no_closed_form() {
        let s = spec(CaseId::SphereCircleII, 2, &[]);
        assert!(closed_form_point(&s, EvalAt::T(0.3)).is_err());
    }

    #[test]
    fn reports_serialize_with_stable_schema() {
        let s = spec(CaseId::SphereAxis, 2, &[0.0, 0.0, 1.0]);
        let report = verify_family(
            &s,
            Window::Curve {
                t0: -1.0,
                t1: 1.0,
                samples: 11,
            },
            Tolerances::default(),
            VerifyOptions {
                check_closed_form: false,
                ..Default::default()
            },
        )
        .unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with("{\"schema_version\":1,"));
        assert!(json.contains("\"expected\":\"harmonic\""));
    }
}
