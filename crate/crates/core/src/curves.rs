//! Harmonic and biharmonic residual evaluation for curve lifts
//! F(t) = F_k(t) + F_m(t), the reduced vector-form residuals for the three
//! rank-one families, and the matrix/reduced consistency bridge.
//!
//! The harmonic residual of a curve is F_m'(t) + [F_k(t), F_m(t)]; the
//! biharmonic residual is -H''(t) + [[H(t), F_m(t)], F_m(t)] where H is the
//! harmonic residual, which for horizontal families (F_k = 0) reduces to
//! -F_m''' + [[F_m', F_m], F_m].

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::liealg::{bracket, AlgebraElement, Quaternion};
use crate::numdiff;
use crate::spaces::Model;

/// Value and first three derivatives of a g-valued curve at one parameter.
#[derive(Debug, Clone)]
pub struct Jet4 {
    pub f: AlgebraElement,
    pub d1: AlgebraElement,
    pub d2: AlgebraElement,
    pub d3: AlgebraElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    FiniteDifference,
}

type JetFn = Arc<dyn Fn(f64) -> Jet4 + Send + Sync>;
type ValueFn = Arc<dyn Fn(f64) -> AlgebraElement + Send + Sync>;

enum CurveSource {
    Analytic(JetFn),
    /// Value closure; derivatives by central differences with one Richardson
    /// level. Step sizes grow with the derivative order so that f64 roundoff
    /// stays below the relaxed finite-difference tolerance.
    ValueOnly(ValueFn),
    Sampled(SampledCurve),
}

/// A curve t -> F(t) in the model's algebra with derivatives through order 3.
pub struct CurveFamily {
    model: Model,
    source: CurveSource,
}

/// Uniformly sampled algebra-valued curve; derivatives are grid stencils of
/// the given stride, so jets exist only at nodes at least `2 * stride` away
/// from either end.
pub struct SampledCurve {
    t0: f64,
    dt: f64,
    values: Vec<AlgebraElement>,
    stride: usize,
}

impl SampledCurve {
    pub fn new(t0: f64, dt: f64, values: Vec<AlgebraElement>, stride: usize) -> Result<Self> {
        if values.len() < 4 * stride + 1 {
            return Err(Error::TooFewSamples {
                got: values.len(),
                need: 4 * stride + 1,
            });
        }
        if dt <= 0.0 || !dt.is_finite() || stride == 0 {
            return Err(Error::InvalidParameter(
                "sample spacing and stride must be positive".into(),
            ));
        }
        Ok(Self {
            t0,
            dt,
            values,
            stride,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Node indices at which jets are available.
    pub fn interior(&self) -> std::ops::Range<usize> {
        2 * self.stride..self.len() - 2 * self.stride
    }

    fn nearest_node(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let i = x.round();
        if i < 0.0 || i as usize >= self.len() {
            return None;
        }
        ((x - i).abs() < 1e-6).then_some(i as usize)
    }

    fn combine(&self, i: usize, stencil: &[(isize, f64)], order: i32) -> AlgebraElement {
        let s = self.stride as isize;
        let h = self.dt * self.stride as f64;
        let mut acc = AlgebraElement::zeros(self.values[0].dim());
        for &(off, w) in stencil {
            let idx = (i as isize + off * s) as usize;
            acc = &acc + &self.values[idx].scale(w);
        }
        acc.scale(h.powi(-order))
    }

    fn jet_at_node(&self, i: usize) -> Result<Jet4> {
        if !self.interior().contains(&i) {
            return Err(Error::DerivativesUnavailable(format!(
                "node {i} is within {} nodes of the boundary",
                2 * self.stride
            )));
        }
        Ok(Jet4 {
            f: self.values[i].clone(),
            d1: self.combine(i, numdiff::D1_ORDER4, 1),
            d2: self.combine(i, numdiff::D2_ORDER4, 2),
            d3: self.combine(i, numdiff::D3_ORDER2, 3),
        })
    }

    /// Cubic Lagrange interpolation; exact at nodes.
    fn value(&self, t: f64) -> AlgebraElement {
        let x = ((t - self.t0) / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let i = x.round() as usize;
        if (x - i as f64).abs() < 1e-12 {
            return self.values[i].clone();
        }
        let base = (x.floor() as usize).clamp(1, self.len() - 3) - 1;
        let mut acc = AlgebraElement::zeros(self.values[0].dim());
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (x - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc = &acc + &self.values[base + a].scale(w);
        }
        acc
    }
}

// Per-order base steps for value-only families; each is scaled by
// max(1, |t|) and refined once by Richardson extrapolation. Larger steps at
// higher orders keep the h^-k roundoff amplification in check.
const FD_STEP_D1: f64 = 1e-4;
const FD_STEP_D2: f64 = 1e-3;
const FD_STEP_D3: f64 = 1e-2;

impl CurveFamily {
    pub fn analytic(
        model: Model,
        jet: impl Fn(f64) -> Jet4 + Send + Sync + 'static,
    ) -> Self {
        Self {
            model,
            source: CurveSource::Analytic(Arc::new(jet)),
        }
    }

    /// Family given only by its values; derivatives fall back to central
    /// finite differences.
    pub fn from_values(
        model: Model,
        f: impl Fn(f64) -> AlgebraElement + Send + Sync + 'static,
    ) -> Self {
        Self {
            model,
            source: CurveSource::ValueOnly(Arc::new(f)),
        }
    }

    pub fn from_samples(model: Model, samples: SampledCurve) -> Self {
        Self {
            model,
            source: CurveSource::Sampled(samples),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn provenance(&self) -> Provenance {
        match self.source {
            CurveSource::Analytic(_) => Provenance::Analytic,
            _ => Provenance::FiniteDifference,
        }
    }

    pub fn samples(&self) -> Option<&SampledCurve> {
        match &self.source {
            CurveSource::Sampled(s) => Some(s),
            _ => None,
        }
    }

    pub fn value(&self, t: f64) -> AlgebraElement {
        match &self.source {
            CurveSource::Analytic(jet) => jet(t).f,
            CurveSource::ValueOnly(f) => f(t),
            CurveSource::Sampled(s) => s.value(t),
        }
    }

    pub fn jet(&self, t: f64) -> Result<Jet4> {
        match &self.source {
            CurveSource::Analytic(jet) => Ok(jet(t)),
            CurveSource::ValueOnly(f) => Ok(fd_jet(f.as_ref(), t)),
            CurveSource::Sampled(s) => {
                let i = s.nearest_node(t).ok_or_else(|| {
                    Error::DerivativesUnavailable(format!(
                        "sampled family provides jets at grid nodes only, t = {t}"
                    ))
                })?;
                s.jet_at_node(i)
            }
        }
    }

    /// Mismatch between the supplied first derivative and a central
    /// difference of the values; a sanity cross-check for analytic families.
    pub fn derivative_consistency(&self, t: f64) -> Result<f64> {
        let jet = self.jet(t)?;
        let h = 1e-5 * t.abs().max(1.0);
        let diff = (&self.value(t + h) - &self.value(t - h)).scale(0.5 / h);
        Ok((&diff - &jet.d1).norm())
    }

    /// F_m'(t) + [F_k(t), F_m(t)], projected to m.
    pub fn harmonic_residual(&self, t: f64) -> Result<AlgebraElement> {
        let jet = self.jet(t)?;
        Ok(self.model.proj_m(&harmonic_expression(&self.model, &jet)))
    }

    /// -H''(t) + [[H(t), F_m(t)], F_m(t)] with H the harmonic expression;
    /// reduces to -F_m''' + [[F_m', F_m], F_m] for horizontal families.
    pub fn biharmonic_residual(&self, t: f64) -> Result<AlgebraElement> {
        let jet = self.jet(t)?;
        Ok(biharmonic_from_jet(&self.model, &jet))
    }

    /// Max residual norms (harmonic, biharmonic) over a uniform window.
    pub fn residual_sweep(&self, t0: f64, t1: f64, samples: usize) -> Result<(f64, f64)> {
        let mut max_h = 0.0f64;
        let mut max_b = 0.0f64;
        for i in 0..samples {
            let t = if samples == 1 {
                t0
            } else {
                t0 + (t1 - t0) * i as f64 / (samples - 1) as f64
            };
            let jet = self.jet(t)?;
            let h = self.model.proj_m(&harmonic_expression(&self.model, &jet));
            max_h = max_h.max(h.norm());
            max_b = max_b.max(biharmonic_from_jet(&self.model, &jet).norm());
        }
        Ok((max_h, max_b))
    }
}

fn br(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    bracket(x, y).expect("operands share the model's ambient dimension")
}

fn harmonic_expression(model: &Model, jet: &Jet4) -> AlgebraElement {
    let fk = model.proj_k(&jet.f);
    let fm = model.proj_m(&jet.f);
    &model.proj_m(&jet.d1) + &br(&fk, &fm)
}

fn biharmonic_from_jet(model: &Model, jet: &Jet4) -> AlgebraElement {
    let fk = model.proj_k(&jet.f);
    let fm = model.proj_m(&jet.f);
    let fk1 = model.proj_k(&jet.d1);
    let fm1 = model.proj_m(&jet.d1);
    let fk2 = model.proj_k(&jet.d2);
    let fm2 = model.proj_m(&jet.d2);
    let fm3 = model.proj_m(&jet.d3);

    let h = &fm1 + &br(&fk, &fm);
    // H'' by differentiating F_m' + [F_k, F_m] twice; the projections are
    // constant linear maps so this needs nothing past the supplied jet.
    let h2 = &(&fm3 + &br(&fk2, &fm)) + &(&br(&fk1, &fm1).scale(2.0) + &br(&fk, &fm2));
    &(-&h2) + &br(&br(&h, &fm), &fm)
}

fn fd_jet(f: &(dyn Fn(f64) -> AlgebraElement + Send + Sync), t: f64) -> Jet4 {
    let scale = t.abs().max(1.0);
    let dim = f(t).dim();

    let combine = |stencil: &[(isize, f64)], h: f64, order: i32| {
        let mut acc = AlgebraElement::zeros(dim);
        for &(off, w) in stencil {
            acc = &acc + &f(t + off as f64 * h).scale(w);
        }
        acc.scale(h.powi(-order))
    };
    let richardson = |stencil: &[(isize, f64)], h: f64, order: i32| {
        let coarse = combine(stencil, h, order);
        let fine = combine(stencil, h / 2.0, order);
        // O(h^2) stencils throughout, so one level cancels the h^2 term.
        &fine.scale(4.0 / 3.0) - &coarse.scale(1.0 / 3.0)
    };

    Jet4 {
        f: f(t),
        d1: richardson(numdiff::D1_ORDER2, FD_STEP_D1 * scale, 1),
        d2: richardson(numdiff::D2_ORDER2, FD_STEP_D2 * scale, 2),
        d3: richardson(numdiff::D3_ORDER2, FD_STEP_D3 * scale, 3),
    }
}

// ---------------------------------------------------------------------------
// Reduced vector-form residuals.
// ---------------------------------------------------------------------------

/// Value and derivatives of a real coordinate curve u: R -> R^n.
#[derive(Debug, Clone)]
pub struct RealVecJet {
    pub f: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

/// Value and derivatives of a complex coordinate curve z: R -> C^n.
#[derive(Debug, Clone)]
pub struct ComplexVecJet {
    pub f: Vec<Complex64>,
    pub d1: Vec<Complex64>,
    pub d2: Vec<Complex64>,
    pub d3: Vec<Complex64>,
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Hermitian pairing <a, b> = sum a_i conj(b_i).
fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Sphere reduction: -u''' + <u', u> u - <u, u> u'.
pub fn reduced_residual_sphere(jet: &RealVecJet) -> Vec<f64> {
    let a = dot(&jet.d1, &jet.f);
    let b = dot(&jet.f, &jet.f);
    jet.f
        .iter()
        .zip(&jet.d1)
        .zip(&jet.d3)
        .map(|((&u, &u1), &u3)| -u3 + a * u - b * u1)
        .collect()
}

/// Complex projective reduction at third order:
/// -z''' + 2<z, z'> z - <z', z> z - <z, z> z'.
///
/// This is the componentwise matrix-bracket reduction; the acceptance suite
/// regression-tests it against the matrix residual rather than trusting any
/// displayed formula.
pub fn reduced_residual_cpn(jet: &ComplexVecJet) -> Vec<Complex64> {
    let s = hdot(&jet.f, &jet.d1);
    let n2 = hdot(&jet.f, &jet.f);
    let coeff = 2.0 * s - s.conj();
    jet.f
        .iter()
        .zip(&jet.d1)
        .zip(&jet.d3)
        .map(|((&z, &z1), &z3)| -z3 + coeff * z - n2 * z1)
        .collect()
}

/// Quaternion projective reduction, computed in quaternion arithmetic on the
/// row Q = Z + W j: -Q''' + (2 s - conj(s)) Q - |Q|^2 Q', with
/// s = sum q_i conj(q_i'). Returned split back into the (Z, W) pair.
pub fn reduced_residual_hpn(
    z: &ComplexVecJet,
    w: &ComplexVecJet,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = z.f.len();
    let q: Vec<Quaternion> = (0..n)
        .map(|i| Quaternion::from_complex_pair(z.f[i], w.f[i]))
        .collect();
    let q1: Vec<Quaternion> = (0..n)
        .map(|i| Quaternion::from_complex_pair(z.d1[i], w.d1[i]))
        .collect();
    let q3: Vec<Quaternion> = (0..n)
        .map(|i| Quaternion::from_complex_pair(z.d3[i], w.d3[i]))
        .collect();

    let s = q
        .iter()
        .zip(&q1)
        .fold(Quaternion::ZERO, |acc, (a, b)| acc + *a * b.conj());
    let norm2: f64 = q.iter().map(Quaternion::norm_sqr).sum();
    let coeff = s.scale(2.0) - s.conj();

    let mut rz = Vec::with_capacity(n);
    let mut rw = Vec::with_capacity(n);
    for i in 0..n {
        let r = -q3[i] + coeff * q[i] - q1[i].scale(norm2);
        let (a, b) = r.complex_pair();
        rz.push(a);
        rw.push(b);
    }
    (rz, rw)
}

// ---------------------------------------------------------------------------
// Polynomial coordinate families (catalog fodder and bridge oracles).
// ---------------------------------------------------------------------------

/// Componentwise real polynomial curve; entry (i, k) multiplies t^k in
/// the i-th coordinate.
#[derive(Debug, Clone)]
pub struct PolyVec {
    pub coeffs: Vec<Vec<f64>>,
}

impl PolyVec {
    pub fn jet(&self, t: f64) -> RealVecJet {
        let eval = |c: &[f64], order: usize| -> f64 {
            let mut acc = 0.0;
            for (k, &ck) in c.iter().enumerate().skip(order) {
                let mut factor = 1.0;
                for j in 0..order {
                    factor *= (k - j) as f64;
                }
                acc += ck * factor * t.powi((k - order) as i32);
            }
            acc
        };
        RealVecJet {
            f: self.coeffs.iter().map(|c| eval(c, 0)).collect(),
            d1: self.coeffs.iter().map(|c| eval(c, 1)).collect(),
            d2: self.coeffs.iter().map(|c| eval(c, 2)).collect(),
            d3: self.coeffs.iter().map(|c| eval(c, 3)).collect(),
        }
    }
}

/// Componentwise complex polynomial curve.
#[derive(Debug, Clone)]
pub struct PolyVecC {
    pub coeffs: Vec<Vec<Complex64>>,
}

impl PolyVecC {
    pub fn jet(&self, t: f64) -> ComplexVecJet {
        let eval = |c: &[Complex64], order: usize| -> Complex64 {
            let mut acc = Complex64::ZERO;
            for (k, &ck) in c.iter().enumerate().skip(order) {
                let mut factor = 1.0;
                for j in 0..order {
                    factor *= (k - j) as f64;
                }
                acc += ck * factor * t.powi((k - order) as i32);
            }
            acc
        };
        ComplexVecJet {
            f: self.coeffs.iter().map(|c| eval(c, 0)).collect(),
            d1: self.coeffs.iter().map(|c| eval(c, 1)).collect(),
            d2: self.coeffs.iter().map(|c| eval(c, 2)).collect(),
            d3: self.coeffs.iter().map(|c| eval(c, 3)).collect(),
        }
    }
}

/// Matrix family from a real coordinate jet pushed through the m-chart
/// (sphere and Euclidean models; the chart is linear, so jets map through).
pub fn family_from_real_polys(model: Model, polys: PolyVec) -> Result<CurveFamily> {
    use crate::spaces::MCoords;
    let expected = model.n();
    if polys.coeffs.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected {expected} coordinate polynomials, got {}",
            polys.coeffs.len()
        )));
    }
    let chart = move |v: Vec<f64>| -> AlgebraElement {
        model
            .m_from_coords(&MCoords::Real(v))
            .expect("validated length")
    };
    Ok(CurveFamily::analytic(model, move |t| {
        let jet = polys.jet(t);
        Jet4 {
            f: chart(jet.f),
            d1: chart(jet.d1),
            d2: chart(jet.d2),
            d3: chart(jet.d3),
        }
    }))
}

/// Matrix family from a complex coordinate jet (complex projective model).
pub fn family_from_complex_polys(model: Model, polys: PolyVecC) -> Result<CurveFamily> {
    use crate::spaces::MCoords;
    let expected = model.n();
    if polys.coeffs.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected {expected} coordinate polynomials, got {}",
            polys.coeffs.len()
        )));
    }
    let chart = move |v: Vec<Complex64>| -> AlgebraElement {
        model
            .m_from_coords(&MCoords::Complex(v))
            .expect("validated length")
    };
    Ok(CurveFamily::analytic(model, move |t| {
        let jet = polys.jet(t);
        Jet4 {
            f: chart(jet.f),
            d1: chart(jet.d1),
            d2: chart(jet.d2),
            d3: chart(jet.d3),
        }
    }))
}

/// Matrix family from a (Z, W) polynomial pair (quaternion projective model).
pub fn family_from_hpn_polys(model: Model, z: PolyVecC, w: PolyVecC) -> Result<CurveFamily> {
    use crate::spaces::MCoords;
    let expected = model.n();
    if z.coeffs.len() != expected || w.coeffs.len() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected {expected} coordinate polynomials per row",
        )));
    }
    let chart = move |a: Vec<Complex64>, b: Vec<Complex64>| -> AlgebraElement {
        model
            .m_from_coords(&MCoords::ComplexPair(a, b))
            .expect("validated length")
    };
    Ok(CurveFamily::analytic(model, move |t| {
        let zj = z.jet(t);
        let wj = w.jet(t);
        Jet4 {
            f: chart(zj.f, wj.f),
            d1: chart(zj.d1, wj.d1),
            d2: chart(zj.d2, wj.d2),
            d3: chart(zj.d3, wj.d3),
        }
    }))
}
