//! Residuals for maps from plane domains.
//!
//! A map from an open domain of R^2 with metric mu^2 g_0 into a symmetric
//! space is encoded through the pull-back coefficient fields
//! A_x(x, y), A_y(x, y) in g with their k/m splits. The harmonic residual is
//!
//!   E = d(A_{x,m})/dx + d(A_{y,m})/dy + [A_{x,k}, A_{x,m}] + [A_{y,k}, A_{y,m}],
//!
//! whose vanishing locus is mu-independent (the mu^-2 prefactor is reported
//! separately). The biharmonic residual is
//!
//!   -mu^-2 Lap(mu^-2 E) + mu^-4 ([[E, A_{x,m}], A_{x,m}] + [[E, A_{y,m}], A_{y,m}]),
//!
//! which for horizontal fields with mu = 1 has the closed third-order form
//! implemented separately as `biharmonic_residual_horizontal_flat`; the two
//! code paths cross-check each other. Integrability residuals are the k and
//! m parts of d(alpha) + [alpha ^ alpha]/2.

use std::sync::Arc;

use serde::Serialize;

use crate::curves::{CurveFamily, Jet4};
use crate::error::{Error, Result};
use crate::liealg::{bracket, AlgebraElement, GroupElement};
use crate::numdiff;
use crate::spaces::{HomogeneousPoint, Model};

/// Uniform rectangular sampling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidParameter(
                "grid needs at least 3 samples per axis".into(),
            ));
        }
        if x1 <= x0 || y1 <= y0 {
            return Err(Error::InvalidParameter(
                "grid extents must be ordered".into(),
            ));
        }
        Ok(Self {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
        })
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.hy()
    }

    /// All grid points, x-major for deterministic sweeps.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.ny).map(move |j| (self.x(i), self.y(j))))
    }

    /// Points at least `margin` nodes from every edge.
    pub fn interior_points(&self, margin: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        (margin..self.nx - margin)
            .flat_map(move |i| (margin..self.ny - margin).map(move |j| (self.x(i), self.y(j))))
    }
}

/// Value and partial derivatives of a g-valued field through total order 3.
#[derive(Debug, Clone)]
pub struct FieldJet3 {
    pub v: AlgebraElement,
    pub dx: AlgebraElement,
    pub dy: AlgebraElement,
    pub dxx: AlgebraElement,
    pub dxy: AlgebraElement,
    pub dyy: AlgebraElement,
    pub dxxx: AlgebraElement,
    pub dxxy: AlgebraElement,
    pub dxyy: AlgebraElement,
    pub dyyy: AlgebraElement,
}

impl FieldJet3 {
    pub fn zero(dim: usize) -> Self {
        let z = AlgebraElement::zeros(dim);
        Self {
            v: z.clone(),
            dx: z.clone(),
            dy: z.clone(),
            dxx: z.clone(),
            dxy: z.clone(),
            dyy: z.clone(),
            dxxx: z.clone(),
            dxxy: z.clone(),
            dxyy: z.clone(),
            dyyy: z,
        }
    }
}

/// Jets of the coefficient pair (A_x, A_y) at one point.
#[derive(Debug, Clone)]
pub struct PairJet3 {
    pub ax: FieldJet3,
    pub ay: FieldJet3,
}

/// Value and partials of the conformal factor through order 2.
#[derive(Debug, Clone, Copy)]
pub struct MuJet {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
}

impl MuJet {
    pub const ONE: Self = Self {
        v: 1.0,
        dx: 0.0,
        dy: 0.0,
        dxx: 0.0,
        dyy: 0.0,
    };
}

type PairFn = Arc<dyn Fn(f64, f64) -> PairJet3 + Send + Sync>;
type MuFn = Arc<dyn Fn(f64, f64) -> MuJet + Send + Sync>;

enum PlanarSource {
    Analytic(PairFn),
    Sampled(SampledFields),
}

enum MuSpec {
    One,
    Analytic(MuFn),
}

/// Coefficient fields A_x, A_y over a plane domain, with conformal factor.
pub struct PlanarFieldPair {
    model: Model,
    source: PlanarSource,
    mu: MuSpec,
}

/// Fields sampled on a grid; partials by grid stencils (4th order for first
/// and second partials, 2nd order for third partials), so jets exist only at
/// interior points two nodes from the boundary.
pub struct SampledFields {
    grid: GridSpec,
    ax: Vec<AlgebraElement>,
    ay: Vec<AlgebraElement>,
}

pub const SAMPLED_MARGIN: usize = 2;

impl SampledFields {
    pub fn new(grid: GridSpec, ax: Vec<AlgebraElement>, ay: Vec<AlgebraElement>) -> Result<Self> {
        let need = grid.nx * grid.ny;
        if ax.len() != need || ay.len() != need {
            return Err(Error::ShapeMismatch(format!(
                "expected {need} samples per field, got {} and {}",
                ax.len(),
                ay.len()
            )));
        }
        if grid.nx < 4 * SAMPLED_MARGIN + 1 || grid.ny < 4 * SAMPLED_MARGIN + 1 {
            return Err(Error::TooFewSamples {
                got: grid.nx.min(grid.ny),
                need: 4 * SAMPLED_MARGIN + 1,
            });
        }
        Ok(Self { grid, ax, ay })
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.grid.ny + j
    }

    fn node_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = (x - self.grid.x0) / self.grid.hx();
        let fj = (y - self.grid.y0) / self.grid.hy();
        let (i, j) = (fi.round(), fj.round());
        if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 {
            return None;
        }
        let (i, j) = (i as isize, j as isize);
        let margin = SAMPLED_MARGIN as isize;
        let inside = i >= margin
            && j >= margin
            && i < self.grid.nx as isize - margin
            && j < self.grid.ny as isize - margin;
        inside.then_some((i as usize, j as usize))
    }

    /// Separable 2-D stencil: x-stencil with its derivative order times
    /// y-stencil with its derivative order.
    fn apply(
        &self,
        field: &[AlgebraElement],
        i: usize,
        j: usize,
        (sx, px): (&[(isize, f64)], i32),
        (sy, py): (&[(isize, f64)], i32),
    ) -> AlgebraElement {
        let mut acc = AlgebraElement::zeros(field[0].dim());
        for &(ox, wx) in sx {
            for &(oy, wy) in sy {
                let ii = (i as isize + ox) as usize;
                let jj = (j as isize + oy) as usize;
                acc = &acc + &field[self.idx(ii, jj)].scale(wx * wy);
            }
        }
        acc.scale(self.grid.hx().powi(-px) * self.grid.hy().powi(-py))
    }

    fn jet(&self, field: &[AlgebraElement], i: usize, j: usize) -> FieldJet3 {
        const ID: &[(isize, f64)] = &[(0, 1.0)];
        use numdiff::{D1_ORDER2, D1_ORDER4, D2_ORDER2, D2_ORDER4, D3_ORDER2};
        FieldJet3 {
            v: field[self.idx(i, j)].clone(),
            dx: self.apply(field, i, j, (D1_ORDER4, 1), (ID, 0)),
            dy: self.apply(field, i, j, (ID, 0), (D1_ORDER4, 1)),
            dxx: self.apply(field, i, j, (D2_ORDER4, 2), (ID, 0)),
            dxy: self.apply(field, i, j, (D1_ORDER4, 1), (D1_ORDER4, 1)),
            dyy: self.apply(field, i, j, (ID, 0), (D2_ORDER4, 2)),
            dxxx: self.apply(field, i, j, (D3_ORDER2, 3), (ID, 0)),
            dxxy: self.apply(field, i, j, (D2_ORDER2, 2), (D1_ORDER2, 1)),
            dxyy: self.apply(field, i, j, (D1_ORDER2, 1), (D2_ORDER2, 2)),
            dyyy: self.apply(field, i, j, (ID, 0), (D3_ORDER2, 3)),
        }
    }
}

impl PlanarFieldPair {
    pub fn analytic(
        model: Model,
        jets: impl Fn(f64, f64) -> PairJet3 + Send + Sync + 'static,
    ) -> Self {
        Self {
            model,
            source: PlanarSource::Analytic(Arc::new(jets)),
            mu: MuSpec::One,
        }
    }

    pub fn from_samples(model: Model, samples: SampledFields) -> Self {
        Self {
            model,
            source: PlanarSource::Sampled(samples),
            mu: MuSpec::One,
        }
    }

    /// Replaces the conformal factor mu = 1 by an analytic one.
    pub fn with_mu(mut self, mu: impl Fn(f64, f64) -> MuJet + Send + Sync + 'static) -> Self {
        self.mu = MuSpec::Analytic(Arc::new(mu));
        self
    }

    /// Horizontal separable pair P(x) X, Q(y) Y with quadratic coefficient
    /// polynomials; the construction validates that X and Y commute and lie
    /// in m, and that the cross terms [[Y, X], X] and [[X, Y], Y] vanish.
    pub fn separable(
        model: Model,
        dir_x: &AlgebraElement,
        dir_y: &AlgebraElement,
        coeffs: SeparableCoeffs,
    ) -> Result<Self> {
        validate_commuting_m_pair(&model, dir_x, dir_y)?;
        let dim = model.ambient_dim();
        let (dx, dy) = (dir_x.clone(), dir_y.clone());
        Ok(Self::analytic(model, move |x, y| {
            let p = coeffs.p_jet(x);
            let q = coeffs.q_jet(y);
            let mut ax = FieldJet3::zero(dim);
            ax.v = dx.scale(p[0]);
            ax.dx = dx.scale(p[1]);
            ax.dxx = dx.scale(p[2]);
            ax.dxxx = dx.scale(p[3]);
            let mut ay = FieldJet3::zero(dim);
            ay.v = dy.scale(q[0]);
            ay.dy = dy.scale(q[1]);
            ay.dyy = dy.scale(q[2]);
            ay.dyyy = dy.scale(q[3]);
            PairJet3 { ax, ay }
        }))
    }

    /// Samples the pull-back alpha = psi^-1 d(psi) of a lift on a grid, with
    /// local central differences of step `delta` for the two partials.
    pub fn sample_from_lift(
        model: Model,
        psi: impl Fn(f64, f64) -> GroupElement,
        grid: GridSpec,
        delta: f64,
    ) -> Result<Self> {
        let mut ax = Vec::with_capacity(grid.nx * grid.ny);
        let mut ay = Vec::with_capacity(grid.nx * grid.ny);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = (grid.x(i), grid.y(j));
                let center = psi(x, y);
                let lu = center.matrix().clone().lu();
                let dx = (psi(x + delta, y).matrix() - psi(x - delta, y).matrix())
                    * num_complex::Complex64::new(0.5 / delta, 0.0);
                let dy = (psi(x, y + delta).matrix() - psi(x, y - delta).matrix())
                    * num_complex::Complex64::new(0.5 / delta, 0.0);
                ax.push(AlgebraElement::new(
                    lu.solve(&dx).expect("lift is invertible"),
                )?);
                ay.push(AlgebraElement::new(
                    lu.solve(&dy).expect("lift is invertible"),
                )?);
            }
        }
        Ok(Self::from_samples(model, SampledFields::new(grid, ax, ay)?))
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.source, PlanarSource::Sampled(_))
    }

    /// Interior margin (in nodes) required by this pair's derivative source.
    pub fn margin(&self) -> usize {
        match self.source {
            PlanarSource::Analytic(_) => 0,
            PlanarSource::Sampled(_) => SAMPLED_MARGIN,
        }
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<PairJet3> {
        match &self.source {
            PlanarSource::Analytic(f) => Ok(f(x, y)),
            PlanarSource::Sampled(s) => {
                let (i, j) = s.node_of(x, y).ok_or_else(|| {
                    Error::DerivativesUnavailable(format!(
                        "sampled fields provide jets at interior grid nodes only, (x, y) = ({x}, {y})"
                    ))
                })?;
                Ok(PairJet3 {
                    ax: s.jet(&s.ax, i, j),
                    ay: s.jet(&s.ay, i, j),
                })
            }
        }
    }

    pub fn mu_jet(&self, x: f64, y: f64) -> MuJet {
        match &self.mu {
            MuSpec::One => MuJet::ONE,
            MuSpec::Analytic(f) => f(x, y),
        }
    }

    /// Norm of the k-parts of the pair at a point (zero for horizontal pairs).
    pub fn horizontal_defect(&self, x: f64, y: f64) -> Result<f64> {
        let jets = self.jets(x, y)?;
        Ok(self.model.proj_k(&jets.ax.v).norm() + self.model.proj_k(&jets.ay.v).norm())
    }

    /// The mu-free harmonic expression E; its vanishing is the harmonic map
    /// equation regardless of mu.
    pub fn harmonic_residual(&self, x: f64, y: f64) -> Result<AlgebraElement> {
        let jets = self.jets(x, y)?;
        Ok(self.model.proj_m(&harmonic_expression(&self.model, &jets)))
    }

    /// The mu^-2 prefactor multiplying E in the tension field.
    pub fn harmonic_prefactor(&self, x: f64, y: f64) -> f64 {
        let mu = self.mu_jet(x, y).v;
        mu.powi(-2)
    }

    /// Full biharmonic residual with the conformal factor.
    pub fn biharmonic_residual(&self, x: f64, y: f64) -> Result<AlgebraElement> {
        let jets = self.jets(x, y)?;
        let mu = self.mu_jet(x, y);
        Ok(biharmonic_general(&self.model, &jets, &mu))
    }

    /// Closed third-order form for horizontal fields with mu = 1:
    /// -P_xxx - P_xyy - Q_xxy - Q_yyy
    ///   + [[P_x + Q_y, P], P] + [[P_x + Q_y, Q], Q].
    pub fn biharmonic_residual_horizontal_flat(&self, x: f64, y: f64) -> Result<AlgebraElement> {
        let jets = self.jets(x, y)?;
        let model = &self.model;
        let p = model.proj_m(&jets.ax.v);
        let q = model.proj_m(&jets.ay.v);
        let px_qy = &model.proj_m(&jets.ax.dx) + &model.proj_m(&jets.ay.dy);
        let third = &(&model.proj_m(&jets.ax.dxxx) + &model.proj_m(&jets.ax.dxyy))
            + &(&model.proj_m(&jets.ay.dxxy) + &model.proj_m(&jets.ay.dyyy));
        let curvature = &br(&br(&px_qy, &p), &p) + &br(&br(&px_qy, &q), &q);
        Ok(&(-&third) + &curvature)
    }

    /// Integrability residuals (R_k, R_m) of d(alpha) + [alpha ^ alpha]/2.
    pub fn integrability_residuals(
        &self,
        x: f64,
        y: f64,
    ) -> Result<(AlgebraElement, AlgebraElement)> {
        let jets = self.jets(x, y)?;
        let model = &self.model;
        let axk = model.proj_k(&jets.ax.v);
        let axm = model.proj_m(&jets.ax.v);
        let ayk = model.proj_k(&jets.ay.v);
        let aym = model.proj_m(&jets.ay.v);

        let rk = &(&(-&model.proj_k(&jets.ax.dy)) + &model.proj_k(&jets.ay.dx))
            + &(&br(&axk, &ayk) + &br(&axm, &aym));
        let rm = &(&(-&model.proj_m(&jets.ax.dy)) + &model.proj_m(&jets.ay.dx))
            + &(&br(&axk, &aym) + &br(&axm, &ayk));
        Ok((rk, rm))
    }

    /// Max residual norms (harmonic, biharmonic, integrability k and m) over
    /// the interior of a grid.
    pub fn residual_sweep(&self, grid: &GridSpec) -> Result<PlanarSweep> {
        let margin = self.margin();
        let mut sweep = PlanarSweep::default();
        for (x, y) in grid.interior_points(margin) {
            sweep.max_harmonic = sweep.max_harmonic.max(self.harmonic_residual(x, y)?.norm());
            sweep.max_biharmonic = sweep
                .max_biharmonic
                .max(self.biharmonic_residual(x, y)?.norm());
            let (rk, rm) = self.integrability_residuals(x, y)?;
            sweep.max_integrability_k = sweep.max_integrability_k.max(rk.norm());
            sweep.max_integrability_m = sweep.max_integrability_m.max(rm.norm());
            sweep.samples += 1;
        }
        Ok(sweep)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlanarSweep {
    pub max_harmonic: f64,
    pub max_biharmonic: f64,
    pub max_integrability_k: f64,
    pub max_integrability_m: f64,
    pub samples: usize,
}

fn br(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    bracket(x, y).expect("operands share the model's ambient dimension")
}

fn harmonic_expression(model: &Model, jets: &PairJet3) -> AlgebraElement {
    let axk = model.proj_k(&jets.ax.v);
    let axm = model.proj_m(&jets.ax.v);
    let ayk = model.proj_k(&jets.ay.v);
    let aym = model.proj_m(&jets.ay.v);
    &(&model.proj_m(&jets.ax.dx) + &model.proj_m(&jets.ay.dy))
        + &(&br(&axk, &axm) + &br(&ayk, &aym))
}

/// E and its first and pure-second partials, by the product rule; the
/// projections are constant linear maps, so everything reduces to the
/// supplied field jets.
fn harmonic_expression_partials(
    model: &Model,
    jets: &PairJet3,
) -> (
    AlgebraElement,
    AlgebraElement,
    AlgebraElement,
    AlgebraElement,
    AlgebraElement,
) {
    let k = |a: &AlgebraElement| model.proj_k(a);
    let m = |a: &AlgebraElement| model.proj_m(a);
    let ax = &jets.ax;
    let ay = &jets.ay;

    let e = harmonic_expression(model, jets);

    let e_x = &(&m(&ax.dxx) + &m(&ay.dxy))
        + &(&(&br(&k(&ax.dx), &m(&ax.v)) + &br(&k(&ax.v), &m(&ax.dx)))
            + &(&br(&k(&ay.dx), &m(&ay.v)) + &br(&k(&ay.v), &m(&ay.dx))));

    let e_y = &(&m(&ax.dxy) + &m(&ay.dyy))
        + &(&(&br(&k(&ax.dy), &m(&ax.v)) + &br(&k(&ax.v), &m(&ax.dy)))
            + &(&br(&k(&ay.dy), &m(&ay.v)) + &br(&k(&ay.v), &m(&ay.dy))));

    let e_xx = &(&m(&ax.dxxx) + &m(&ay.dxxy))
        + &(&(&(&br(&k(&ax.dxx), &m(&ax.v)) + &br(&k(&ax.dx), &m(&ax.dx)).scale(2.0))
            + &br(&k(&ax.v), &m(&ax.dxx)))
            + &(&(&br(&k(&ay.dxx), &m(&ay.v)) + &br(&k(&ay.dx), &m(&ay.dx)).scale(2.0))
                + &br(&k(&ay.v), &m(&ay.dxx))));

    let e_yy = &(&m(&ax.dxyy) + &m(&ay.dyyy))
        + &(&(&(&br(&k(&ax.dyy), &m(&ax.v)) + &br(&k(&ax.dy), &m(&ax.dy)).scale(2.0))
            + &br(&k(&ax.v), &m(&ax.dyy)))
            + &(&(&br(&k(&ay.dyy), &m(&ay.v)) + &br(&k(&ay.dy), &m(&ay.dy)).scale(2.0))
                + &br(&k(&ay.v), &m(&ay.dyy))));

    (e, e_x, e_y, e_xx, e_yy)
}

fn biharmonic_general(model: &Model, jets: &PairJet3, mu: &MuJet) -> AlgebraElement {
    let (e, e_x, e_y, e_xx, e_yy) = harmonic_expression_partials(model, jets);
    let axm = model.proj_m(&jets.ax.v);
    let aym = model.proj_m(&jets.ay.v);

    let inv2 = mu.v.powi(-2);
    // Partials of mu^-2.
    let inv2_x = -2.0 * mu.v.powi(-3) * mu.dx;
    let inv2_y = -2.0 * mu.v.powi(-3) * mu.dy;
    let inv2_lap = 6.0 * mu.v.powi(-4) * (mu.dx * mu.dx + mu.dy * mu.dy)
        - 2.0 * mu.v.powi(-3) * (mu.dxx + mu.dyy);

    // Lap(mu^-2 E) by the product rule.
    let lap = &(&e.scale(inv2_lap) + &(&e_x.scale(2.0 * inv2_x) + &e_y.scale(2.0 * inv2_y)))
        + &(&e_xx + &e_yy).scale(inv2);

    let curvature = &br(&br(&e, &axm), &axm) + &br(&br(&e, &aym), &aym);
    &lap.scale(-inv2) + &curvature.scale(inv2 * inv2)
}

/// Quadratic coefficient polynomials for the separable family:
/// P(x) = (a1 x^2 + b1 x + c1) X, Q(y) = (a2 y^2 + b2 y + c2) Y.
#[derive(Debug, Clone, Copy)]
pub struct SeparableCoeffs {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl SeparableCoeffs {
    fn p_jet(&self, x: f64) -> [f64; 4] {
        [
            self.a1 * x * x + self.b1 * x + self.c1,
            2.0 * self.a1 * x + self.b1,
            2.0 * self.a1,
            0.0,
        ]
    }

    fn q_jet(&self, y: f64) -> [f64; 4] {
        [
            self.a2 * y * y + self.b2 * y + self.c2,
            2.0 * self.a2 * y + self.b2,
            2.0 * self.a2,
            0.0,
        ]
    }

    /// Cubic phase d_x = a1 x^3 / 3 + b1 x^2 / 2 + c1 x.
    pub fn phase_x(&self, x: f64) -> f64 {
        self.a1 / 3.0 * x.powi(3) + self.b1 / 2.0 * x * x + self.c1 * x
    }

    pub fn phase_y(&self, y: f64) -> f64 {
        self.a2 / 3.0 * y.powi(3) + self.b2 / 2.0 * y * y + self.c2 * y
    }

    pub fn is_harmonic(&self) -> bool {
        self.a1 == 0.0 && self.b1 == 0.0 && self.a2 == 0.0 && self.b2 == 0.0
    }
}

const COMMUTE_TOL: f64 = 1e-12;

fn validate_commuting_m_pair(model: &Model, x: &AlgebraElement, y: &AlgebraElement) -> Result<()> {
    model.validate_algebra(x)?;
    model.validate_algebra(y)?;
    if model.proj_k(x).norm() > COMMUTE_TOL || model.proj_k(y).norm() > COMMUTE_TOL {
        return Err(Error::ConstraintViolation {
            what: "m-membership",
            residual: model.proj_k(x).norm().max(model.proj_k(y).norm()),
            tol: COMMUTE_TOL,
        });
    }
    let norm = br(x, y).norm();
    if norm > COMMUTE_TOL {
        return Err(Error::NonCommutingPair { bracket_norm: norm });
    }
    // Cross terms of the separated equation; these follow from [X, Y] = 0
    // but are checked directly to catch bad user-supplied pairs.
    let cross = br(&br(y, x), x).norm().max(br(&br(x, y), y).norm());
    if cross > COMMUTE_TOL {
        return Err(Error::NonCommutingPair {
            bracket_norm: cross,
        });
    }
    Ok(())
}

/// The separable lift psi(x, y) = x0 exp(d_x X + d_y Y) built from a
/// commuting pair in m, with its induced coefficient fields.
pub struct SeparableMap {
    model: Model,
    dir_x: AlgebraElement,
    dir_y: AlgebraElement,
    coeffs: SeparableCoeffs,
    x0: GroupElement,
}

/// Builds the separable map after validating the commuting m-pair.
pub fn build_separable_map(
    model: Model,
    dir_x: &AlgebraElement,
    dir_y: &AlgebraElement,
    coeffs: SeparableCoeffs,
    x0: GroupElement,
) -> Result<SeparableMap> {
    validate_commuting_m_pair(&model, dir_x, dir_y)?;
    Ok(SeparableMap {
        model,
        dir_x: dir_x.clone(),
        dir_y: dir_y.clone(),
        coeffs,
        x0,
    })
}

impl SeparableMap {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn coeffs(&self) -> SeparableCoeffs {
        self.coeffs
    }

    pub fn psi(&self, x: f64, y: f64) -> GroupElement {
        let exponent =
            &self.dir_x.scale(self.coeffs.phase_x(x)) + &self.dir_y.scale(self.coeffs.phase_y(y));
        &self.x0 * &crate::liealg::expm(&exponent, self.model.group_constraint())
    }

    pub fn phi(&self, x: f64, y: f64) -> Result<HomogeneousPoint> {
        self.model.project_point(&self.psi(x, y))
    }

    /// The induced coefficient fields P(x) X, Q(y) Y.
    pub fn fields(&self) -> PlanarFieldPair {
        PlanarFieldPair::separable(self.model, &self.dir_x, &self.dir_y, self.coeffs)
            .expect("directions validated at construction")
    }

    /// Restriction to the horizontal curve x -> psi(x, y0).
    pub fn x_slice_family(&self) -> CurveFamily {
        let dir = self.dir_x.clone();
        let c = self.coeffs;
        CurveFamily::analytic(self.model, move |t| Jet4 {
            f: dir.scale(c.a1 * t * t + c.b1 * t + c.c1),
            d1: dir.scale(2.0 * c.a1 * t + c.b1),
            d2: dir.scale(2.0 * c.a1),
            d3: dir.scale(0.0),
        })
    }
}
