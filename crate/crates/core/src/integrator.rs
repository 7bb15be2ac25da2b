//! Numerical solution of the lift equation psi' = psi F(t) on matrix groups.
//!
//! Every step multiplies on the right by the exponential of an algebra
//! element, so trajectories stay in the group up to exponential round-off;
//! the defining-constraint drift is monitored rather than silently repaired
//! (an optional polar projection exists behind a flag).

use crate::curves::{CurveFamily, SampledCurve};
use crate::error::{Error, Result};
use crate::liealg::{bracket, AlgebraElement, GroupConstraint, GroupElement};
use crate::spaces::HomogeneousPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    LieEuler,
    LieMidpoint,
    RkMk4,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lie-euler" => Ok(Method::LieEuler),
            "lie-midpoint" => Ok(Method::LieMidpoint),
            "rk-mk4" => Ok(Method::RkMk4),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected lie-euler, lie-midpoint, or rk-mk4)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::LieEuler => "lie-euler",
            Method::LieMidpoint => "lie-midpoint",
            Method::RkMk4 => "rk-mk4",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub method: Method,
    pub steps: usize,
    /// Check the drift against the tolerance every this many steps.
    pub drift_check_every: usize,
    pub drift_tol: f64,
    /// Re-project onto the group after each step (off by default so that
    /// drift stays a faithful diagnostic).
    pub repair: bool,
}

impl IntegratorConfig {
    pub fn new(method: Method, steps: usize) -> Self {
        Self {
            method,
            steps,
            drift_check_every: 1,
            drift_tol: 1e-8,
            repair: false,
        }
    }

    pub fn with_drift_tol(mut self, tol: f64) -> Self {
        self.drift_tol = tol;
        self
    }

    pub fn with_repair(mut self, repair: bool) -> Self {
        self.repair = repair;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("step count must be >= 1".into()));
        }
        if self.drift_tol <= 0.0 || !self.drift_tol.is_finite() {
            return Err(Error::InvalidParameter(
                "drift tolerance must be > 0".into(),
            ));
        }
        if self.drift_check_every == 0 {
            return Err(Error::InvalidParameter("drift cadence must be >= 1".into()));
        }
        Ok(())
    }
}

/// Integrated lift: group samples, projected points, per-sample drift.
#[derive(Debug)]
pub struct LiftTrajectory {
    pub times: Vec<f64>,
    pub psi: Vec<GroupElement>,
    pub points: Vec<HomogeneousPoint>,
    pub drift: Vec<f64>,
    model: crate::spaces::Model,
}

impl LiftTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn model(&self) -> &crate::spaces::Model {
        &self.model
    }

    pub fn step_size(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn endpoint(&self) -> &GroupElement {
        self.psi.last().expect("trajectory has at least the start")
    }
}

/// Where and how a drift check failed.
#[derive(Debug, Clone, Copy)]
pub struct DriftFailure {
    pub step: usize,
    pub t: f64,
    pub drift: f64,
    pub tol: f64,
}

/// Group-membership monitor: Frobenius norm of the defining-constraint
/// residual of the tagged group element.
pub fn drift(g: &GroupElement) -> f64 {
    g.constraint_residual()
}

/// Integrates psi' = psi F(t), psi(t0) = x, over [t0, t1].
pub fn solve_lift(
    fam: &CurveFamily,
    x: &GroupElement,
    t_range: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<LiftTrajectory> {
    let (traj, failure) = solve_lift_monitored(fam, x, t_range, cfg)?;
    if let Some(f) = failure {
        return Err(Error::DriftExceeded {
            step: f.step,
            t: f.t,
            drift: f.drift,
            tol: f.tol,
        });
    }
    Ok(traj)
}

/// As `solve_lift`, but on drift failure returns the partial trajectory
/// together with the failure report instead of dropping it.
pub fn solve_lift_monitored(
    fam: &CurveFamily,
    x: &GroupElement,
    (t0, t1): (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<(LiftTrajectory, Option<DriftFailure>)> {
    cfg.validate()?;
    let model = *fam.model();
    let x_residual = x.constraint_residual();
    if x_residual > cfg.drift_tol.max(1e-9) {
        return Err(Error::ConstraintViolation {
            what: "group",
            residual: x_residual,
            tol: cfg.drift_tol.max(1e-9),
        });
    }

    let h = (t1 - t0) / cfg.steps as f64;
    let mut psi = x.clone();
    let mut traj = LiftTrajectory {
        times: Vec::with_capacity(cfg.steps + 1),
        psi: Vec::with_capacity(cfg.steps + 1),
        points: Vec::with_capacity(cfg.steps + 1),
        drift: Vec::with_capacity(cfg.steps + 1),
        model,
    };
    let push = |traj: &mut LiftTrajectory, t: f64, g: &GroupElement| -> Result<()> {
        traj.times.push(t);
        traj.points.push(model.project_point(g)?);
        traj.drift.push(drift(g));
        traj.psi.push(g.clone());
        Ok(())
    };
    push(&mut traj, t0, &psi)?;

    for step in 1..=cfg.steps {
        let tn = t0 + (step - 1) as f64 * h;
        let omega = method_increment(cfg.method, fam, tn, h);
        psi = &psi * &crate::liealg::expm(&omega, psi.constraint());
        if cfg.repair {
            psi = polar_repair(&psi);
        }
        let t = t0 + step as f64 * h;
        push(&mut traj, t, &psi)?;

        let d = *traj.drift.last().unwrap();
        if (step % cfg.drift_check_every == 0 || step == cfg.steps) && d > cfg.drift_tol {
            return Ok((
                traj,
                Some(DriftFailure {
                    step,
                    t,
                    drift: d,
                    tol: cfg.drift_tol,
                }),
            ));
        }
    }
    Ok((traj, None))
}

fn method_increment(method: Method, fam: &CurveFamily, tn: f64, h: f64) -> AlgebraElement {
    match method {
        Method::LieEuler => fam.value(tn).scale(h),
        Method::LieMidpoint => fam.value(tn + 0.5 * h).scale(h),
        Method::RkMk4 => {
            // Classical RK4 applied to the right-trivialized algebra ODE
            // u' = dexpinv(u, F(t)), u(tn) = 0, truncated after the double
            // commutator (enough for order four).
            let f1 = fam.value(tn);
            let fmid = fam.value(tn + 0.5 * h);
            let fend = fam.value(tn + h);

            let k1 = f1;
            let k2 = dexpinv(&k1.scale(0.5 * h), &fmid);
            let k3 = dexpinv(&k2.scale(0.5 * h), &fmid);
            let k4 = dexpinv(&k3.scale(h), &fend);

            (&(&k1 + &k4) + &(&k2 + &k3).scale(2.0)).scale(h / 6.0)
        }
    }
}

/// dexpinv for the right-trivialized flow psi' = psi F:
/// f + [u, f]/2 + [u, [u, f]]/12.
fn dexpinv(u: &AlgebraElement, f: &AlgebraElement) -> AlgebraElement {
    let uf = bracket(u, f).expect("same ambient dimension");
    let uuf = bracket(u, &uf).expect("same ambient dimension");
    &(f + &uf.scale(0.5)) + &uuf.scale(1.0 / 12.0)
}

/// Newton iteration toward the unitary polar factor (exact bottom-row fix
/// for the affine family).
fn polar_repair(g: &GroupElement) -> GroupElement {
    match g.constraint() {
        GroupConstraint::AffineEuclidean => {
            let n = g.dim();
            let mut m = g.matrix().clone();
            for col in 0..n {
                m[(n - 1, col)] = if col == n - 1 {
                    num_complex::Complex64::new(1.0, 0.0)
                } else {
                    num_complex::Complex64::ZERO
                };
            }
            GroupElement::new_unchecked(m, g.constraint())
        }
        _ => {
            let mut m = g.matrix().clone();
            for _ in 0..2 {
                let inv_adjoint = m
                    .clone()
                    .lu()
                    .solve(&crate::liealg::CMat::identity(m.nrows(), m.ncols()))
                    .expect("near-group matrix is invertible")
                    .adjoint();
                m = (&m + &inv_adjoint) * num_complex::Complex64::new(0.5, 0.0);
            }
            GroupElement::new_unchecked(m, g.constraint())
        }
    }
}

/// Default differencing stride for jets of pulled-back families.
pub const PULLBACK_STRIDE: usize = 4;

/// Discrete Maurer-Cartan pull-back: F(t_i) ~ psi_i^{-1} (psi_{i+1} -
/// psi_{i-1}) / (2h) at interior samples, packaged as a sampled family with
/// finite-difference provenance.
pub fn pullback(traj: &LiftTrajectory) -> Result<CurveFamily> {
    pullback_with_stride(traj, PULLBACK_STRIDE)
}

pub fn pullback_with_stride(traj: &LiftTrajectory, stride: usize) -> Result<CurveFamily> {
    if traj.len() < 5 {
        return Err(Error::TooFewSamples {
            got: traj.len(),
            need: 5,
        });
    }
    let h = traj.step_size();
    let mut values = Vec::with_capacity(traj.len() - 2);
    for i in 1..traj.len() - 1 {
        let diff = (traj.psi[i + 1].matrix() - traj.psi[i - 1].matrix())
            * num_complex::Complex64::new(0.5 / h, 0.0);
        let value = traj.psi[i]
            .matrix()
            .clone()
            .lu()
            .solve(&diff)
            .expect("group element is invertible");
        values.push(AlgebraElement::new(value)?);
    }
    let samples = SampledCurve::new(traj.times[1], h, values, stride)?;
    Ok(CurveFamily::from_samples(*traj.model(), samples))
}
