//! Concrete symmetric-space models.
//!
//! Four target families are supported, each with its Cartan projector pair,
//! an m-coordinate chart matching the block conventions of the ambient
//! algebra, and the projection from the group to the point space:
//!
//! * `Sphere(n)`: G = SO(n+1), ambient so(n+1), m = first-row/column block
//!   A(u) with u in R^n.
//! * `ComplexProjective(n)`: G = SU(n+1), ambient su(n+1), m-chart z in C^n.
//! * `QuaternionProjective(n)`: G = Sp(n+1) inside U(2n+2), m-chart a pair
//!   (Z, W) of complex row vectors.
//! * `Euclidean(n)`: G = affine matrices [[R, v], [0, 1]], K the rotation
//!   block, m the translations; under the matrix commutator [m, m] = 0 and
//!   k acts on m by T.v.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::liealg::{
    expm, symplectic_form, AlgebraElement, CMat, GroupConstraint, GroupElement, Quaternion,
};

/// Tolerance for validating that an input matrix lies in the ambient algebra.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Tolerance for validating group membership of points fed to `project_point`.
pub const POINT_CONSTRAINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Sphere(usize),
    ComplexProjective(usize),
    QuaternionProjective(usize),
    Euclidean(usize),
}

impl Family {
    pub fn rank_parameter(&self) -> usize {
        match *self {
            Family::Sphere(n)
            | Family::ComplexProjective(n)
            | Family::QuaternionProjective(n)
            | Family::Euclidean(n) => n,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Sphere(_) => "sphere",
            Family::ComplexProjective(_) => "cpn",
            Family::QuaternionProjective(_) => "hpn",
            Family::Euclidean(_) => "euclidean",
        }
    }
}

/// Coordinates of the m-chart, shaped per family.
#[derive(Debug, Clone, PartialEq)]
pub enum MCoords {
    /// Sphere and Euclidean type: u in R^n.
    Real(Vec<f64>),
    /// Complex projective: z in C^n.
    Complex(Vec<Complex64>),
    /// Quaternion projective: (Z, W), both in C^n.
    ComplexPair(Vec<Complex64>, Vec<Complex64>),
}

/// A point of the model's point space, stored through a representative.
#[derive(Debug, Clone)]
pub enum HomogeneousPoint {
    Sphere(DVector<f64>),
    ComplexProjective(DVector<Complex64>),
    QuaternionProjective(Vec<Quaternion>),
    Euclidean(DVector<f64>),
}

impl HomogeneousPoint {
    /// Distance to `other` minimized over the model's scalar gauge:
    /// nothing for sphere/Euclidean, a unit complex phase for CP^n, a unit
    /// right quaternion for HP^n.
    pub fn gauge_distance(&self, other: &Self) -> f64 {
        match (self, other) {
            (HomogeneousPoint::Sphere(p), HomogeneousPoint::Sphere(q))
            | (HomogeneousPoint::Euclidean(p), HomogeneousPoint::Euclidean(q)) => (p - q).norm(),
            (HomogeneousPoint::ComplexProjective(p), HomogeneousPoint::ComplexProjective(q)) => {
                // Optimal phase lambda = u / |u| with u = sum p_i conj(q_i);
                // the difference is then formed entrywise, which stays
                // accurate when the points nearly coincide.
                let u: Complex64 = p.iter().zip(q.iter()).map(|(a, b)| a * b.conj()).sum();
                let lambda = if u.norm() > 0.0 {
                    u / u.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
                p.iter()
                    .zip(q.iter())
                    .map(|(a, b)| (a - b * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            }
            (
                HomogeneousPoint::QuaternionProjective(p),
                HomogeneousPoint::QuaternionProjective(q),
            ) => {
                let v = p
                    .iter()
                    .zip(q.iter())
                    .fold(Quaternion::ZERO, |acc, (a, b)| acc + a.conj() * *b);
                let lambda = if v.norm() > 0.0 {
                    v.conj().scale(1.0 / v.norm())
                } else {
                    Quaternion::ONE
                };
                p.iter()
                    .zip(q.iter())
                    .map(|(a, b)| (*a - *b * lambda).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            }
            _ => f64::INFINITY,
        }
    }

    /// Gauge-fixed representative: scale by the unit scalar (phase, or right
    /// unit quaternion) that makes the anchor coordinate real and positive.
    /// The anchor is the first coordinate whose modulus is at least half the
    /// largest one, which keeps the choice away from zero crossings.
    pub fn canonicalize(&self) -> Self {
        match self {
            HomogeneousPoint::Sphere(_) | HomogeneousPoint::Euclidean(_) => self.clone(),
            HomogeneousPoint::ComplexProjective(p) => {
                let max = p.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
                if max == 0.0 {
                    return self.clone();
                }
                let anchor = p.iter().find(|z| z.norm() >= 0.5 * max).unwrap();
                let phase = anchor / anchor.norm();
                HomogeneousPoint::ComplexProjective(p.map(|z| z * phase.conj()))
            }
            HomogeneousPoint::QuaternionProjective(p) => {
                let max = p.iter().map(Quaternion::norm).fold(0.0f64, f64::max);
                if max == 0.0 {
                    return self.clone();
                }
                let anchor = p.iter().find(|q| q.norm() >= 0.5 * max).unwrap();
                let lambda = anchor.conj().scale(1.0 / anchor.norm());
                HomogeneousPoint::QuaternionProjective(p.iter().map(|q| *q * lambda).collect())
            }
        }
    }

    /// Norm of the representative vector (affine points report their
    /// Euclidean norm).
    pub fn representative_norm(&self) -> f64 {
        match self {
            HomogeneousPoint::Sphere(p) | HomogeneousPoint::Euclidean(p) => p.norm(),
            HomogeneousPoint::ComplexProjective(p) => p.norm(),
            HomogeneousPoint::QuaternionProjective(p) => {
                p.iter().map(Quaternion::norm_sqr).sum::<f64>().sqrt()
            }
        }
    }

    /// Flat real coordinates of the canonical representative, in the column
    /// order the CLI exports.
    pub fn flat_coords(&self) -> Vec<f64> {
        match self {
            HomogeneousPoint::Sphere(p) | HomogeneousPoint::Euclidean(p) => {
                p.iter().copied().collect()
            }
            HomogeneousPoint::ComplexProjective(p) => {
                p.iter().flat_map(|z| [z.re, z.im]).collect()
            }
            HomogeneousPoint::QuaternionProjective(p) => {
                p.iter().flat_map(|q| [q.w, q.x, q.y, q.z]).collect()
            }
        }
    }

    /// Column labels matching `flat_coords`.
    pub fn coord_labels(&self) -> Vec<String> {
        match self {
            HomogeneousPoint::Sphere(p) | HomogeneousPoint::Euclidean(p) => {
                (0..p.len()).map(|i| format!("p{i}")).collect()
            }
            HomogeneousPoint::ComplexProjective(p) => (0..p.len())
                .flat_map(|i| [format!("p{i}_re"), format!("p{i}_im")])
                .collect(),
            HomogeneousPoint::QuaternionProjective(p) => (0..p.len())
                .flat_map(|i| {
                    [
                        format!("p{i}_w"),
                        format!("p{i}_x"),
                        format!("p{i}_y"),
                        format!("p{i}_z"),
                    ]
                })
                .collect(),
        }
    }
}

/// A symmetric-space model: the family tag plus every derived convention
/// (ambient dimension, projectors, charts, base point, group constraint).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Model {
    family: Family,
}

impl Model {
    pub fn new(family: Family) -> Result<Self> {
        if family.rank_parameter() == 0 {
            return Err(Error::InvalidParameter(
                "model parameter n must be at least 1".into(),
            ));
        }
        Ok(Self { family })
    }

    pub fn sphere(n: usize) -> Self {
        Self::new(Family::Sphere(n)).expect("n >= 1")
    }

    pub fn complex_projective(n: usize) -> Self {
        Self::new(Family::ComplexProjective(n)).expect("n >= 1")
    }

    pub fn quaternion_projective(n: usize) -> Self {
        Self::new(Family::QuaternionProjective(n)).expect("n >= 1")
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(Family::Euclidean(n)).expect("n >= 1")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.family.rank_parameter()
    }

    /// Ambient matrix dimension N.
    pub fn ambient_dim(&self) -> usize {
        match self.family {
            Family::Sphere(n) | Family::ComplexProjective(n) | Family::Euclidean(n) => n + 1,
            Family::QuaternionProjective(n) => 2 * n + 2,
        }
    }

    pub fn group_constraint(&self) -> GroupConstraint {
        match self.family {
            Family::Sphere(_) => GroupConstraint::Orthogonal,
            Family::ComplexProjective(_) => GroupConstraint::SpecialUnitary,
            Family::QuaternionProjective(_) => GroupConstraint::SymplecticUnitary,
            Family::Euclidean(_) => GroupConstraint::AffineEuclidean,
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.ambient_dim(), self.group_constraint())
    }

    /// Residual of the ambient algebra's defining linear constraints.
    pub fn algebra_residual(&self, x: &AlgebraElement) -> f64 {
        let m = x.matrix();
        let nn = self.ambient_dim();
        if m.nrows() != nn {
            return f64::INFINITY;
        }
        match self.family {
            Family::Sphere(_) => {
                let skew = (m + m.transpose()).norm();
                let imag = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                skew + imag
            }
            Family::ComplexProjective(_) => {
                let skew_herm = (m + m.adjoint()).norm();
                skew_herm + m.trace().norm()
            }
            Family::QuaternionProjective(_) => {
                let j = symplectic_form(nn);
                let sympl = (m.transpose() * &j + &j * m).norm();
                let skew_herm = (m + m.adjoint()).norm();
                sympl + skew_herm
            }
            Family::Euclidean(n) => {
                let bottom: f64 = (0..nn).map(|c| m[(n, c)].norm_sqr()).sum::<f64>().sqrt();
                let block = m.view((0, 0), (n, n));
                let skew = (block + block.transpose()).norm();
                let imag = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
                bottom + skew + imag
            }
        }
    }

    pub fn validate_algebra(&self, x: &AlgebraElement) -> Result<()> {
        let residual = self.algebra_residual(x);
        if residual > ALGEBRA_TOL {
            return Err(Error::ConstraintViolation {
                what: "algebra",
                residual,
                tol: ALGEBRA_TOL,
            });
        }
        Ok(())
    }

    /// Cartan split X = X_k + X_m. The input must lie in the ambient
    /// algebra; the two parts land in the k and m block patterns.
    pub fn project(&self, x: &AlgebraElement) -> Result<(AlgebraElement, AlgebraElement)> {
        self.validate_algebra(x)?;
        let xm = self.proj_m(x);
        let xk = x - &xm;
        Ok((xk, xm))
    }

    /// m-component, extracted from the block pattern without validation.
    pub fn proj_m(&self, x: &AlgebraElement) -> AlgebraElement {
        self.m_from_coords(&self.m_coords(x))
            .expect("coords extracted from a matching matrix")
    }

    /// k-component, X - proj_m(X).
    pub fn proj_k(&self, x: &AlgebraElement) -> AlgebraElement {
        x - &self.proj_m(x)
    }

    /// m-chart coordinates of (the m-part of) an algebra element.
    pub fn m_coords(&self, x: &AlgebraElement) -> MCoords {
        let m = x.matrix();
        match self.family {
            Family::Sphere(n) => {
                MCoords::Real((0..n).map(|j| m[(j + 1, 0)].re).collect())
            }
            Family::ComplexProjective(n) => {
                MCoords::Complex((0..n).map(|j| m[(j + 1, 0)]).collect())
            }
            Family::QuaternionProjective(n) => {
                let z = (0..n).map(|j| m[(0, j + 1)]).collect();
                let w = (0..n).map(|j| m[(0, n + 2 + j)]).collect();
                MCoords::ComplexPair(z, w)
            }
            Family::Euclidean(n) => MCoords::Real((0..n).map(|i| m[(i, n)].re).collect()),
        }
    }

    /// Builds the m-block-pattern matrix from chart coordinates.
    pub fn m_from_coords(&self, coords: &MCoords) -> Result<AlgebraElement> {
        let nn = self.ambient_dim();
        let mut m = CMat::zeros(nn, nn);
        match (self.family, coords) {
            (Family::Sphere(n), MCoords::Real(u)) => {
                self.check_len(u.len(), n)?;
                for (j, &uj) in u.iter().enumerate() {
                    m[(0, j + 1)] = Complex64::new(-uj, 0.0);
                    m[(j + 1, 0)] = Complex64::new(uj, 0.0);
                }
            }
            (Family::ComplexProjective(n), MCoords::Complex(z)) => {
                self.check_len(z.len(), n)?;
                for (j, &zj) in z.iter().enumerate() {
                    m[(0, j + 1)] = -zj.conj();
                    m[(j + 1, 0)] = zj;
                }
            }
            (Family::QuaternionProjective(n), MCoords::ComplexPair(z, w)) => {
                self.check_len(z.len(), n)?;
                self.check_len(w.len(), n)?;
                let h = n + 1;
                for j in 0..n {
                    // A block: [[0, Z], [-t(conj Z), O]].
                    m[(0, j + 1)] = z[j];
                    m[(j + 1, 0)] = -z[j].conj();
                    // B block: [[0, W], [t(W), O]].
                    m[(0, h + j + 1)] = w[j];
                    m[(j + 1, h)] = w[j];
                    // Lower half: [[-conj B], [conj A]].
                    m[(h, j + 1)] = -w[j].conj();
                    m[(h + j + 1, 0)] = -w[j].conj();
                    m[(h, h + j + 1)] = z[j].conj();
                    m[(h + j + 1, h)] = -z[j];
                }
            }
            (Family::Euclidean(n), MCoords::Real(v)) => {
                self.check_len(v.len(), n)?;
                for (i, &vi) in v.iter().enumerate() {
                    m[(i, n)] = Complex64::new(vi, 0.0);
                }
            }
            _ => {
                return Err(Error::ShapeMismatch(format!(
                    "coordinate kind does not match family {:?}",
                    self.family
                )))
            }
        }
        AlgebraElement::new(m)
    }

    fn check_len(&self, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::ShapeMismatch(format!(
                "expected {want} chart coordinates, got {got}"
            )));
        }
        Ok(())
    }

    pub fn base_point(&self) -> HomogeneousPoint {
        let n = self.n();
        match self.family {
            Family::Sphere(_) => {
                let mut o = DVector::zeros(n + 1);
                o[0] = 1.0;
                HomogeneousPoint::Sphere(o)
            }
            Family::ComplexProjective(_) => {
                let mut o = DVector::zeros(n + 1);
                o[0] = Complex64::new(1.0, 0.0);
                HomogeneousPoint::ComplexProjective(o)
            }
            Family::QuaternionProjective(_) => {
                let mut o = vec![Quaternion::ZERO; n + 1];
                o[0] = Quaternion::ONE;
                HomogeneousPoint::QuaternionProjective(o)
            }
            Family::Euclidean(_) => HomogeneousPoint::Euclidean(DVector::zeros(n)),
        }
    }

    /// Projection pi: G -> G/K, the group element acting on the base point.
    pub fn project_point(&self, g: &GroupElement) -> Result<HomogeneousPoint> {
        let residual = g.constraint_residual();
        if residual > POINT_CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation {
                what: "group",
                residual,
                tol: POINT_CONSTRAINT_TOL,
            });
        }
        let m = g.matrix();
        let n = self.n();
        Ok(match self.family {
            Family::Sphere(_) => {
                HomogeneousPoint::Sphere(DVector::from_fn(n + 1, |i, _| m[(i, 0)].re))
            }
            Family::ComplexProjective(_) => {
                HomogeneousPoint::ComplexProjective(DVector::from_fn(n + 1, |i, _| m[(i, 0)]))
            }
            Family::QuaternionProjective(_) => {
                let h = n + 1;
                let q = (0..h)
                    .map(|i| Quaternion::from_complex_pair(m[(i, 0)], m[(i, h)]))
                    .collect();
                HomogeneousPoint::QuaternionProjective(q)
            }
            Family::Euclidean(_) => {
                HomogeneousPoint::Euclidean(DVector::from_fn(n, |i, _| m[(i, n)].re))
            }
        })
    }

    /// Exponential of a validated algebra element, tagged with the model's
    /// group constraint.
    pub fn exp(&self, x: &AlgebraElement) -> Result<GroupElement> {
        self.validate_algebra(x)?;
        Ok(expm(x, self.group_constraint()))
    }

    /// Action of a group element on a point representative: matrix-vector
    /// product for sphere and complex projective, quaternionic matrix-vector
    /// for quaternion projective, affine action for Euclidean type.
    pub fn act(&self, g: &GroupElement, p: &HomogeneousPoint) -> Result<HomogeneousPoint> {
        let m = g.matrix();
        let n = self.n();
        match (self.family, p) {
            (Family::Sphere(_), HomogeneousPoint::Sphere(v)) => {
                let cv = CMat::from_fn(n + 1, 1, |i, _| Complex64::new(v[i], 0.0));
                let out = m * cv;
                Ok(HomogeneousPoint::Sphere(DVector::from_fn(n + 1, |i, _| {
                    out[(i, 0)].re
                })))
            }
            (Family::ComplexProjective(_), HomogeneousPoint::ComplexProjective(v)) => {
                let cv = CMat::from_fn(n + 1, 1, |i, _| v[i]);
                let out = m * cv;
                Ok(HomogeneousPoint::ComplexProjective(DVector::from_fn(
                    n + 1,
                    |i, _| out[(i, 0)],
                )))
            }
            (Family::QuaternionProjective(_), HomogeneousPoint::QuaternionProjective(q)) => {
                Ok(HomogeneousPoint::QuaternionProjective(
                    self.apply_quaternion_vector(g, q)?,
                ))
            }
            (Family::Euclidean(_), HomogeneousPoint::Euclidean(v)) => {
                let mut out = DVector::zeros(n);
                for i in 0..n {
                    let mut acc = m[(i, n)].re;
                    for j in 0..n {
                        acc += m[(i, j)].re * v[j];
                    }
                    out[i] = acc;
                }
                Ok(HomogeneousPoint::Euclidean(out))
            }
            _ => Err(Error::ShapeMismatch(
                "point kind does not match the model".into(),
            )),
        }
    }

    /// Action of a group element on a quaternionic coordinate vector
    /// (quaternion projective model only): the matrix A + Bj applied on the
    /// left, leaving the right scalar gauge untouched.
    pub fn apply_quaternion_vector(
        &self,
        g: &GroupElement,
        q: &[Quaternion],
    ) -> Result<Vec<Quaternion>> {
        let n = match self.family {
            Family::QuaternionProjective(n) => n,
            _ => {
                return Err(Error::InvalidParameter(
                    "quaternion action only defined for the quaternion projective model".into(),
                ))
            }
        };
        let h = n + 1;
        if q.len() != h {
            return Err(Error::ShapeMismatch(format!(
                "expected {h} quaternion coordinates, got {}",
                q.len()
            )));
        }
        let m = g.matrix();
        let mut out = vec![Quaternion::ZERO; h];
        for i in 0..h {
            let mut acc = Quaternion::ZERO;
            for k in 0..h {
                let entry = Quaternion::from_complex_pair(m[(i, k)], m[(i, h + k)]);
                acc = acc + entry * q[k];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Random element of the ambient algebra, Frobenius-normalized.
    pub fn random_algebra_element(&self, rng: &mut impl Rng) -> AlgebraElement {
        let n = self.n();
        let x = match self.family {
            Family::Sphere(_) => {
                let raw = DMatrix::<f64>::from_fn(n + 1, n + 1, |_, _| rng.random_range(-1.0..1.0));
                AlgebraElement::from_real(&raw - raw.transpose()).unwrap()
            }
            Family::ComplexProjective(_) => {
                let raw = CMat::from_fn(n + 1, n + 1, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let skew = &raw - raw.adjoint();
                let trace = skew.trace() / Complex64::new((n + 1) as f64, 0.0);
                let traceless = skew - CMat::identity(n + 1, n + 1) * trace;
                AlgebraElement::new(traceless).unwrap()
            }
            Family::QuaternionProjective(_) => {
                let h = n + 1;
                let raw_a = CMat::from_fn(h, h, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let raw_b = CMat::from_fn(h, h, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let a = &raw_a - raw_a.adjoint();
                let b = &raw_b + raw_b.transpose();
                let mut m = CMat::zeros(2 * h, 2 * h);
                for i in 0..h {
                    for j in 0..h {
                        m[(i, j)] = a[(i, j)];
                        m[(i, h + j)] = b[(i, j)];
                        m[(h + i, j)] = -b[(i, j)].conj();
                        m[(h + i, h + j)] = a[(i, j)].conj();
                    }
                }
                AlgebraElement::new(m).unwrap()
            }
            Family::Euclidean(_) => {
                let raw = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
                let skew = &raw - raw.transpose();
                let mut m = CMat::zeros(n + 1, n + 1);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = Complex64::new(skew[(i, j)], 0.0);
                    }
                    m[(i, n)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
                }
                AlgebraElement::new(m).unwrap()
            }
        };
        let norm = x.norm();
        if norm > 0.0 {
            x.scale(1.0 / norm)
        } else {
            x
        }
    }

    /// Random element of the isotropy algebra k, Frobenius-normalized.
    pub fn random_isotropy_element(&self, rng: &mut impl Rng) -> AlgebraElement {
        let x = self.proj_k(&self.random_algebra_element(rng));
        let norm = x.norm();
        if norm > 1e-12 {
            x.scale(1.0 / norm)
        } else {
            x
        }
    }

    /// Random element of m, Frobenius-normalized.
    pub fn random_m_element(&self, rng: &mut impl Rng) -> AlgebraElement {
        let x = self.proj_m(&self.random_algebra_element(rng));
        let norm = x.norm();
        if norm > 1e-12 {
            x.scale(1.0 / norm)
        } else {
            x
        }
    }
}
