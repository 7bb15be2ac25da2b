//! Dense small-matrix Lie algebra kernel.
//!
//! Elements of all four ambient algebras (so, su, sp, affine) are stored as
//! complex square matrices; real algebras are the imaginary-part-zero case.
//! Provides the commutator bracket, a scaling-and-squaring Pade matrix
//! exponential, and the quaternion-to-complex embedding used by the Sp(n+1)
//! model.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

/// Element of a matrix Lie algebra: an N x N complex matrix.
///
/// Construction rejects non-finite entries; all operations are pure and the
/// value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    mat: CMat,
}

impl AlgebraElement {
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "algebra element must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !mat.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: CMat::zeros(dim, dim),
        }
    }

    pub fn from_real(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(mat.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    /// Frobenius norm. This is the norm used for every residual magnitude
    /// and drift value in the crate.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(c, 0.0),
        }
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        Self { mat: &self.mat * c }
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement { mat: -&self.mat }
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: f64) -> AlgebraElement {
        self.scale(rhs)
    }
}

/// Commutator [X, Y] = XY - YX.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    x.check_dims(y)?;
    Ok(AlgebraElement {
        mat: &x.mat * &y.mat - &y.mat * &x.mat,
    })
}

/// Which defining constraint a group element is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupConstraint {
    /// t(g) g = I, real entries.
    Orthogonal,
    /// conj(t(g)) g = I and det g = 1.
    SpecialUnitary,
    /// t(g) J g = J with J = [[0, I], [-I, 0]], g unitary.
    SymplecticUnitary,
    /// bottom row (0, ..., 0, 1).
    AffineEuclidean,
}

/// Element of a matrix Lie group, tagged with its defining constraint.
#[derive(Debug, Clone)]
pub struct GroupElement {
    mat: CMat,
    constraint: GroupConstraint,
}

impl GroupElement {
    /// Constructs after checking the constraint residual against `tol`.
    pub fn try_new(mat: CMat, constraint: GroupConstraint, tol: f64) -> Result<Self> {
        let g = Self { mat, constraint };
        let residual = g.constraint_residual();
        if residual > tol {
            return Err(Error::ConstraintViolation {
                what: "group",
                residual,
                tol,
            });
        }
        Ok(g)
    }

    /// Constructs without checking; used for drift measurements on
    /// deliberately perturbed matrices.
    pub fn new_unchecked(mat: CMat, constraint: GroupConstraint) -> Self {
        Self { mat, constraint }
    }

    pub fn identity(dim: usize, constraint: GroupConstraint) -> Self {
        Self {
            mat: CMat::identity(dim, dim),
            constraint,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn constraint(&self) -> GroupConstraint {
        self.constraint
    }

    pub fn inverse(&self) -> Self {
        let n = self.dim();
        let inv = self
            .mat
            .clone()
            .lu()
            .solve(&CMat::identity(n, n))
            .expect("group element is invertible");
        Self {
            mat: inv,
            constraint: self.constraint,
        }
    }

    /// Frobenius norm of the defining-constraint residual.
    pub fn constraint_residual(&self) -> f64 {
        let n = self.dim();
        let g = &self.mat;
        match self.constraint {
            GroupConstraint::Orthogonal => {
                (g.transpose() * g - CMat::identity(n, n)).norm()
            }
            GroupConstraint::SpecialUnitary => {
                let unitary = (g.adjoint() * g - CMat::identity(n, n)).norm();
                let det = g.determinant();
                unitary + (det - Complex64::new(1.0, 0.0)).norm()
            }
            GroupConstraint::SymplecticUnitary => {
                let j = symplectic_form(n);
                (g.transpose() * &j * g - &j).norm()
            }
            GroupConstraint::AffineEuclidean => {
                let mut residual = 0.0f64;
                for col in 0..n {
                    let expected = if col == n - 1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::ZERO
                    };
                    residual += (g[(n - 1, col)] - expected).norm_sqr();
                }
                residual.sqrt()
            }
        }
    }
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement {
            mat: &self.mat * &rhs.mat,
            constraint: self.constraint,
        }
    }
}

/// The symplectic form J = [[0, I], [-I, 0]] of even dimension n.
pub fn symplectic_form(n: usize) -> CMat {
    assert!(n.is_multiple_of(2), "symplectic form needs even dimension");
    let half = n / 2;
    let mut j = CMat::zeros(n, n);
    for i in 0..half {
        j[(i, half + i)] = Complex64::new(1.0, 0.0);
        j[(half + i, i)] = Complex64::new(-1.0, 0.0);
    }
    j
}

/// Matrix exponential of an algebra element, tagged with the group
/// constraint of the algebra's ambient family.
pub fn expm(x: &AlgebraElement, constraint: GroupConstraint) -> GroupElement {
    GroupElement {
        mat: expm_raw(&x.mat),
        constraint,
    }
}

// Pade(13) coefficients, ascending.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Scaling-and-squaring matrix exponential with the order-13 Pade
/// approximant. Total for finite input; matrices here are small (N <= ~10)
/// so the single high-order approximant is used throughout.
pub fn expm_raw(a: &CMat) -> CMat {
    let n = a.nrows();
    let theta13 = 5.371920351148152;

    // 1-norm (max column sum of moduli) controls the scaling.
    let one_norm = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);

    let squarings = if one_norm > theta13 {
        (one_norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(squarings as i32), 0.0);

    let ident = CMat::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    let w1 = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let w2 = &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &ident * c(1);
    let z1 = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let z2 = &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &ident * c(0);

    let u = &scaled * (&a6 * &w1 + &w2);
    let v = &a6 * &z1 + &z2;

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Pade denominator is invertible");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Quaternion w + x i + y j + z k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// q = z1 + z2 j with z1 = w + x i, z2 = y + z i.
    pub fn from_complex_pair(z1: Complex64, z2: Complex64) -> Self {
        Self::new(z1.re, z1.im, z2.re, z2.im)
    }

    /// The pair (z1, z2) with q = z1 + z2 j.
    pub fn complex_pair(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.w, self.x),
            Complex64::new(self.y, self.z),
        )
    }

    pub fn conj(&self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.w * c, self.x * c, self.y * c, self.z * c)
    }

    pub fn real(&self) -> f64 {
        self.w
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w + rhs.w,
            self.x + rhs.x,
            self.y + rhs.y,
            self.z + rhs.z,
        )
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w - rhs.w,
            self.x - rhs.x,
            self.y - rhs.y,
            self.z - rhs.z,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, r: Quaternion) -> Quaternion {
        // Hamilton product; i^2 = j^2 = k^2 = -1, ij = k.
        Quaternion::new(
            self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        )
    }
}

/// Embedding of q = z1 + z2 j as the 2x2 complex matrix
/// [[z1, z2], [-conj(z2), conj(z1)]]. Multiplicative homomorphism.
pub fn quat_embed(q: &Quaternion) -> AlgebraElement {
    let (z1, z2) = q.complex_pair();
    let mut mat = CMat::zeros(2, 2);
    mat[(0, 0)] = z1;
    mat[(0, 1)] = z2;
    mat[(1, 0)] = -z2.conj();
    mat[(1, 1)] = z1.conj();
    AlgebraElement { mat }
}
