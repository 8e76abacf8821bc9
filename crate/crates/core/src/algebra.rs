//! Elements of the finite-dimensional C*-algebras the library can represent.
//!
//! Three algebras are supported:
//!
//! * `Scalar`: the real line with the usual order.
//! * `Vector(n)`: continuous functions on `n` points, i.e. real `n`-tuples
//!   with componentwise product and componentwise order.
//! * `Matrix(n)`: `n x n` complex matrices with conjugate transpose as the
//!   involution and the Loewner order on self-adjoint elements.
//!
//! Positivity is decided from the spectrum with a relative slack carried by
//! [`OrderTolerance`], since floating point cannot decide `sigma(x) >= 0`
//! exactly.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Scalar,
    Vector,
    Matrix,
}

/// Kind plus dimension. Scalars always have `n == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub kind: Kind,
    pub n: usize,
}

impl Shape {
    pub const SCALAR: Shape = Shape {
        kind: Kind::Scalar,
        n: 1,
    };

    pub fn vector(n: usize) -> Self {
        Shape {
            kind: Kind::Vector,
            n,
        }
    }

    pub fn matrix(n: usize) -> Self {
        Shape {
            kind: Kind::Matrix,
            n,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Scalar => write!(f, "scalar"),
            Kind::Vector => write!(f, "vector({})", self.n),
            Kind::Matrix => write!(f, "matrix({})", self.n),
        }
    }
}

/// Slack below which an eigenvalue (or vector entry) still counts as
/// nonnegative. The effective slack is `eps * max(1, scale)` where `scale` is
/// the norm of the operands involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderTolerance {
    eps: f64,
}

impl OrderTolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidTolerance(eps));
        }
        Ok(OrderTolerance { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn slack(&self, scale: f64) -> f64 {
        self.eps * scale.max(1.0)
    }
}

impl Default for OrderTolerance {
    fn default() -> Self {
        OrderTolerance {
            eps: Self::DEFAULT_EPS,
        }
    }
}

/// A member of one of the representable unital C*-algebras.
///
/// Matrix data is stored exactly as given; self-adjointness is checked on
/// demand by [`AlgebraElement::is_self_adjoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Wire", into = "Wire")]
pub enum AlgebraElement {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(DMatrix<C64>),
}

impl AlgebraElement {
    pub fn zero(shape: Shape) -> Self {
        match shape.kind {
            Kind::Scalar => AlgebraElement::Scalar(0.0),
            Kind::Vector => AlgebraElement::Vector(vec![0.0; shape.n]),
            Kind::Matrix => AlgebraElement::Matrix(DMatrix::zeros(shape.n, shape.n)),
        }
    }

    pub fn unit(shape: Shape) -> Self {
        match shape.kind {
            Kind::Scalar => AlgebraElement::Scalar(1.0),
            Kind::Vector => AlgebraElement::Vector(vec![1.0; shape.n]),
            Kind::Matrix => AlgebraElement::Matrix(DMatrix::identity(shape.n, shape.n)),
        }
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        AlgebraElement::Matrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(entries[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Real matrix from rows.
    pub fn real_matrix(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidElement(
                "matrix rows must form a square".into(),
            ));
        }
        Ok(AlgebraElement::Matrix(DMatrix::from_fn(n, n, |i, j| {
            C64::new(rows[i][j], 0.0)
        })))
    }

    pub fn shape(&self) -> Shape {
        match self {
            AlgebraElement::Scalar(_) => Shape::SCALAR,
            AlgebraElement::Vector(v) => Shape::vector(v.len()),
            AlgebraElement::Matrix(m) => Shape::matrix(m.nrows()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            AlgebraElement::Scalar(v) => v.is_finite(),
            AlgebraElement::Vector(v) => v.iter().all(|x| x.is_finite()),
            AlgebraElement::Matrix(m) => m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        let (left, right) = (self.shape(), other.shape());
        if left != right {
            return Err(Error::ShapeMismatch { left, right });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_shape(other)?;
        Ok(match (self, other) {
            (AlgebraElement::Scalar(a), AlgebraElement::Scalar(b)) => {
                AlgebraElement::Scalar(f(*a, *b))
            }
            (AlgebraElement::Vector(a), AlgebraElement::Vector(b)) => {
                AlgebraElement::Vector(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            }
            (AlgebraElement::Matrix(a), AlgebraElement::Matrix(b)) => {
                AlgebraElement::Matrix(a.zip_map(b, |x, y| C64::new(f(x.re, y.re), f(x.im, y.im))))
            }
            _ => unreachable!("shapes already checked"),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Algebra product: componentwise for vectors, matrix product otherwise.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(match (self, other) {
            (AlgebraElement::Matrix(a), AlgebraElement::Matrix(b)) => AlgebraElement::Matrix(a * b),
            _ => self.zip_with(other, |a, b| a * b)?,
        })
    }

    pub fn scale(&self, t: f64) -> Self {
        match self {
            AlgebraElement::Scalar(v) => AlgebraElement::Scalar(t * v),
            AlgebraElement::Vector(v) => AlgebraElement::Vector(v.iter().map(|x| t * x).collect()),
            AlgebraElement::Matrix(m) => AlgebraElement::Matrix(m.map(|z| z * t)),
        }
    }

    pub fn involution(&self) -> Self {
        match self {
            AlgebraElement::Matrix(m) => AlgebraElement::Matrix(m.adjoint()),
            other => other.clone(),
        }
    }

    /// Scalar: `|x|`; vector: sup norm; matrix: largest singular value.
    pub fn norm(&self) -> f64 {
        match self {
            AlgebraElement::Scalar(v) => v.abs(),
            AlgebraElement::Vector(v) => v.iter().fold(0.0, |acc, x| acc.max(x.abs())),
            AlgebraElement::Matrix(m) => {
                if m.is_empty() {
                    return 0.0;
                }
                m.clone().singular_values().max()
            }
        }
    }

    /// `norm(a - a*)`; zero for scalars and vectors.
    pub fn asymmetry(&self) -> f64 {
        match self {
            AlgebraElement::Matrix(m) => AlgebraElement::Matrix(m - m.adjoint()).norm(),
            _ => 0.0,
        }
    }

    pub fn is_self_adjoint(&self, tol: OrderTolerance) -> bool {
        self.asymmetry() <= tol.slack(self.norm())
    }

    /// Ascending spectrum. For matrices this is the spectrum of the Hermitian
    /// part, after checking that the anti-Hermitian part is within tolerance.
    pub fn spectrum(&self, tol: OrderTolerance) -> Result<Vec<f64>> {
        match self {
            AlgebraElement::Scalar(v) => Ok(vec![*v]),
            AlgebraElement::Vector(v) => {
                let mut s = v.clone();
                s.sort_by(f64::total_cmp);
                Ok(s)
            }
            AlgebraElement::Matrix(m) => {
                let asymmetry = self.asymmetry();
                if asymmetry > tol.slack(self.norm()) {
                    return Err(Error::NotSelfAdjoint { asymmetry });
                }
                let mut s: Vec<f64> = hermitian_part(m)
                    .symmetric_eigenvalues()
                    .iter()
                    .copied()
                    .collect();
                s.sort_by(f64::total_cmp);
                Ok(s)
            }
        }
    }

    fn min_spectrum(&self, tol: OrderTolerance) -> Option<f64> {
        let s = self.spectrum(tol).ok()?;
        Some(s.first().copied().unwrap_or(0.0))
    }

    /// `theta <= a`: self-adjoint with spectrum bounded below by `-slack`.
    pub fn is_positive(&self, tol: OrderTolerance) -> bool {
        self.is_positive_at_scale(tol, self.norm())
    }

    pub(crate) fn is_positive_at_scale(&self, tol: OrderTolerance, scale: f64) -> bool {
        match self.min_spectrum(tol) {
            Some(min) => min >= -tol.slack(scale),
            None => false,
        }
    }

    /// `self <= other` in the order cone, i.e. `other - self` is positive.
    ///
    /// The slack is relative to the larger operand norm, so a comparison of
    /// two nearly equal large elements is not decided by cancellation noise.
    pub fn leq(&self, other: &Self, tol: OrderTolerance) -> Result<bool> {
        let diff = other.checked_sub(self)?;
        let scale = self.norm().max(other.norm()).max(diff.norm());
        Ok(diff.is_positive_at_scale(tol, scale))
    }

    /// Smallest eigenvalue of `other - self`; negative values measure how far
    /// `self <= other` is from holding. `None` if the difference is not
    /// self-adjoint.
    pub fn order_margin(&self, other: &Self, tol: OrderTolerance) -> Result<Option<f64>> {
        let diff = other.checked_sub(self)?;
        Ok(diff.min_spectrum(tol))
    }

    pub fn sqrt_positive(&self, tol: OrderTolerance) -> Result<Self> {
        let slack = tol.slack(self.norm());
        let root = |v: f64| -> Result<f64> {
            if v < -slack {
                Err(Error::NotPositive { min_eigenvalue: v })
            } else {
                Ok(v.max(0.0).sqrt())
            }
        };
        match self {
            AlgebraElement::Scalar(v) => Ok(AlgebraElement::Scalar(root(*v)?)),
            AlgebraElement::Vector(v) => Ok(AlgebraElement::Vector(
                v.iter().map(|x| root(*x)).collect::<Result<_>>()?,
            )),
            AlgebraElement::Matrix(m) => {
                let asymmetry = self.asymmetry();
                if asymmetry > slack {
                    return Err(Error::NotSelfAdjoint { asymmetry });
                }
                let eig = hermitian_part(m).symmetric_eigen();
                let roots: Vec<f64> = eig
                    .eigenvalues
                    .iter()
                    .map(|l| root(*l))
                    .collect::<Result<_>>()?;
                let d =
                    DVector::from_iterator(roots.len(), roots.iter().map(|r| C64::new(*r, 0.0)));
                let u = &eig.eigenvectors;
                let r = u * DMatrix::from_diagonal(&d) * u.adjoint();
                Ok(AlgebraElement::Matrix(hermitian_part(&r)))
            }
        }
    }

    /// `|a| = (a* a)^(1/2)`.
    pub fn abs_element(&self) -> Self {
        match self {
            AlgebraElement::Scalar(v) => AlgebraElement::Scalar(v.abs()),
            AlgebraElement::Vector(v) => {
                AlgebraElement::Vector(v.iter().map(|x| x.abs()).collect())
            }
            AlgebraElement::Matrix(_) => {
                let gram = self
                    .involution()
                    .checked_mul(self)
                    .expect("a* and a share a shape");
                // a* a is positive by construction, so only rounding can push an
                // eigenvalue below zero; an unbounded slack clamps it.
                gram.sqrt_positive(OrderTolerance { eps: f64::INFINITY })
                    .expect("gram matrix is self-adjoint")
            }
        }
    }

    /// Entry accessor for vectors and the real diagonal of matrices.
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            AlgebraElement::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<C64>> {
        match self {
            AlgebraElement::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            AlgebraElement::Scalar(v) => Some(*v),
            _ => None,
        }
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serde_json::to_string(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => Err(fmt::Error),
        }
    }
}

/// Text form: `{"kind":"matrix","n":2,"re":[[..]],"im":[[..]]}`, with
/// `re` a number for scalars and a list for vectors.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Wire {
    Scalar {
        n: usize,
        re: f64,
    },
    Vector {
        n: usize,
        re: Vec<f64>,
    },
    Matrix {
        n: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

impl From<AlgebraElement> for Wire {
    fn from(a: AlgebraElement) -> Self {
        match a {
            AlgebraElement::Scalar(re) => Wire::Scalar { n: 1, re },
            AlgebraElement::Vector(re) => Wire::Vector { n: re.len(), re },
            AlgebraElement::Matrix(m) => {
                let n = m.nrows();
                let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
                    (0..n)
                        .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                        .collect()
                };
                Wire::Matrix {
                    n,
                    re: rows(|z| z.re),
                    im: rows(|z| z.im),
                }
            }
        }
    }
}

impl TryFrom<Wire> for AlgebraElement {
    type Error = Error;

    fn try_from(w: Wire) -> Result<Self> {
        match w {
            Wire::Scalar { n, re } => {
                if n != 1 {
                    return Err(Error::InvalidElement(format!(
                        "scalar must have n = 1, got {n}"
                    )));
                }
                Ok(AlgebraElement::Scalar(re))
            }
            Wire::Vector { n, re } => {
                if n == 0 || re.len() != n {
                    return Err(Error::InvalidElement(format!(
                        "vector declares n = {n} but has {} entries",
                        re.len()
                    )));
                }
                Ok(AlgebraElement::Vector(re))
            }
            Wire::Matrix { n, re, im } => {
                let square =
                    |rows: &[Vec<f64>]| rows.len() == n && rows.iter().all(|r| r.len() == n);
                if n == 0 || !square(&re) || !square(&im) {
                    return Err(Error::InvalidElement(format!(
                        "matrix parts must be {n} x {n}"
                    )));
                }
                Ok(AlgebraElement::Matrix(DMatrix::from_fn(n, n, |i, j| {
                    C64::new(re[i][j], im[i][j])
                })))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> OrderTolerance {
        OrderTolerance::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_product() {
        let p = AlgebraElement::diag(&[1.0, 2.0])
            .checked_mul(&AlgebraElement::diag(&[3.0, 4.0]))
            .unwrap();
        assert_eq!(p, AlgebraElement::diag(&[3.0, 8.0]));
    }

    #[test]
    fn involution_is_conjugate_transpose() {
        let m = AlgebraElement::Matrix(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
        ));
        let expected = AlgebraElement::Matrix(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)],
        ));
        assert_eq!(m.involution(), expected);
        assert_eq!(m.involution().involution(), m);
    }

    #[test]
    fn vector_product_is_componentwise() {
        let a = AlgebraElement::Vector(vec![1.0, -2.0, 3.0]);
        let b = AlgebraElement::Vector(vec![2.0, 2.0, 0.5]);
        assert_eq!(
            a.checked_mul(&b).unwrap(),
            AlgebraElement::Vector(vec![2.0, -4.0, 1.5])
        );
    }

    #[test]
    fn mismatch_is_an_error() {
        let a = AlgebraElement::Vector(vec![1.0, 2.0]);
        let b = AlgebraElement::Vector(vec![1.0, 2.0, 3.0]);
        assert_eq!(
            a.checked_add(&b),
            Err(Error::ShapeMismatch {
                left: Shape::vector(2),
                right: Shape::vector(3)
            })
        );
        assert!(a.leq(&AlgebraElement::Scalar(1.0), tol()).is_err());
        assert!(AlgebraElement::diag(&[1.0])
            .checked_mul(&AlgebraElement::diag(&[1.0, 2.0]))
            .is_err());
    }

    #[test]
    fn spectra() {
        assert_eq!(
            AlgebraElement::diag(&[2.0, 5.0]).spectrum(tol()).unwrap(),
            vec![2.0, 5.0]
        );
        let swap = AlgebraElement::real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = swap.spectrum(tol()).unwrap();
        assert!((s[0] + 1.0).abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
        assert_eq!(
            AlgebraElement::Vector(vec![3.0, 1.0, 2.0])
                .spectrum(tol())
                .unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let m = AlgebraElement::real_matrix(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        match m.spectrum(tol()) {
            Err(Error::NotSelfAdjoint { asymmetry }) => assert!((asymmetry - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(!m.is_positive(tol()));
    }

    #[test]
    fn positivity() {
        let a = AlgebraElement::real_matrix(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let b = AlgebraElement::real_matrix(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(a.is_positive(tol()));
        assert!(!b.is_positive(tol()));
        assert!(AlgebraElement::zero(Shape::matrix(3)).is_positive(tol()));
        assert!(AlgebraElement::zero(Shape::vector(2)).is_positive(tol()));
    }

    #[test]
    fn order() {
        let t = tol();
        assert!(AlgebraElement::diag(&[1.0, 1.0])
            .leq(&AlgebraElement::diag(&[2.0, 3.0]), t)
            .unwrap());
        assert!(!AlgebraElement::Vector(vec![0.5, 2.0])
            .leq(&AlgebraElement::Vector(vec![1.0, 1.0]), t)
            .unwrap());
        let a = AlgebraElement::real_matrix(&[&[1.0, 0.3], &[0.3, -2.0]]).unwrap();
        assert!(a.leq(&a, t).unwrap());
    }

    #[test]
    fn norms() {
        let a = AlgebraElement::diag(&[0.5, 0.25]);
        assert_eq!(a.norm(), 0.5);
        assert!(a
            .leq(&AlgebraElement::unit(Shape::matrix(2)), tol())
            .unwrap());
        assert_eq!(AlgebraElement::Vector(vec![3.0, -4.0]).norm(), 4.0);
        assert_eq!(AlgebraElement::zero(Shape::matrix(2)).norm(), 0.0);
        assert_eq!(AlgebraElement::Scalar(-2.5).norm(), 2.5);
    }

    #[test]
    fn roots_and_absolute_values() {
        let r = AlgebraElement::diag(&[4.0, 9.0])
            .sqrt_positive(tol())
            .unwrap();
        assert!(
            r.checked_sub(&AlgebraElement::diag(&[2.0, 3.0]))
                .unwrap()
                .norm()
                < 1e-12
        );
        assert_eq!(
            AlgebraElement::Scalar(-3.0).abs_element(),
            AlgebraElement::Scalar(3.0)
        );
        let nil = AlgebraElement::real_matrix(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let abs = nil.abs_element();
        assert!(
            abs.checked_sub(&AlgebraElement::diag(&[0.0, 2.0]))
                .unwrap()
                .norm()
                < 1e-12
        );
    }

    #[test]
    fn sqrt_rejects_negative() {
        match AlgebraElement::diag(&[1.0, -0.5]).sqrt_positive(tol()) {
            Err(Error::NotPositive { min_eigenvalue }) => {
                assert!((min_eigenvalue + 0.5).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(AlgebraElement::Scalar(-1.0).sqrt_positive(tol()).is_err());
    }

    #[test]
    fn wire_format() {
        let m = AlgebraElement::Matrix(DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)],
        ));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"matrix","n":2,"re":[[1.0,0.0],[0.0,2.0]],"im":[[0.0,1.0],[-1.0,0.0]]}"#
        );
        assert_eq!(serde_json::from_str::<AlgebraElement>(&s).unwrap(), m);
        assert_eq!(
            serde_json::to_string(&AlgebraElement::Vector(vec![1.0, 2.5])).unwrap(),
            r#"{"kind":"vector","n":2,"re":[1.0,2.5]}"#
        );
        assert!(
            serde_json::from_str::<AlgebraElement>(r#"{"kind":"vector","n":3,"re":[1.0]}"#)
                .is_err()
        );
        assert!(
            serde_json::from_str::<AlgebraElement>(r#"{"kind":"scalar","n":2,"re":1.0}"#).is_err()
        );
    }

    #[test]
    fn negative_tolerance_rejected() {
        assert!(OrderTolerance::new(-1e-3).is_err());
        assert!(OrderTolerance::new(f64::NAN).is_err());
        assert_eq!(OrderTolerance::new(0.0).unwrap().slack(5.0), 0.0);
    }
}
