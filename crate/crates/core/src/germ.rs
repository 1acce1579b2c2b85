//! Germs of holomorphic maps of `C^d` fixing the origin, truncated at degree `N`.
//!
//! Composition is carried out by truncated substitution: each monomial `Z^j` of
//! the outer germ is replaced by the truncated product `B_1^{j_1} ... B_d^{j_d}`
//! of the inner components. The multivariate Faà di Bruno coefficients are
//! therefore never built explicitly; [`fdb_homogeneous_p`] reads them off the
//! same products.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{enumerate_multiindices, MultiIndex, TruncatedSeries};

pub type Matrix = DMatrix<Complex64>;

/// A linear part with `|det|` at or below this is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// A truncated germ `F = (F_1, ..., F_d)` with `F(0) = 0` and invertible `F'(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Germ {
    components: Vec<TruncatedSeries>,
    linear: Matrix,
}

fn linear_of(components: &[TruncatedSeries]) -> Matrix {
    let d = components.len();
    Matrix::from_fn(d, d, |i, k| components[i].coeff(&MultiIndex::unit(d, k)))
}

impl Germ {
    /// Builds a germ, rejecting mismatched shapes and singular linear parts.
    pub fn new(components: Vec<TruncatedSeries>) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::InvalidParameter("germ needs at least one component".into()));
        }
        let n = components[0].max_degree();
        for s in &components {
            if s.dims() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: s.dims(),
                });
            }
            if s.max_degree() != n {
                return Err(Error::DegreeMismatch {
                    left: n,
                    right: s.max_degree(),
                });
            }
        }
        let linear = linear_of(&components);
        let det = linear.determinant().norm();
        if !(det > SINGULARITY_THRESHOLD) {
            return Err(Error::SingularLinearPart { det });
        }
        Ok(Self { components, linear })
    }

    pub fn identity(dims: usize, max_degree: usize) -> Self {
        let components = (0..dims)
            .map(|i| TruncatedSeries::variable(dims, max_degree, i))
            .collect();
        Self {
            components,
            linear: Matrix::identity(dims, dims),
        }
    }

    /// The linear germ `Z ↦ M Z`.
    pub fn from_linear(m: &Matrix, max_degree: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidParameter("linear part must be square".into()));
        }
        let d = m.nrows();
        let components = (0..d)
            .map(|i| TruncatedSeries::from_terms(d, max_degree, (0..d).map(|k| (MultiIndex::unit(d, k), m[(i, k)]))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn max_degree(&self) -> usize {
        self.components[0].max_degree()
    }

    pub fn components(&self) -> &[TruncatedSeries] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TruncatedSeries {
        &self.components[i]
    }

    /// `F'(0)`, the matrix of degree-one coefficients.
    pub fn linear_part(&self) -> &Matrix {
        &self.linear
    }

    /// Coefficient `t^i_j`.
    pub fn coeff(&self, i: usize, j: &MultiIndex) -> Complex64 {
        self.components[i].coeff(j)
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_deviation(&self, other: &Germ) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                let mut diff = a.clone();
                diff.add_assign_unchecked(b, Complex64::new(-1.0, 0.0));
                diff.max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - id`.
    pub fn deviation_from_identity(&self) -> f64 {
        self.max_deviation(&Germ::identity(self.dims(), self.max_degree()))
    }

    fn check_compatible(&self, other: &Germ) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        if self.max_degree() != other.max_degree() {
            return Err(Error::DegreeMismatch {
                left: self.max_degree(),
                right: other.max_degree(),
            });
        }
        Ok(())
    }

    /// `self ∘ inner`, truncated at degree `N`.
    pub fn compose(&self, inner: &Germ) -> Result<Germ> {
        self.check_compatible(inner)?;
        let components = substitute(&self.components, &inner.components);
        let linear = &self.linear * &inner.linear;
        Ok(Germ { components, linear })
    }

    /// The compositional inverse up to degree `N`.
    ///
    /// Degree one is the matrix inverse. At degree `k` the unknown block `g_k`
    /// enters `f ∘ g` only through `A g_k`, so `g_k = -A^{-1} [f ∘ g_{<k}]_k`.
    pub fn invert(&self) -> Result<Germ> {
        let d = self.dims();
        let n = self.max_degree();
        let a_inv = self.linear.clone().try_inverse().ok_or(Error::SingularLinearPart {
            det: self.linear.determinant().norm(),
        })?;
        let mut g = Germ::from_linear(&a_inv, n)?;
        for k in 2..=n {
            let fg = substitute(&self.components, &g.components);
            let block = enumerate_multiindices(d, k);
            for j in &block {
                let rhs: Vec<Complex64> = (0..d).map(|i| fg[i].coeff(j)).collect();
                for i in 0..d {
                    let v: Complex64 = (0..d).map(|s| -a_inv[(i, s)] * rhs[s]).sum();
                    g.components[i].set(j, v)?;
                }
            }
        }
        Ok(g)
    }

    /// Drops every term of degree `>= k`; keeps the linear part.
    pub fn below_degree(&self, k: usize) -> Germ {
        Germ {
            components: self.components.iter().map(|s| s.below_degree(k)).collect(),
            linear: self.linear.clone(),
        }
    }

    /// Evaluates the truncated polynomial map at a point.
    pub fn evaluate(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|s| s.evaluate(z)).collect()
    }
}

/// Truncated products `B^j = B_1^{j_1} ... B_d^{j_d}`, memoized.
struct MonomialCache<'a> {
    inner: &'a [TruncatedSeries],
    products: HashMap<MultiIndex, TruncatedSeries>,
}

impl<'a> MonomialCache<'a> {
    fn new(inner: &'a [TruncatedSeries]) -> Self {
        Self {
            inner,
            products: HashMap::new(),
        }
    }

    fn get(&mut self, j: &MultiIndex) -> &TruncatedSeries {
        if !self.products.contains_key(j) {
            let i = j.first_nonzero().expect("monomial of positive degree");
            let prev = j.decrement(i).expect("entry is positive");
            let inner = self.inner;
            let value = if prev.degree() == 0 {
                inner[i].clone()
            } else {
                self.get(&prev).multiply_unchecked(&inner[i])
            };
            self.products.insert(j.clone(), value);
        }
        &self.products[j]
    }
}

fn substitute(outer: &[TruncatedSeries], inner: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let d = inner.len();
    let n = inner[0].max_degree();
    let mut cache = MonomialCache::new(inner);
    outer
        .iter()
        .map(|a| {
            let mut out = TruncatedSeries::zero(d, n);
            for (j, v) in a.terms() {
                out.add_assign_unchecked(cache.get(j), *v);
            }
            out
        })
        .collect()
}

/// The Faà di Bruno coefficient `P(j*, j){B}`: the coefficient of `Z^{j*}` in
/// `B^j = B_1^{j_1} ... B_d^{j_d}`, i.e. the factor multiplying `a_j` in the
/// `j*` coefficient of `A ∘ B`.
///
/// Requires `1 < |j| <= |j*| <= N`. The index `j` need not be componentwise
/// below `j*`: in several variables a mixed monomial of `B` can feed a pure
/// power of `Z`.
pub fn fdb_homogeneous_p(j_star: &MultiIndex, j: &MultiIndex, b: &Germ) -> Result<Complex64> {
    let d = b.dims();
    if j_star.dims() != d || j.dims() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: j_star.dims().max(j.dims()),
        });
    }
    if j.degree() <= 1 || j.degree() > j_star.degree() || j_star.degree() > b.max_degree() {
        return Err(Error::Precondition(format!(
            "need 1 < |j| <= |j*| <= N, got j = {j}, j* = {j_star}, N = {}",
            b.max_degree()
        )));
    }
    let mut cache = MonomialCache::new(&b.components);
    Ok(cache.get(j).coeff(j_star))
}

#[derive(Serialize, Deserialize)]
struct GermRecord {
    dims: usize,
    max_degree: usize,
    components: Vec<TruncatedSeries>,
    /// Row-major `[re, im]` entries of `F'(0)`.
    linear_part: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Germ {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let d = self.dims();
        GermRecord {
            dims: d,
            max_degree: self.max_degree(),
            components: self.components.clone(),
            linear_part: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|k| [self.linear[(i, k)].re, self.linear[(i, k)].im])
                        .collect()
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Germ {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = GermRecord::deserialize(deserializer)?;
        if rec.components.len() != rec.dims {
            return Err(D::Error::custom("component count differs from dims"));
        }
        let germ = Germ::new(rec.components).map_err(D::Error::custom)?;
        if germ.max_degree() != rec.max_degree {
            return Err(D::Error::custom("max_degree differs from components"));
        }
        for (i, row) in rec.linear_part.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                if (Complex64::new(e[0], e[1]) - germ.linear[(i, k)]).norm() > 0.0 {
                    return Err(D::Error::custom("linear_part disagrees with degree-1 terms"));
                }
            }
        }
        Ok(germ)
    }
}
