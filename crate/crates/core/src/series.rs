//! Multi-indices and truncated multivariate complex power series.
//!
//! A [`TruncatedSeries`] holds the coefficients of a series in `d` complex
//! variables for monomials of total degree `1..=N`. The constant term is
//! always zero: every series in this crate is a component of a map fixing the
//! origin. Coefficients live in a sparse map whose iteration order is graded
//! lexicographic, so serialization and degree slicing are reproducible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Exponent vector `(j_1, ..., j_d)` of the monomial `z_1^{j_1} ... z_d^{j_d}`.
///
/// Ordering is graded lexicographic: lower total degree first, then larger
/// leading exponents first, so `(3,0) < (2,1) < (1,2) < (0,3)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new(entries: &[u32]) -> Self {
        Self(SmallVec::from_slice(entries))
    }

    /// The unit index `e_i` in `d` variables.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut e = SmallVec::from_elem(0, d);
        e[i] = 1;
        Self(e)
    }

    pub fn zero(d: usize) -> Self {
        Self(SmallVec::from_elem(0, d))
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Componentwise order `self ⪯ other`.
    pub fn preceq(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Strict componentwise order: `⪯` and different.
    pub fn prec(&self, other: &Self) -> bool {
        self.preceq(other) && self != other
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - e_i`, if that index is non-negative.
    pub fn decrement(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut out = self.0.clone();
        out[i] -= 1;
        Some(Self(out))
    }

    /// Index of the first non-zero entry.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// Evaluates the monomial `Z^j` at a point.
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, &zi)| acc * zi.powu(e))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices in `d` variables of total degree `s`, in graded
/// lexicographic order. There are `(s+d-1)! / (s! (d-1)!)` of them.
pub fn enumerate_multiindices(d: usize, s: usize) -> Vec<MultiIndex> {
    assert!(d >= 1, "at least one variable");
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fill(&mut current, 0, s as u32, &mut out);
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// All multi-indices with `lo <= |j| <= hi`, graded lexicographic.
pub fn multiindices_between(d: usize, lo: usize, hi: usize) -> Vec<MultiIndex> {
    (lo..=hi).flat_map(|s| enumerate_multiindices(d, s)).collect()
}

/// Hölder data `(C, α, R)`: a constant, an exponent and a polydisc radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub c: f64,
    pub alpha: f64,
    pub r: f64,
}

impl HolderParams {
    pub fn new(c: f64, alpha: f64, r: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} not in (0,1]")));
        }
        if !(c >= 0.0) {
            return Err(Error::InvalidParameter(format!("C = {c} is negative")));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("R = {r} is not positive")));
        }
        Ok(Self { c, alpha, r })
    }

    /// Coefficient-level constant `C / R^{|j|}`.
    pub fn coefficient_constant(&self, degree: usize) -> f64 {
        self.c / self.r.powi(degree as i32)
    }
}

/// A power series in `dims` variables truncated above total degree
/// `max_degree`, with zero constant term.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries {
    dims: usize,
    max_degree: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl TruncatedSeries {
    pub fn zero(dims: usize, max_degree: usize) -> Self {
        assert!(dims >= 1 && max_degree >= 1, "need d >= 1 and N >= 1");
        Self {
            dims,
            max_degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The coordinate function `z_i`.
    pub fn variable(dims: usize, max_degree: usize, i: usize) -> Self {
        let mut s = Self::zero(dims, max_degree);
        s.coeffs.insert(MultiIndex::unit(dims, i), Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_terms<I>(dims: usize, max_degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zero(dims, max_degree);
        for (j, v) in terms {
            s.add_to(&j, v)?;
        }
        Ok(s)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn coeff(&self, j: &MultiIndex) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    fn check_index(&self, j: &MultiIndex) -> Result<()> {
        if j.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                left: self.dims,
                right: j.dims(),
            });
        }
        let deg = j.degree();
        if deg == 0 || deg > self.max_degree {
            return Err(Error::InvalidParameter(format!(
                "index {j} outside degrees 1..={}",
                self.max_degree
            )));
        }
        Ok(())
    }

    pub fn set(&mut self, j: &MultiIndex, v: Complex64) -> Result<()> {
        self.check_index(j)?;
        if v == Complex64::default() {
            self.coeffs.remove(j);
        } else {
            self.coeffs.insert(j.clone(), v);
        }
        Ok(())
    }

    pub fn add_to(&mut self, j: &MultiIndex, v: Complex64) -> Result<()> {
        let cur = self.coeff(j);
        self.set(j, cur + v)
    }

    /// Stored (non-zero) terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest coefficient modulus; 0 for the zero series.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        if self.max_degree != other.max_degree {
            return Err(Error::DegreeMismatch {
                left: self.max_degree,
                right: other.max_degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other, Complex64::new(1.0, 0.0));
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other, Complex64::new(-1.0, 0.0));
        Ok(out)
    }

    /// `self += factor * other`, assuming compatible shapes.
    pub(crate) fn add_assign_unchecked(&mut self, other: &Self, factor: Complex64) {
        for (j, v) in &other.coeffs {
            let e = self.coeffs.entry(j.clone()).or_default();
            *e += factor * v;
            if *e == Complex64::default() {
                self.coeffs.remove(j);
            }
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.dims, self.max_degree);
        for (j, v) in &self.coeffs {
            let w = factor * v;
            if w != Complex64::default() {
                out.coeffs.insert(j.clone(), w);
            }
        }
        out
    }

    /// Cauchy product, discarding every term of total degree above `N`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.multiply_unchecked(other))
    }

    pub(crate) fn multiply_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dims, self.max_degree);
        for (ja, va) in &self.coeffs {
            let da = ja.degree();
            if da >= self.max_degree {
                // every term of `other` has degree >= 1
                continue;
            }
            for (jb, vb) in &other.coeffs {
                if da + jb.degree() > self.max_degree {
                    continue;
                }
                *out.coeffs.entry(ja.add(jb)).or_default() += va * vb;
            }
        }
        out.coeffs.retain(|_, v| *v != Complex64::default());
        out
    }

    /// Only the terms of total degree exactly `k`.
    pub fn degree_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dims, self.max_degree);
        out.coeffs = self
            .coeffs
            .iter()
            .filter(|(j, _)| j.degree() == k)
            .map(|(j, v)| (j.clone(), *v))
            .collect();
        out
    }

    /// Only the terms of total degree strictly below `k`.
    pub fn below_degree(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dims, self.max_degree);
        out.coeffs = self
            .coeffs
            .iter()
            .filter(|(j, _)| j.degree() < k)
            .map(|(j, v)| (j.clone(), *v))
            .collect();
        out
    }

    /// Evaluates the polynomial at a point of `C^d`.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.coeffs.iter().map(|(j, v)| v * j.monomial(z)).sum()
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries(d={}, N={}) {{", self.dims, self.max_degree)?;
        for (n, (j, v)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{j}: {v}")?;
        }
        write!(f, "}}")
    }
}

/// `(Σ_i Σ_j |t^i_j|² R^{2|j|})^{1/2}` over the stored coefficients of a tuple
/// of series.
pub fn norm_2r(components: &[TruncatedSeries], r: f64) -> f64 {
    components
        .iter()
        .flat_map(|s| s.terms())
        .map(|(j, v)| v.norm_sqr() * r.powi(2 * j.degree() as i32))
        .sum::<f64>()
        .sqrt()
}

/// True iff every stored coefficient satisfies `|t^i_j| <= C R^{-|j|}`.
pub fn coeff_decay_check(components: &[TruncatedSeries], c: f64, r: f64) -> bool {
    components
        .iter()
        .flat_map(|s| s.terms())
        .all(|(j, v)| v.norm() <= c / r.powi(j.degree() as i32))
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    index: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    dims: usize,
    max_degree: usize,
    terms: Vec<TermRecord>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SeriesRecord {
            dims: self.dims,
            max_degree: self.max_degree,
            terms: self
                .coeffs
                .iter()
                .map(|(j, v)| TermRecord {
                    index: j.entries().to_vec(),
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rec = SeriesRecord::deserialize(deserializer)?;
        if rec.dims == 0 || rec.max_degree == 0 {
            return Err(serde::de::Error::custom("dims and max_degree must be >= 1"));
        }
        TruncatedSeries::from_terms(
            rec.dims,
            rec.max_degree,
            rec.terms
                .into_iter()
                .map(|t| (MultiIndex::new(&t.index), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}
