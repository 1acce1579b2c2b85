//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use livsic::germ::Germ;
use livsic::series::{enumerate_multiindices, MultiIndex, TruncatedSeries};
use num_complex::Complex64;
use rand::Rng;

/// Dense polynomial keyed by exponent vector.
pub type Poly = HashMap<Vec<u32>, Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly_mul(a: &Poly, b: &Poly, n: usize) -> Poly {
    let mut out = Poly::new();
    for (ja, va) in a {
        for (jb, vb) in b {
            let j: Vec<u32> = ja.iter().zip(jb).map(|(x, y)| x + y).collect();
            if j.iter().sum::<u32>() as usize <= n {
                *out.entry(j).or_default() += va * vb;
            }
        }
    }
    out
}

pub fn to_poly(s: &TruncatedSeries) -> Poly {
    s.terms().map(|(j, v)| (j.entries().to_vec(), *v)).collect()
}

/// `outer ∘ inner` by expanding each power `inner_i^{j_i}` through repeated
/// multiplication and substituting monomial by monomial.
pub fn brute_compose(outer: &Germ, inner: &Germ) -> Vec<Poly> {
    let d = outer.dims();
    let n = outer.max_degree();
    let inner: Vec<Poly> = inner.components().iter().map(to_poly).collect();
    let mut one = Poly::new();
    one.insert(vec![0; d], c(1.0, 0.0));
    outer
        .components()
        .iter()
        .map(|comp| {
            let mut acc = Poly::new();
            for (j, a) in comp.terms() {
                let mut term = one.clone();
                for (i, &e) in j.entries().iter().enumerate() {
                    for _ in 0..e {
                        term = poly_mul(&term, &inner[i], n);
                    }
                }
                for (k, v) in term {
                    *acc.entry(k).or_default() += a * v;
                }
            }
            acc
        })
        .collect()
}

/// Largest coefficient difference between a germ and dense polynomials.
pub fn max_diff(g: &Germ, p: &[Poly]) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, q) in g.components().iter().zip(p) {
        for (j, v) in s.terms() {
            worst = worst.max((v - q.get(j.entries()).copied().unwrap_or_default()).norm());
        }
        for (j, v) in q {
            worst = worst.max((s.coeff(&MultiIndex::new(j)) - v).norm());
        }
    }
    worst
}

/// `Σ_{r_1+…+r_j = j*, r_i >= 1} B_{r_1} … B_{r_j}` for a one-variable `B`,
/// `b[r]` the coefficient of `z^r`.
pub fn fdb_d1(b: &[Complex64], j_star: usize, j: usize) -> Complex64 {
    if j == 0 {
        return if j_star == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) };
    }
    (1..=j_star.saturating_sub(j - 1))
        .map(|r| b[r] * fdb_d1(b, j_star - r, j - 1))
        .sum()
}

/// Number of `x ∈ (Z/D)^2 / D` with `M^k x = x`, `D = |det(M^k − I)|`, by
/// scanning the whole grid in integer arithmetic.
pub fn grid_periodic_count(m: [[i64; 2]; 2], k: usize) -> usize {
    let mut p = [[1i64, 0], [0, 1]];
    for _ in 0..k {
        p = [
            [
                p[0][0] * m[0][0] + p[0][1] * m[1][0],
                p[0][0] * m[0][1] + p[0][1] * m[1][1],
            ],
            [
                p[1][0] * m[0][0] + p[1][1] * m[1][0],
                p[1][0] * m[0][1] + p[1][1] * m[1][1],
            ],
        ];
    }
    let det = ((p[0][0] - 1) * (p[1][1] - 1) - p[0][1] * p[1][0]).abs();
    let mut count = 0;
    for a in 0..det {
        for b in 0..det {
            let x = (p[0][0] * a + p[0][1] * b - a).rem_euclid(det);
            let y = (p[1][0] * a + p[1][1] * b - b).rem_euclid(det);
            if x == 0 && y == 0 {
                count += 1;
            }
        }
    }
    count
}

/// Every multi-index of length `d` and degree `s`, by filtering a box.
pub fn brute_multiindices(d: usize, s: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let total = (s + 1).pow(d as u32);
    for code in 0..total {
        let mut j = Vec::with_capacity(d);
        let mut c = code;
        for _ in 0..d {
            j.push((c % (s + 1)) as u32);
            c /= s + 1;
        }
        if j.iter().sum::<u32>() as usize == s {
            out.push(j);
        }
    }
    out
}

pub fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// A random series with all coefficients of degree `lo..=n` filled.
pub fn random_series<R: Rng>(rng: &mut R, d: usize, n: usize, lo: usize, scale: f64) -> TruncatedSeries {
    let terms: Vec<_> = (lo..=n)
        .flat_map(|s| enumerate_multiindices(d, s))
        .map(|j| (j, random_complex(rng, scale)))
        .collect();
    TruncatedSeries::from_terms(d, n, terms).unwrap()
}

/// A random germ whose linear part is the identity plus a perturbation of
/// size `linear`, with higher coefficients in `[-1, 1]^2`.
pub fn random_germ<R: Rng>(rng: &mut R, d: usize, n: usize, linear: f64) -> Germ {
    let comps = (0..d)
        .map(|i| {
            let mut s = random_series(rng, d, n, 2, 1.0);
            for k in 0..d {
                let delta = if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) };
                s.set(&MultiIndex::unit(d, k), delta + random_complex(rng, linear))
                    .unwrap();
            }
            s
        })
        .collect();
    Germ::new(comps).unwrap()
}

/// A germ with nonnegative real coefficients and identity linear part.
pub fn random_positive_germ<R: Rng>(rng: &mut R, d: usize, n: usize) -> Germ {
    let comps = (0..d)
        .map(|i| {
            let terms: Vec<_> = (2..=n)
                .flat_map(|s| enumerate_multiindices(d, s))
                .map(|j| (j, c(rng.gen_range(0.0..1.0), 0.0)))
                .chain([(MultiIndex::unit(d, i), c(1.0, 0.0))])
                .collect();
            TruncatedSeries::from_terms(d, n, terms).unwrap()
        })
        .collect();
    Germ::new(comps).unwrap()
}
