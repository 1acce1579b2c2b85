use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BaseSystem, ClosingConstants};
use crate::error::{Error, Result};

/// A point of `R²/Z²`, coordinates reduced to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(pub [f64; 2]);

fn wrap01(t: f64) -> f64 {
    let r = t - t.floor();
    // t slightly below an integer can round to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `t mod 1` in `[-1/2, 1/2)`.
fn wrap_centered(t: f64) -> f64 {
    t - (t + 0.5).floor()
}

impl TorusPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self([wrap01(x), wrap01(y)])
    }

    pub fn coords(&self) -> [f64; 2] {
        self.0
    }
}

type IntMatrix = [[i128; 2]; 2];

fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0i128; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            out[i][k] = a[i][0] * b[0][k] + a[i][1] * b[1][k];
        }
    }
    out
}

fn int_pow(m: &IntMatrix, k: usize) -> IntMatrix {
    (0..k).fold([[1, 0], [0, 1]], |acc, _| int_mul(&acc, m))
}

/// Normalization making the flat torus metric have diameter 1.
const DIAMETER: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Hyperbolic automorphism `x ↦ M x mod 1` of the 2-torus.
#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    matrix: IntMatrix,
    inverse: IntMatrix,
    unstable_eigenvalue: f64,
    /// Columns: unstable and stable eigenvectors.
    eigenbasis: Matrix2<f64>,
    eigenbasis_inv: Matrix2<f64>,
    constants: ClosingConstants,
}

impl ToralAutomorphism {
    /// Requires `det M = ±1` and `|tr M| > 2`.
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = m.map(|r| r.map(i128::from));
        let det = a * d - b * c;
        let tr = a + d;
        if det.abs() != 1 {
            return Err(Error::InvalidParameter(format!("det M = {det}, need ±1")));
        }
        // For det = -1 every integer trace except 0 gives real eigenvalues off
        // the unit circle; |tr| > 2 is the condition for det = 1.
        if (det == 1 && tr.abs() <= 2) || (det == -1 && tr == 0) {
            return Err(Error::InvalidParameter(format!("M with trace {tr} is not hyperbolic")));
        }
        let (af, bf, cf, df) = (a as f64, b as f64, c as f64, d as f64);
        let trf = tr as f64;
        let disc = (trf * trf - 4.0 * det as f64).sqrt();
        let mu = if trf >= 0.0 {
            (trf + disc) / 2.0
        } else {
            (trf - disc) / 2.0
        };
        let nu = det as f64 / mu;
        let eigvec = |ev: f64| {
            let v = if bf != 0.0 {
                Vector2::new(bf, ev - af)
            } else {
                Vector2::new(ev - df, cf)
            };
            v.normalize()
        };
        let eigenbasis = Matrix2::from_columns(&[eigvec(mu), eigvec(nu)]);
        let eigenbasis_inv = eigenbasis
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameter("degenerate eigenbasis".into()))?;
        // Operator norms of the two spectral projections.
        let proj_norm = |row: usize| eigenbasis_inv.row(row).norm();
        let spread = proj_norm(0) + proj_norm(1);
        let lambda = mu.abs().ln();
        let c_close = spread / (1.0 - 1.0 / mu.abs());
        let constants = ClosingConstants::new(c_close, lambda, 0.125)?;
        Ok(Self {
            matrix: [[a, b], [c, d]],
            inverse: [[d * det, -b * det], [-c * det, a * det]],
            unstable_eigenvalue: mu,
            eigenbasis,
            eigenbasis_inv,
            constants,
        })
    }

    /// Arnold's cat map `[[2,1],[1,1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn unstable_eigenvalue(&self) -> f64 {
        self.unstable_eigenvalue
    }

    /// `M^k` as an integer matrix.
    pub fn power(&self, k: usize) -> [[i128; 2]; 2] {
        int_pow(&self.matrix, k)
    }

    /// Integer representatives `(u, v)` with `p = (u/q, v/q)` of all solutions
    /// of `M^k p ≡ p (mod 1)`, and the common denominator `q = |det(M^k - I)|`.
    ///
    /// The solutions form the lattice `(M^k - I)^{-1} Z²` modulo `Z²`; we walk
    /// the integer points of the bounding box of `(M^k - I)[0,1)²` and keep the
    /// images that land in the unit square.
    pub fn periodic_points_exact(&self, k: usize) -> (i128, Vec<(i128, i128)>) {
        assert!(k >= 1);
        let mut a = self.power(k);
        a[0][0] -= 1;
        a[1][1] -= 1;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let q = det.abs();
        let sign = det.signum();
        let adj = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
        let range = |row: [i128; 2]| {
            let lo = row[0].min(0) + row[1].min(0);
            let hi = row[0].max(0) + row[1].max(0);
            lo..=hi
        };
        let mut points = Vec::with_capacity(q as usize);
        for n0 in range(a[0]) {
            for n1 in range(a[1]) {
                let u = sign * (adj[0][0] * n0 + adj[0][1] * n1);
                let v = sign * (adj[1][0] * n0 + adj[1][1] * n1);
                if (0..q).contains(&u) && (0..q).contains(&v) {
                    points.push((u, v));
                }
            }
        }
        points.sort_unstable();
        points.dedup();
        (q, points)
    }

    fn apply(&self, m: &IntMatrix, x: &TorusPoint) -> TorusPoint {
        let [x0, x1] = x.0;
        TorusPoint::new(
            m[0][0] as f64 * x0 + m[0][1] as f64 * x1,
            m[1][0] as f64 * x0 + m[1][1] as f64 * x1,
        )
    }

    /// Splits a displacement into unstable and stable components.
    fn split(&self, e: Vector2<f64>) -> (Vector2<f64>, Vector2<f64>) {
        let coords = self.eigenbasis_inv * e;
        (
            self.eigenbasis.column(0) * coords[0],
            self.eigenbasis.column(1) * coords[1],
        )
    }

    /// Displacement `e` with `x + e` periodic, from `(M^k - I) e = -(M^k x - x)`
    /// taken in the centered lift.
    fn closing_displacement(&self, x: &TorusPoint, k: usize) -> Vector2<f64> {
        let mut a = self.power(k);
        a[0][0] -= 1;
        a[1][1] -= 1;
        let a = Matrix2::new(a[0][0] as f64, a[0][1] as f64, a[1][0] as f64, a[1][1] as f64);
        let xk = self.iterate(x, k);
        let w = -Vector2::new(wrap_centered(xk.0[0] - x.0[0]), wrap_centered(xk.0[1] - x.0[1]));
        a.try_inverse().expect("hyperbolic: M^k - I is invertible") * w
    }
}

impl BaseSystem for ToralAutomorphism {
    type Point = TorusPoint;

    fn step(&self, x: &TorusPoint) -> TorusPoint {
        self.apply(&self.matrix, x)
    }

    fn step_inverse(&self, x: &TorusPoint) -> TorusPoint {
        self.apply(&self.inverse, x)
    }

    fn dist(&self, x: &TorusPoint, y: &TorusPoint) -> f64 {
        let dx = wrap_centered(x.0[0] - y.0[0]);
        let dy = wrap_centered(x.0[1] - y.0[1]);
        ((dx * dx + dy * dy).sqrt() / DIAMETER).min(1.0)
    }

    fn closing_constants(&self) -> ClosingConstants {
        self.constants
    }

    fn periodic_points(&self, k: usize) -> Vec<TorusPoint> {
        let (q, pts) = self.periodic_points_exact(k);
        pts.into_iter()
            .map(|(u, v)| TorusPoint::new(u as f64 / q as f64, v as f64 / q as f64))
            .collect()
    }

    fn close_orbit(&self, x: &TorusPoint, k: usize) -> Result<TorusPoint> {
        let gap = self.dist(x, &self.iterate(x, k));
        if !(gap < self.constants.delta0) || k == 0 {
            return Err(Error::Precondition(format!(
                "dist(x, T^{k} x) = {gap} is not below delta0 = {}",
                self.constants.delta0
            )));
        }
        let e = self.closing_displacement(x, k);
        Ok(TorusPoint::new(x.0[0] + e[0], x.0[1] + e[1]))
    }

    /// Intersection of the stable leaf of `p` with the unstable leaf of `x`.
    fn shadowing_point(&self, x: &TorusPoint, p: &TorusPoint, k: usize) -> Result<TorusPoint> {
        let e = Vector2::new(wrap_centered(p.0[0] - x.0[0]), wrap_centered(p.0[1] - x.0[1]));
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        let (unstable, _) = self.split(e);
        Ok(TorusPoint::new(x.0[0] + unstable[0], x.0[1] + unstable[1]))
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TorusPoint {
        TorusPoint::new(rng.gen(), rng.gen())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{is_exponentially_close, shadowing_excess};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_examples() {
        let cat = ToralAutomorphism::cat_map();
        assert_eq!(cat.step(&TorusPoint::new(0.0, 0.0)), TorusPoint::new(0.0, 0.0));
        let p = cat.step(&TorusPoint::new(0.5, 0.5));
        assert!(cat.dist(&p, &TorusPoint::new(0.5, 0.0)) < 1e-15);
    }

    #[test]
    fn inverse_law() {
        let cat = ToralAutomorphism::cat_map();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = cat.random_point(&mut rng);
            assert!(cat.dist(&cat.step_inverse(&cat.step(&x)), &x) < 1e-12);
            assert!(cat.dist(&cat.step(&cat.step_inverse(&x)), &x) < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hyperbolic() {
        assert!(ToralAutomorphism::new([[1, 1], [0, 1]]).is_err());
        assert!(ToralAutomorphism::new([[0, -1], [1, 0]]).is_err());
        assert!(ToralAutomorphism::new([[2, 0], [0, 1]]).is_err());
        assert!(ToralAutomorphism::new([[3, 2], [1, 1]]).is_ok());
    }

    #[test]
    fn metric_normalized() {
        let cat = ToralAutomorphism::cat_map();
        let a = TorusPoint::new(0.0, 0.0);
        assert!((cat.dist(&a, &TorusPoint::new(0.5, 0.5)) - 1.0).abs() < 1e-15);
        assert!((cat.dist(&TorusPoint::new(0.05, 0.0), &TorusPoint::new(0.95, 0.0)) - 0.1 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constants_from_splitting() {
        let cat = ToralAutomorphism::cat_map();
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((cat.unstable_eigenvalue() - golden_sq).abs() < 1e-12);
        let cc = cat.closing_constants();
        assert!((cc.lambda - golden_sq.ln()).abs() < 1e-12);
        // symmetric matrix: orthogonal eigenvectors, unit projections
        assert!((cc.c - 2.0 / (1.0 - 1.0 / golden_sq)).abs() < 1e-9);
    }

    #[test]
    fn periodic_counts() {
        let cat = ToralAutomorphism::cat_map();
        for (k, count) in [(1, 1), (2, 5), (3, 16), (4, 45)] {
            assert_eq!(cat.periodic_points(k).len(), count, "k={k}");
        }
        assert_eq!(cat.periodic_points(1), vec![TorusPoint::new(0.0, 0.0)]);
        for p in cat.periodic_points(4) {
            assert!(cat.dist(&cat.iterate(&p, 4), &p) < 1e-10);
        }
    }

    #[test]
    fn close_orbit_examples() {
        let cat = ToralAutomorphism::cat_map();
        let p = cat.periodic_points(3)[5];
        let q = cat.close_orbit(&p, 3).unwrap();
        assert!(cat.dist(&p, &q) < 1e-12);

        // small offset along the unstable direction of the fixed point
        let u = cat.eigenbasis.column(0);
        let eps = 1e-9;
        let x = TorusPoint::new(eps * u[0], eps * u[1]);
        let k = 12;
        let q = cat.close_orbit(&x, k).unwrap();
        assert!(cat.dist(&q, &TorusPoint::new(0.0, 0.0)) < 1e-9);
        assert!(is_exponentially_close(&cat, &x, &q, k));

        let far = TorusPoint::new(0.3, 0.1);
        assert!(cat.close_orbit(&far, 1).is_err());
    }

    #[test]
    fn shadowing_point_inequalities() {
        let cat = ToralAutomorphism::cat_map();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=8 {
            let base = cat.periodic_points(k)[0];
            let x = TorusPoint::new(base.0[0] + 1e-6 * rng.gen::<f64>(), base.0[1] + 1e-6 * rng.gen::<f64>());
            let p = cat.close_orbit(&x, k).unwrap();
            let y = cat.shadowing_point(&x, &p, k).unwrap();
            assert!(shadowing_excess(&cat, &x, &p, &y, k) <= 1e-12, "k={k}");
        }
    }
}
