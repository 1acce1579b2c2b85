//! Base dynamics: homeomorphisms of compact metric spaces with the closing
//! property.
//!
//! Two systems are provided. [`ToralAutomorphism`] is a hyperbolic linear map
//! of the 2-torus (the cat map by default), with exact periodic points and
//! closing by a linear solve along the hyperbolic splitting. [`FullShift`] is
//! the two-sided shift on `m` symbols, with closing by repeating a word and a
//! constructive dense forward orbit. Both metrics are normalized to diameter 1.

mod shift;
mod torus;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use shift::{FullShift, ShiftPoint};
pub use torus::{ToralAutomorphism, TorusPoint};

/// Constants `(c, λ, δ0)` of the closing property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingConstants {
    pub c: f64,
    pub lambda: f64,
    pub delta0: f64,
}

impl ClosingConstants {
    pub fn new(c: f64, lambda: f64, delta0: f64) -> Result<Self> {
        if !(c > 0.0 && lambda > 0.0 && delta0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "closing constants must be positive: c={c}, lambda={lambda}, delta0={delta0}"
            )));
        }
        Ok(Self { c, lambda, delta0 })
    }
}

/// A homeomorphism `T: X -> X` with the closing property.
pub trait BaseSystem: Sync {
    type Point: Clone + std::fmt::Debug + Send + Sync;

    fn step(&self, x: &Self::Point) -> Self::Point;

    fn step_inverse(&self, x: &Self::Point) -> Self::Point;

    /// Metric with values in `[0, 1]`.
    fn dist(&self, x: &Self::Point, y: &Self::Point) -> f64;

    fn closing_constants(&self) -> ClosingConstants;

    /// All points with `T^k p = p`, in a deterministic order.
    fn periodic_points(&self, k: usize) -> Vec<Self::Point>;

    /// A `k`-periodic point whose orbit segment shadows that of `x`.
    ///
    /// Requires `dist(x, T^k x) < δ0`.
    fn close_orbit(&self, x: &Self::Point, k: usize) -> Result<Self::Point>;

    /// The auxiliary point `y` of the closing property: forward asymptotic to
    /// `p`, and backward asymptotic to `x` relative to time `k`.
    fn shadowing_point(&self, x: &Self::Point, p: &Self::Point, k: usize) -> Result<Self::Point>;

    /// Independent random points, for sampling metrics and seminorms.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    fn iterate(&self, x: &Self::Point, n: usize) -> Self::Point {
        (0..n).fold(x.clone(), |p, _| self.step(&p))
    }

    fn orbit(&self, x: &Self::Point, len: usize) -> Vec<Self::Point> {
        let mut out = Vec::with_capacity(len);
        let mut p = x.clone();
        for _ in 0..len {
            let next = self.step(&p);
            out.push(p);
            p = next;
        }
        out
    }
}

/// A system with a fixed, constructively dense forward orbit.
pub trait DenseOrbit: BaseSystem {
    /// `T^n x_0` for the fixed base point `x_0`.
    fn dense_orbit(&self, n: usize) -> Self::Point;

    fn base_point(&self) -> Self::Point {
        self.dense_orbit(0)
    }
}

/// How far the pair `(x, p)` is from satisfying exponential `δ`-closeness with
/// `δ = c dist(x, T^k x)`: the maximum over `j = 0..=k` of
/// `dist(T^j x, T^j p) - δ e^{-λ min(j, k-j)}`. Non-positive means satisfied.
pub fn closeness_excess<S: BaseSystem>(system: &S, x: &S::Point, p: &S::Point, k: usize) -> f64 {
    let cc = system.closing_constants();
    let delta = cc.c * system.dist(x, &system.iterate(x, k));
    let (mut xj, mut pj) = (x.clone(), p.clone());
    let mut worst = f64::NEG_INFINITY;
    for j in 0..=k {
        let bound = delta * (-cc.lambda * j.min(k - j) as f64).exp();
        worst = worst.max(system.dist(&xj, &pj) - bound);
        xj = system.step(&xj);
        pj = system.step(&pj);
    }
    worst
}

/// Slack allowed for floating-point orbit computation in closeness checks.
pub const CLOSENESS_SLACK: f64 = 1e-12;

pub fn is_exponentially_close<S: BaseSystem>(system: &S, x: &S::Point, p: &S::Point, k: usize) -> bool {
    closeness_excess(system, x, p, k) <= CLOSENESS_SLACK
}

/// Checks the two one-sided inequalities for the auxiliary point `y`:
/// `dist(T^j p, T^j y) <= δ e^{-λ j}` and `dist(T^j y, T^j x) <= δ e^{-λ (k-j)}`.
pub fn shadowing_excess<S: BaseSystem>(system: &S, x: &S::Point, p: &S::Point, y: &S::Point, k: usize) -> f64 {
    let cc = system.closing_constants();
    let delta = cc.c * system.dist(x, &system.iterate(x, k));
    let (mut xj, mut pj, mut yj) = (x.clone(), p.clone(), y.clone());
    let mut worst = f64::NEG_INFINITY;
    for j in 0..=k {
        let forward = delta * (-cc.lambda * j as f64).exp();
        let backward = delta * (-cc.lambda * (k - j) as f64).exp();
        worst = worst
            .max(system.dist(&pj, &yj) - forward)
            .max(system.dist(&yj, &xj) - backward);
        xj = system.step(&xj);
        pj = system.step(&pj);
        yj = system.step(&yj);
    }
    worst
}

/// Covering radius of `orbit` against `samples`: the largest distance from a
/// sample to its nearest orbit point.
pub fn empirical_density<S: BaseSystem>(system: &S, orbit: &[S::Point], samples: &[S::Point]) -> Result<f64> {
    if orbit.is_empty() || samples.is_empty() {
        return Err(Error::InvalidParameter("empty orbit or sample list".into()));
    }
    Ok(samples
        .iter()
        .map(|s| orbit.iter().map(|o| system.dist(o, s)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// Identification threshold for points on a common periodic orbit.
const SAME_POINT: f64 = 1e-9;

/// Periodic orbits of minimal period exactly `k`, one list per orbit starting
/// at its representative (first in `periodic_points(k)` order).
pub fn periodic_orbits<S: BaseSystem>(system: &S, k: usize) -> Vec<Vec<S::Point>> {
    let mut seen: Vec<S::Point> = Vec::new();
    let mut orbits = Vec::new();
    for p in system.periodic_points(k) {
        if seen.iter().any(|q| system.dist(q, &p) < SAME_POINT) {
            continue;
        }
        let orbit = system.orbit(&p, k);
        let minimal = (1..k).all(|j| system.dist(&orbit[j], &p) >= SAME_POINT);
        seen.extend(orbit.iter().cloned());
        if minimal {
            orbits.push(orbit);
        }
    }
    orbits
}

/// Construction record for a base system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SystemConfig {
    Torus {
        matrix: [[i64; 2]; 2],
    },
    Shift {
        alphabet: u8,
        #[serde(default = "default_horizon")]
        horizon: usize,
    },
}

fn default_horizon() -> usize {
    shift::DEFAULT_HORIZON
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::Shift {
            alphabet: 2,
            horizon: shift::DEFAULT_HORIZON,
        }
    }
}
