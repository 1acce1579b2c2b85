//! Livšic solvers along a dense orbit.
//!
//! The scalar equation `φ∘T − φ = ψ` is solved on the forward orbit of the
//! base point by partial sums, `φ(T^n x_0) = Σ_{j<n} ψ(T^j x_0)`, and extended
//! off the orbit by the nearest orbit point. The germ equation
//! `F(x)∘H(x) = H(Tx)` is reduced to scalar equations degree by degree, see
//! [`germ_solve`].

mod germ;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{PooOrbit, PooReport, ScalarField};
use crate::dynamics::{periodic_orbits, BaseSystem, DenseOrbit};
use crate::error::{Error, Result};

pub use germ::{
    data_poo_check, germ_solve, reduce_linear_part, solve_degree, verify_extension, verify_on_orbit, verify_solution,
    CoefficientReport, DataPooOrbit, ExtensionReport, GermSolveOptions, GermSolveReport, LinearReduction,
    OrbitSolution, SolutionObservable, VerifyReport, DEFAULT_PRODUCT_BOUND, EXTENSION_FACTOR, ON_ORBIT_TOL,
};

/// The points `T^n x_0`, `n < L`.
#[derive(Debug, Clone)]
pub struct Orbit<P> {
    points: Vec<P>,
}

impl<P: Clone + Send + Sync> Orbit<P> {
    pub fn new<S: BaseSystem<Point = P>>(system: &S, x0: &P, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("orbit length must be >= 1".into()));
        }
        Ok(Self {
            points: system.orbit(x0, len),
        })
    }

    /// The first `len` points of the system's dense orbit.
    pub fn dense<S: DenseOrbit<Point = P>>(system: &S, len: usize) -> Result<Self> {
        Self::new(system, &system.base_point(), len)
    }

    /// Index of and distance to the closest orbit point; ties go to the
    /// smallest index.
    pub fn nearest<S: BaseSystem<Point = P>>(&self, system: &S, x: &P) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (n, p) in self.points.iter().enumerate() {
            let d = system.dist(p, x);
            if d < best.1 {
                best = (n, d);
                if d == 0.0 {
                    break;
                }
            }
        }
        best
    }

    /// Largest distance from a sample point to the orbit.
    pub fn covering_radius<S: BaseSystem<Point = P>>(&self, system: &S, samples: &[P]) -> f64 {
        samples
            .par_iter()
            .map(|x| self.nearest(system, x).1)
            .reduce(|| 0.0, f64::max)
    }
}

impl<P> Orbit<P> {
    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn base_point(&self) -> &P {
        &self.points[0]
    }
}

/// Values of a solution on an [`Orbit`], `values[n] = φ(T^n x_0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTable {
    pub values: Vec<Complex64>,
}

/// A nearest-orbit-point extension value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extension {
    pub value: Complex64,
    pub nearest: usize,
    pub distance: f64,
}

impl Extension {
    /// `[φ]_α dist^α`, the error of the extension for an `α`-Hölder `φ`.
    pub fn error_bound(&self, holder: &HolderEstimate) -> f64 {
        holder.seminorm * self.distance.powf(holder.alpha)
    }
}

impl OrbitTable {
    /// `φ(T^n x_0) = Σ_{j<n} data[j]`, so one more value than data.
    pub fn from_increments(data: &[Complex64]) -> Self {
        let mut values = Vec::with_capacity(data.len() + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        values.push(acc);
        for v in data {
            acc += v;
            values.push(acc);
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `|φ(T^{n+1} x_0) − φ(T^n x_0) − ψ(T^n x_0)|`.
    pub fn telescoping_residual(&self, psi: &[Complex64]) -> f64 {
        self.values
            .windows(2)
            .zip(psi)
            .map(|(w, p)| (w[1] - w[0] - p).norm())
            .fold(0.0, f64::max)
    }

    pub fn extend<S: BaseSystem>(&self, system: &S, orbit: &Orbit<S::Point>, x: &S::Point) -> Extension {
        let (nearest, distance) = orbit.nearest(system, x);
        Extension {
            value: self.values[nearest],
            nearest,
            distance,
        }
    }
}

/// Solves `φ∘T − φ = ψ` on the orbit with `φ(x_0) = 0`.
///
/// No obstruction check is made here; a `ψ` failing the periodic orbit
/// condition produces values that drift, which [`verify_scalar`] detects.
pub fn scalar_solve<P, F>(orbit: &Orbit<P>, psi: &F) -> Result<OrbitTable>
where
    F: ScalarField<P> + ?Sized,
{
    if orbit.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "scalar solve needs an orbit of length >= 2, got {}",
            orbit.len()
        )));
    }
    let data: Vec<Complex64> = orbit.points()[..orbit.len() - 1].iter().map(|p| psi.eval(p)).collect();
    Ok(OrbitTable::from_increments(&data))
}

/// Sums of `ψ` around every periodic orbit of minimal period `k <= kmax`.
pub fn scalar_poo_check<S, F>(system: &S, psi: &F, kmax: usize, tol: f64) -> PooReport
where
    S: BaseSystem,
    F: ScalarField<S::Point> + ?Sized,
{
    let mut orbits = Vec::new();
    for k in 1..=kmax {
        for orbit in periodic_orbits(system, k) {
            let residual = orbit.iter().map(|p| psi.eval(p)).sum::<Complex64>().norm();
            orbits.push(PooOrbit {
                period: k,
                representative: format!("{:?}", orbit[0]),
                residual,
                pass: residual <= tol,
            });
        }
    }
    PooReport { tol, orbits }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HolderMethod {
    Declared,
    Empirical,
}

/// A Hölder seminorm `[f]_α` together with the sup norm `‖f‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub seminorm: f64,
    pub sup_norm: f64,
    pub method: HolderMethod,
}

/// `max |f(x) − f(y)| / dist(x, y)^α` over the given pairs, a lower bound for
/// `[f]_α`. The sup norm is taken over all points appearing in the pairs.
pub fn holder_seminorm_empirical<S, F>(
    system: &S,
    f: &F,
    alpha: f64,
    pairs: &[(S::Point, S::Point)],
) -> Result<HolderEstimate>
where
    S: BaseSystem,
    F: ScalarField<S::Point> + ?Sized,
{
    let mut seminorm: f64 = 0.0;
    let mut sup_norm: f64 = 0.0;
    for (x, y) in pairs {
        let d = system.dist(x, y);
        if d == 0.0 {
            return Err(Error::InvalidParameter("zero-distance pair in Hölder sample".into()));
        }
        let (fx, fy) = (f.eval(x), f.eval(y));
        seminorm = seminorm.max((fx - fy).norm() / d.powf(alpha));
        sup_norm = sup_norm.max(fx.norm()).max(fy.norm());
    }
    Ok(HolderEstimate {
        alpha,
        seminorm,
        sup_norm,
        method: HolderMethod::Empirical,
    })
}

/// All pairs of distinct points among the first `m` points of a list, with
/// `dist^α` precomputed, for estimating many seminorms on one sample.
#[derive(Debug, Clone)]
pub struct PairSample {
    alpha: f64,
    points: usize,
    pairs: Vec<(u32, u32, f64)>,
}

impl PairSample {
    pub fn all_pairs<S: BaseSystem>(system: &S, points: &[S::Point], alpha: f64) -> Self {
        let pairs = (0..points.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                (i + 1..points.len()).filter_map(move |j| {
                    let d = system.dist(&points[i], &points[j]);
                    (d > 0.0).then(|| (i as u32, j as u32, d.powf(alpha)))
                })
            })
            .collect();
        Self {
            alpha,
            points: points.len(),
            pairs,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(i, j, dist(x_i, x_j)^α)` for every stored pair.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().map(|&(i, j, w)| (i as usize, j as usize, w))
    }

    /// Seminorm and sup norm of a function given by its values at the sample
    /// points (extra values are ignored).
    pub fn estimate(&self, values: &[Complex64]) -> HolderEstimate {
        assert!(values.len() >= self.points, "one value per sample point");
        let seminorm = self
            .pairs
            .iter()
            .map(|&(i, j, w)| (values[i as usize] - values[j as usize]).norm() / w)
            .fold(0.0, f64::max);
        let sup_norm = values[..self.points].iter().map(|v| v.norm()).fold(0.0, f64::max);
        HolderEstimate {
            alpha: self.alpha,
            seminorm,
            sup_norm,
            method: HolderMethod::Empirical,
        }
    }
}

/// Size and seed of the fixed random cloud against which density is measured.
pub const NET_CLOUD_SIZE: usize = 256;
pub const NET_CLOUD_SEED: u64 = 0x006e_6574;

pub fn net_cloud<S: BaseSystem>(system: &S) -> Vec<S::Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(NET_CLOUD_SEED);
    (0..NET_CLOUD_SIZE).map(|_| system.random_point(&mut rng)).collect()
}

/// The constant `K` with `[φ]_α <= K([ψ]_α + ‖ψ‖)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LivsicConstants {
    pub alpha: f64,
    /// `max(closing_term, net_term)`.
    pub k: f64,
    /// `4 c^α / (1 − e^{−λα})`, from pairs of nearby orbit points.
    pub closing_term: f64,
    /// `N_net / δ0^α`, from pairs of distant points.
    pub net_term: f64,
    /// Length of the shortest orbit prefix that is `δ0`-dense in the cloud.
    pub n_net: usize,
}

/// `K` for the system and orbit, measuring `N_net` against `cloud`.
pub fn livsic_constant<S: BaseSystem>(
    system: &S,
    alpha: f64,
    orbit: &Orbit<S::Point>,
    cloud: &[S::Point],
) -> Result<LivsicConstants> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} not in (0,1]")));
    }
    let cc = system.closing_constants();
    let first_hits: Vec<Option<usize>> = cloud
        .par_iter()
        .map(|x| orbit.points().iter().position(|p| system.dist(p, x) <= cc.delta0))
        .collect();
    let mut n_net = 1;
    for (hit, x) in first_hits.iter().zip(cloud) {
        match hit {
            Some(n) => n_net = n_net.max(n + 1),
            None => {
                return Err(Error::OrbitNotDense {
                    delta0: cc.delta0,
                    length: orbit.len(),
                    radius: orbit.nearest(system, x).1,
                })
            }
        }
    }
    let closing_term = 4.0 * cc.c.powf(alpha) / (1.0 - (-cc.lambda * alpha).exp());
    let net_term = n_net as f64 / cc.delta0.powf(alpha);
    Ok(LivsicConstants {
        alpha,
        k: closing_term.max(net_term),
        closing_term,
        net_term,
        n_net,
    })
}

/// Relative slack applied to `K([ψ]_α + ‖ψ‖)` in empirical checks.
pub const ESTIMATE_SLACK: f64 = 0.01;

/// Consistency of a scalar solution with the a priori estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarVerification {
    pub telescoping_residual: f64,
    pub phi: HolderEstimate,
    pub psi: HolderEstimate,
    /// `K([ψ]_α + ‖ψ‖)(1 + slack)`.
    pub bound: f64,
    /// The solution violates the estimate, so `ψ` is not a coboundary.
    pub drift: bool,
}

/// Checks the solution on the orbit against `ψ` and against the estimate
/// `[φ]_α <= K([ψ]_α + ‖ψ‖)` on the pair sample.
pub fn verify_scalar(
    table: &OrbitTable,
    psi: &[Complex64],
    pairs: &PairSample,
    constants: &LivsicConstants,
) -> ScalarVerification {
    let phi = pairs.estimate(&table.values);
    let psi_est = pairs.estimate(psi);
    let bound = constants.k * (psi_est.seminorm + psi_est.sup_norm) * (1.0 + ESTIMATE_SLACK);
    ScalarVerification {
        telescoping_residual: table.telescoping_residual(psi),
        phi,
        psi: psi_est,
        bound,
        drift: phi.seminorm > bound,
    }
}
