//! The germ cohomological equation `F(x)∘H(x) = H(Tx)` along an orbit.
//!
//! The linear part is handled first: `H_1(T^n x_0) = A_1(n, x_0)` solves the
//! matrix equation on the orbit, and conjugating by it leaves a cocycle with
//! identity linear part. Then for `k = 2..N`, with `G_{<k}` known, the degree
//! `k` part of `G_{<k}(Tx)^{-1} ∘ F(x) ∘ G_{<k}(x)` equals `g_k(Tx) − g_k(x)`,
//! one scalar equation per coefficient.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Orbit, OrbitTable, PairSample};
use crate::cocycle::{GermObservable, PooOrbit, PooReport};
use crate::dynamics::{periodic_orbits, BaseSystem};
use crate::error::{Error, Result};
use crate::germ::{Germ, Matrix};
use crate::series::{enumerate_multiindices, MultiIndex, TruncatedSeries};

/// Default threshold on the size of linear orbit products.
pub const DEFAULT_PRODUCT_BOUND: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GermSolveOptions {
    pub alpha: f64,
    /// Largest period used for the linear and degree-wise obstruction checks.
    pub kmax: usize,
    /// Tolerance of the linear obstruction check.
    pub poo_tol: f64,
    /// `max_n max(‖H_1(T^n x_0)‖, ‖H_1(T^n x_0)^{-1}‖)` above this is treated
    /// as unbounded.
    pub product_bound: f64,
    /// Orbit prefix used for empirical seminorms.
    pub seminorm_points: usize,
}

impl Default for GermSolveOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            kmax: 6,
            poo_tol: 1e-8,
            product_bound: DEFAULT_PRODUCT_BOUND,
            seminorm_points: 800,
        }
    }
}

fn matrix_deviation(m: &Matrix) -> f64 {
    let d = m.nrows();
    (m - Matrix::identity(d, d))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

fn linear_is_identity(fs: &[Germ]) -> bool {
    fs.iter().all(|f| matrix_deviation(f.linear_part()) == 0.0)
}

/// `h1[0] = I`, `h1[n+1] = A(x_n) h1[n]`, and the conjugated germs
/// `h1[n+1]^{-1} ∘ F(x_n) ∘ h1[n]`.
fn reduce_path(fs: &[Germ]) -> Result<(Vec<Matrix>, Vec<Germ>)> {
    let d = fs[0].dims();
    let n = fs[0].max_degree();
    let mut h1 = Vec::with_capacity(fs.len() + 1);
    h1.push(Matrix::identity(d, d));
    for f in fs {
        let next = f.linear_part() * h1.last().expect("nonempty");
        h1.push(next);
    }
    if linear_is_identity(fs) {
        return Ok((h1, fs.to_vec()));
    }
    let reduced = fs
        .par_iter()
        .enumerate()
        .map(|(m, f)| {
            let inv = h1[m + 1].clone().try_inverse().ok_or(Error::SingularLinearPart {
                det: h1[m + 1].determinant().norm(),
            })?;
            Germ::from_linear(&inv, n)?
                .compose(f)?
                .compose(&Germ::from_linear(&h1[m], n)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((h1, reduced))
}

fn set_coefficients(g: &Germ, updates: &[(usize, &MultiIndex, Complex64)]) -> Result<Germ> {
    let mut comps = g.components().to_vec();
    for (i, j, v) in updates {
        comps[*i].set(j, *v)?;
    }
    Germ::new(comps)
}

/// The degree-`k` data `[g_{n+1}^{-1} ∘ f_n ∘ g_n]_k` along a path.
fn degree_data(fs: &[Germ], g: &[Germ], k: usize) -> Result<Vec<Vec<TruncatedSeries>>> {
    let inverses = g[1..].par_iter().map(Germ::invert).collect::<Result<Vec<_>>>()?;
    fs.par_iter()
        .enumerate()
        .map(|(m, f)| {
            let conj = inverses[m].compose(f)?.compose(&g[m])?;
            Ok(conj.components().iter().map(|s| s.degree_part(k)).collect())
        })
        .collect()
}

/// Solves the degree-`k` coefficients of `G` along a path, given `G_{<k}`.
///
/// `reduced` holds the germs `f_n` (identity linear part) and `h_below` the
/// values `G_{<k}` at the `len + 1` path points, `G_{<k}(x_0) = id`. The
/// scalar equations are solved in the given coefficient order; each reads only
/// `G_{<k}`, so the order does not affect the result.
pub fn solve_degree(reduced: &[Germ], h_below: &[Germ], k: usize, order: &[(usize, MultiIndex)]) -> Result<Vec<Germ>> {
    if h_below.len() != reduced.len() + 1 {
        return Err(Error::DimensionMismatch {
            left: reduced.len() + 1,
            right: h_below.len(),
        });
    }
    let data = degree_data(reduced, h_below, k)?;
    let tables: Vec<OrbitTable> = order
        .par_iter()
        .map(|(i, j)| {
            let increments: Vec<Complex64> = data.iter().map(|r| r[*i].coeff(j)).collect();
            OrbitTable::from_increments(&increments)
        })
        .collect();
    h_below
        .par_iter()
        .enumerate()
        .map(|(n, g)| {
            let updates: Vec<_> = order
                .iter()
                .zip(&tables)
                .map(|((i, j), t)| (*i, j, t.values[n]))
                .collect();
            set_coefficients(g, &updates)
        })
        .collect()
}

/// Unknowns of degree `k` in component-major, graded-lex order.
fn degree_block(d: usize, k: usize) -> Vec<(usize, MultiIndex)> {
    (0..d)
        .flat_map(|i| enumerate_multiindices(d, k).into_iter().map(move |j| (i, j)))
        .collect()
}

/// `G` along a path of reduced germs, normalized to the identity at the start.
fn solve_path(reduced: &[Germ]) -> Result<Vec<Germ>> {
    let d = reduced[0].dims();
    let n = reduced[0].max_degree();
    let mut g = vec![Germ::identity(d, n); reduced.len() + 1];
    for k in 2..=n {
        g = solve_degree(reduced, &g, k, &degree_block(d, k))?;
    }
    Ok(g)
}

/// The linear part of the solution on the orbit.
#[derive(Debug, Clone)]
pub struct LinearReduction {
    /// `H_1(T^n x_0)`, `n < L`.
    pub h1: Vec<Matrix>,
    /// `H_1(T^{n+1} x_0)^{-1} ∘ F(T^n x_0) ∘ H_1(T^n x_0)`, `n < L − 1`.
    pub reduced: Vec<Germ>,
    /// Whether `F` already had identity linear part on the orbit.
    pub trivial: bool,
    pub max_product_norm: f64,
    pub matrix_poo: PooReport,
}

/// Solves the linear part of the equation on the orbit and conjugates it away.
///
/// Fails with [`Error::PooFailure`] when the products of linear parts around
/// some periodic orbit of period `<= kmax` differ from the identity, and with
/// [`Error::Unsupported`] when the orbit products are not bounded by
/// `product_bound`.
pub fn reduce_linear_part<S, G>(
    system: &S,
    f: &G,
    orbit: &Orbit<S::Point>,
    opts: &GermSolveOptions,
) -> Result<LinearReduction>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    if orbit.len() < 2 {
        return Err(Error::InvalidParameter(
            "germ solve needs an orbit of length >= 2".into(),
        ));
    }
    let fs = evaluate_on(f, &orbit.points()[..orbit.len() - 1])?;
    reduce_from_values(system, f, &fs, opts)
}

fn evaluate_on<P: Sync, G: GermObservable<P> + ?Sized>(f: &G, points: &[P]) -> Result<Vec<Germ>> {
    points.par_iter().map(|p| f.evaluate(p)).collect()
}

fn reduce_from_values<S, G>(system: &S, f: &G, fs: &[Germ], opts: &GermSolveOptions) -> Result<LinearReduction>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    let matrix_poo = linear_poo_check(system, f, opts.kmax, opts.poo_tol)?;
    if !matrix_poo.pass() {
        let worst = matrix_poo
            .orbits
            .iter()
            .filter(|o| !o.pass)
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("a failing orbit");
        return Err(Error::PooFailure(format!(
            "linear part: product around period-{} orbit {} differs from I by {:.3e}",
            worst.period, worst.representative, worst.residual
        )));
    }
    let trivial = linear_is_identity(fs);
    let (h1, reduced) = reduce_path(fs)?;
    let max_product_norm = h1
        .iter()
        .map(|m| {
            let inv = m.clone().try_inverse().map_or(f64::INFINITY, |i| i.norm());
            m.norm().max(inv)
        })
        .fold(0.0, f64::max);
    if !(max_product_norm <= opts.product_bound) {
        return Err(Error::Unsupported(format!(
            "linear orbit products reach norm {max_product_norm:.3e} > {:.3e}; \
             cocycles with unbounded products are not handled",
            opts.product_bound
        )));
    }
    Ok(LinearReduction {
        h1,
        reduced,
        trivial,
        max_product_norm,
        matrix_poo,
    })
}

/// Products of linear parts around periodic orbits, compared with `I`.
fn linear_poo_check<S, G>(system: &S, f: &G, kmax: usize, tol: f64) -> Result<PooReport>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    let mut orbits = Vec::new();
    for k in 1..=kmax {
        for cycle in periodic_orbits(system, k) {
            let mut prod = Matrix::identity(f.dims(), f.dims());
            for p in &cycle {
                prod = f.evaluate(p)?.linear_part() * prod;
            }
            let residual = matrix_deviation(&prod);
            orbits.push(PooOrbit {
                period: k,
                representative: format!("{:?}", cycle[0]),
                residual,
                pass: residual <= tol,
            });
        }
    }
    Ok(PooReport { tol, orbits })
}

/// Degree-wise obstruction residuals on one periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPooOrbit {
    pub period: usize,
    pub representative: String,
    /// `max_{i,j*} |Σ_v R^i_{j*}(T^v p)|` for degrees `2..=N`.
    pub residuals: Vec<f64>,
}

impl DataPooOrbit {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the degree recursion around each periodic orbit of period `<= kmax`
/// and reports the sums of the degree-`k` data over the orbit, which vanish
/// when `F` satisfies the periodic orbit condition.
pub fn data_poo_check<S, G>(system: &S, f: &G, kmax: usize) -> Result<Vec<DataPooOrbit>>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    let cycles: Vec<Vec<S::Point>> = (1..=kmax).flat_map(|k| periodic_orbits(system, k)).collect();
    cycles
        .par_iter()
        .map(|cycle| {
            let fs = cycle.iter().map(|p| f.evaluate(p)).collect::<Result<Vec<_>>>()?;
            let (_, reduced) = reduce_path(&fs)?;
            let g = solve_path(&reduced)?;
            let end = g.last().expect("nonempty path");
            let residuals = (2..=f.max_degree())
                .map(|k| {
                    end.components()
                        .iter()
                        .map(|s| s.degree_part(k).max_abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            Ok(DataPooOrbit {
                period: cycle.len(),
                representative: format!("{:?}", cycle[0]),
                residuals,
            })
        })
        .collect()
}

/// `H` at the orbit points `T^n x_0`, `n < L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSolution {
    pub dims: usize,
    pub max_degree: usize,
    pub germs: Vec<Germ>,
}

impl OrbitSolution {
    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    /// Values of one coefficient along the orbit.
    pub fn coefficient(&self, i: usize, j: &MultiIndex) -> Vec<Complex64> {
        self.germs.iter().map(|g| g.coeff(i, j)).collect()
    }

    /// Extension by nearest orbit point.
    pub fn observable<'a, S: BaseSystem>(
        &'a self,
        system: &'a S,
        orbit: &'a Orbit<S::Point>,
    ) -> SolutionObservable<'a, S> {
        SolutionObservable {
            system,
            orbit,
            solution: self,
        }
    }
}

/// An [`OrbitSolution`] evaluated anywhere through the nearest orbit point.
pub struct SolutionObservable<'a, S: BaseSystem> {
    system: &'a S,
    orbit: &'a Orbit<S::Point>,
    solution: &'a OrbitSolution,
}

impl<S: BaseSystem> SolutionObservable<'_, S> {
    /// Index of the orbit point used for `x` and its distance.
    pub fn nearest(&self, x: &S::Point) -> (usize, f64) {
        self.orbit.nearest(self.system, x)
    }
}

impl<S: BaseSystem> GermObservable<S::Point> for SolutionObservable<'_, S> {
    fn dims(&self) -> usize {
        self.solution.dims
    }

    fn max_degree(&self) -> usize {
        self.solution.max_degree
    }

    fn evaluate(&self, x: &S::Point) -> Result<Germ> {
        Ok(self.solution.germs[self.nearest(x).0].clone())
    }
}

/// Residuals of `F(x)∘H(x) − H(Tx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    /// Largest coefficient modulus over all samples.
    pub residual: f64,
    /// The same, restricted to each degree `1..=N`.
    pub per_degree: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

fn residual_by_degree(f: &Germ, h: &Germ, h_next: &Germ) -> Result<Vec<f64>> {
    let lhs = f.compose(h)?;
    let mut out = vec![0.0f64; f.max_degree()];
    for (a, b) in lhs.components().iter().zip(h_next.components()) {
        let diff = a.sub(b)?;
        for (j, v) in diff.terms() {
            let slot = &mut out[j.degree() - 1];
            *slot = slot.max(v.norm());
        }
    }
    Ok(out)
}

fn summarize(per_sample: Vec<Vec<f64>>, n: usize, tol: f64) -> VerifyReport {
    let mut per_degree = vec![0.0f64; n];
    for r in &per_sample {
        for (acc, v) in per_degree.iter_mut().zip(r) {
            *acc = acc.max(*v);
        }
    }
    let residual = per_degree.iter().copied().fold(0.0, f64::max);
    VerifyReport {
        samples: per_sample.len(),
        residual,
        per_degree,
        tol,
        pass: residual <= tol,
    }
}

/// Checks `F(x_n)∘H(x_n) = H(x_{n+1})` for consecutive orbit values.
pub fn verify_on_orbit(fs: &[Germ], hs: &[Germ], tol: f64) -> Result<VerifyReport> {
    if hs.len() != fs.len() + 1 {
        return Err(Error::DimensionMismatch {
            left: fs.len() + 1,
            right: hs.len(),
        });
    }
    let n = hs[0].max_degree();
    let per_sample = fs
        .par_iter()
        .enumerate()
        .map(|(m, f)| residual_by_degree(f, &hs[m], &hs[m + 1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_sample, n, tol))
}

/// Checks `F(x)∘H(x) = H(Tx)` at arbitrary sample points.
pub fn verify_solution<S, F, H>(system: &S, f: &F, h: &H, samples: &[S::Point], tol: f64) -> Result<VerifyReport>
where
    S: BaseSystem,
    F: GermObservable<S::Point> + ?Sized,
    H: GermObservable<S::Point> + ?Sized,
{
    let per_sample = samples
        .par_iter()
        .map(|x| residual_by_degree(&f.evaluate(x)?, &h.evaluate(x)?, &h.evaluate(&system.step(x))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_sample, h.max_degree(), tol))
}

/// Multiplier on the Hölder bound allowed for off-orbit residuals.
pub const EXTENSION_FACTOR: f64 = 4.0;

/// Residuals of `F(x)∘H(x) − H(Tx)` with `H` extended off the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub samples: usize,
    pub max_residual: f64,
    /// Largest distance from `x` or `Tx` to the orbit over the samples.
    pub max_distance: f64,
    /// Largest ratio of residual to allowed residual.
    pub worst_ratio: f64,
    pub pass: bool,
}

/// Off-orbit check of a nearest-point extension. At a sample `x` whose
/// nearest orbit points lie at distances `a` from `x` and `b` from `Tx`, the
/// residual may be `ON_ORBIT_TOL + EXTENSION_FACTOR [H]_α (a^α + b^α)`, with
/// `seminorm` the largest coefficient seminorm of `H`.
pub fn verify_extension<S, F>(
    system: &S,
    f: &F,
    solution: &SolutionObservable<'_, S>,
    samples: &[S::Point],
    seminorm: f64,
    alpha: f64,
) -> Result<ExtensionReport>
where
    S: BaseSystem,
    F: GermObservable<S::Point> + ?Sized,
{
    let rows = samples
        .par_iter()
        .map(|x| {
            let (a, da) = solution.nearest(x);
            let (b, db) = solution.nearest(&system.step(x));
            let germs = &solution.solution.germs;
            let residual = residual_by_degree(&f.evaluate(x)?, &germs[a], &germs[b])?
                .into_iter()
                .fold(0.0, f64::max);
            let allowed = ON_ORBIT_TOL + EXTENSION_FACTOR * seminorm * (da.powf(alpha) + db.powf(alpha));
            Ok((residual, da.max(db), residual / allowed))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |k: fn(&(f64, f64, f64)) -> f64| rows.iter().map(k).fold(0.0, f64::max);
    let worst_ratio = fold(|r| r.2);
    Ok(ExtensionReport {
        samples: rows.len(),
        max_residual: fold(|r| r.0),
        max_distance: fold(|r| r.1),
        worst_ratio,
        pass: worst_ratio <= 1.0,
    })
}

/// Empirical size of one solved coefficient `g^i_j` of the reduced solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub component: usize,
    pub index: MultiIndex,
    pub degree: usize,
    pub seminorm: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermSolveReport {
    pub length: usize,
    pub dims: usize,
    pub max_degree: usize,
    pub alpha: f64,
    pub linear_trivial: bool,
    pub matrix_poo_residual: f64,
    pub max_product_norm: f64,
    pub on_orbit: VerifyReport,
    pub data_poo: Vec<DataPooOrbit>,
    pub data_poo_residual: f64,
    /// Seminorm sample size in orbit points.
    pub seminorm_points: usize,
    pub coefficients: Vec<CoefficientReport>,
}

/// On-orbit tolerance of the solution check.
pub const ON_ORBIT_TOL: f64 = 1e-8;

/// Solves `F(x)∘H(x) = H(Tx)` on the orbit with `H(x_0) = id`.
///
/// Returns `H = H_1 ∘ G` at the orbit points, and a report with the on-orbit
/// residuals, the degree-wise obstruction residuals on periodic orbits of
/// period `<= kmax`, and empirical Hölder seminorms of the coefficients of
/// `G` of degree `>= 2` on the first `seminorm_points` orbit points.
pub fn germ_solve<S, G>(
    system: &S,
    f: &G,
    orbit: &Orbit<S::Point>,
    opts: &GermSolveOptions,
) -> Result<(OrbitSolution, GermSolveReport)>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    if orbit.len() < 2 {
        return Err(Error::InvalidParameter(
            "germ solve needs an orbit of length >= 2".into(),
        ));
    }
    let d = f.dims();
    let n = f.max_degree();
    let fs = evaluate_on(f, &orbit.points()[..orbit.len() - 1])?;
    let reduction = reduce_from_values(system, f, &fs, opts)?;
    let g = solve_path(&reduction.reduced)?;

    let germs = if reduction.trivial {
        g.clone()
    } else {
        g.par_iter()
            .zip(&reduction.h1)
            .map(|(gn, m)| Germ::from_linear(m, n)?.compose(gn))
            .collect::<Result<Vec<_>>>()?
    };
    let on_orbit = verify_on_orbit(&fs, &germs, ON_ORBIT_TOL)?;
    let data_poo = data_poo_check(system, f, opts.kmax)?;
    let data_poo_residual = data_poo.iter().map(DataPooOrbit::max_residual).fold(0.0, f64::max);

    let m = opts.seminorm_points.min(orbit.len());
    let pairs = PairSample::all_pairs(system, &orbit.points()[..m], opts.alpha);
    let coefficients = (2..=n)
        .flat_map(|k| degree_block(d, k))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(i, j)| {
            let values: Vec<Complex64> = g[..m].iter().map(|gn| gn.coeff(*i, j)).collect();
            let est = pairs.estimate(&values);
            CoefficientReport {
                component: *i,
                index: j.clone(),
                degree: j.degree(),
                seminorm: est.seminorm,
                sup_norm: est.sup_norm,
            }
        })
        .collect();

    let report = GermSolveReport {
        length: orbit.len(),
        dims: d,
        max_degree: n,
        alpha: opts.alpha,
        linear_trivial: reduction.trivial,
        matrix_poo_residual: reduction.matrix_poo.max_residual(),
        max_product_norm: reduction.max_product_norm,
        on_orbit,
        data_poo,
        data_poo_residual,
        seminorm_points: m,
        coefficients,
    };
    Ok((
        OrbitSolution {
            dims: d,
            max_degree: n,
            germs,
        },
        report,
    ))
}
