//! Majorant series for the degree-by-degree solution.
//!
//! `J_S(Z) = Z − Σ_{|j|>1} S^{|j|−1} Z^j` (the same sum in every component)
//! has a compositional inverse `G_S` with positive real coefficients
//! `g^i_{S,j}`, growing at most geometrically in `|j|`. When the cocycle
//! coefficients are bounded by `κ^{|j|}` and `S` is large compared with `Kκ`,
//! the Hölder seminorms of the solved coefficients are dominated by
//! `g^i_{S,j}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::germ::Germ;
use crate::series::{enumerate_multiindices, multiindices_between, norm_2r, MultiIndex, TruncatedSeries};
use crate::solver::{CoefficientReport, LivsicConstants, PairSample};

/// `J_S` truncated at degree `n`.
pub fn build_j_scaled(s: f64, d: usize, n: usize) -> Result<Germ> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("scale S = {s} must be positive")));
    }
    let higher = multiindices_between(d, 2, n);
    let components = (0..d)
        .map(|i| {
            let terms = std::iter::once((MultiIndex::unit(d, i), Complex64::new(1.0, 0.0))).chain(
                higher
                    .iter()
                    .map(|j| (j.clone(), Complex64::new(-s.powi(j.degree() as i32 - 1), 0.0))),
            );
            TruncatedSeries::from_terms(d, n, terms)
        })
        .collect::<Result<Vec<_>>>()?;
    Germ::new(components)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantEntry {
    pub component: usize,
    pub index: MultiIndex,
    pub value: f64,
}

/// The coefficients `g^i_{S,j}`, `2 <= |j| <= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantTable {
    pub s: f64,
    pub dims: usize,
    pub max_degree: usize,
    pub entries: Vec<MajorantEntry>,
    /// `R(S) = max (g^i_{S,j})^{1/(|j|−1)}`.
    pub growth_rate: f64,
    /// Largest `|Im g^i_{S,j}|` met while reading off the inverse.
    pub max_imag: f64,
    /// Smallest `Re g^i_{S,j}`.
    pub min_value: f64,
}

impl MajorantTable {
    pub fn get(&self, component: usize, index: &MultiIndex) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.component == component && &e.index == index)
            .map(|e| e.value)
    }

    pub fn all_positive(&self) -> bool {
        self.min_value > 0.0
    }

    /// `g^i_{S,j} <= R(S)^{|j|−1}` for every entry, up to rounding.
    pub fn growth_bound_holds(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.value <= self.growth_rate.powi(e.index.degree() as i32 - 1) * (1.0 + 1e-12))
    }
}

/// `G_S = J_S^{-1}` by degree-by-degree inversion.
pub fn solve_g_scaled(s: f64, d: usize, n: usize) -> Result<MajorantTable> {
    let g = build_j_scaled(s, d, n)?.invert()?;
    let mut entries = Vec::new();
    let mut max_imag: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    let mut growth_rate: f64 = 0.0;
    for i in 0..d {
        for index in multiindices_between(d, 2, n) {
            let v = g.coeff(i, &index);
            max_imag = max_imag.max(v.im.abs());
            min_value = min_value.min(v.re);
            growth_rate = growth_rate.max(v.re.max(0.0).powf(1.0 / (index.degree() - 1) as f64));
            entries.push(MajorantEntry {
                component: i,
                index,
                value: v.re,
            });
        }
    }
    Ok(MajorantTable {
        s,
        dims: d,
        max_degree: n,
        growth_rate,
        max_imag,
        min_value: if entries.is_empty() { 0.0 } else { min_value },
        entries,
    })
}

/// `κ` with `‖a^i_j‖ <= κ^{|j|}` and `[a^i_j]_α <= κ^{|j|}` for `|j| >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocycleBounds {
    /// The certified grid value.
    pub kappa: f64,
    /// The smallest value satisfying the sampled inequalities.
    pub kappa_min: f64,
    pub constants: LivsicConstants,
}

impl CocycleBounds {
    /// The default scale `S = 4Kκ`.
    pub fn default_scale(&self) -> f64 {
        4.0 * self.constants.k * self.kappa
    }
}

/// Grid for `κ`: powers of `2^{1/KAPPA_GRID_STEPS}` from `KAPPA_GRID_MIN`.
pub const KAPPA_GRID_MIN: f64 = 1.0 / 256.0;
pub const KAPPA_GRID_STEPS: i32 = 16;

fn round_up_to_grid(x: f64) -> f64 {
    if x <= KAPPA_GRID_MIN {
        return KAPPA_GRID_MIN;
    }
    let steps = ((x / KAPPA_GRID_MIN).log2() * KAPPA_GRID_STEPS as f64 - 1e-9).ceil() as i32;
    let mut v = KAPPA_GRID_MIN * 2f64.powf(steps as f64 / KAPPA_GRID_STEPS as f64);
    while v < x {
        v *= 2f64.powf(1.0 / KAPPA_GRID_STEPS as f64);
    }
    v
}

/// Certifies `κ` for a cocycle from its values at the sample points of
/// `pairs`. Only coefficients of degree `>= 2` enter: the solver works with a
/// cocycle whose linear part has been reduced to the identity.
pub fn certify_kappa(values: &[Germ], pairs: &PairSample, constants: LivsicConstants) -> CocycleBounds {
    let mut kappa_min: f64 = 0.0;
    if let Some(first) = values.first() {
        let d = first.dims();
        for i in 0..d {
            for j in multiindices_between(d, 2, first.max_degree()) {
                let series: Vec<Complex64> = values.iter().map(|g| g.coeff(i, &j)).collect();
                let est = pairs.estimate(&series);
                let root = 1.0 / j.degree() as f64;
                kappa_min = kappa_min.max(est.sup_norm.powf(root)).max(est.seminorm.powf(root));
            }
        }
    }
    CocycleBounds {
        kappa: round_up_to_grid(kappa_min),
        kappa_min,
        constants,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationRow {
    pub component: usize,
    pub index: MultiIndex,
    pub degree: usize,
    pub seminorm: f64,
    pub sup_norm: f64,
    pub majorant: f64,
    /// `[h]_α <= g_{S,j}`.
    pub pass: bool,
    /// `‖h‖ <= [h]_α`, valid since `h(x_0) = 0`.
    pub sup_below_seminorm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub s: f64,
    pub rows: Vec<DominationRow>,
    /// `max ‖h^i_j‖^{1/(|j|−1)}`, compared with `R(S)`.
    pub norm_growth: f64,
    pub growth_rate: f64,
    pub pass: bool,
}

/// Compares the solved coefficients with the majorant table row by row.
pub fn check_majorant_domination(coefficients: &[CoefficientReport], table: &MajorantTable) -> DominationReport {
    let mut norm_growth: f64 = 0.0;
    let rows: Vec<DominationRow> = coefficients
        .iter()
        .map(|c| {
            let majorant = table.get(c.component, &c.index).unwrap_or(f64::NAN);
            if c.degree >= 2 {
                norm_growth = norm_growth.max(c.sup_norm.powf(1.0 / (c.degree - 1) as f64));
            }
            DominationRow {
                component: c.component,
                index: c.index.clone(),
                degree: c.degree,
                seminorm: c.seminorm,
                sup_norm: c.sup_norm,
                majorant,
                pass: c.seminorm <= majorant,
                sup_below_seminorm: c.sup_norm <= c.seminorm,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass && r.sup_below_seminorm) && norm_growth <= table.growth_rate;
    DominationReport {
        s: table.s,
        rows,
        norm_growth,
        growth_rate: table.growth_rate,
        pass,
    }
}

/// `Σ_{s>=1} binom(s+d−1, d−1) δ^{2s}` split at degree `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReassemblyWeights {
    pub finite_sum: f64,
    pub tail: f64,
    /// `(1 − δ²)^{−d} − 1`.
    pub total: f64,
}

pub fn reassembly_weights(d: usize, n: usize, delta: f64) -> Result<ReassemblyWeights> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} not in (0,1)")));
    }
    let x = delta * delta;
    let finite_sum = (1..=n)
        .map(|s| enumerate_multiindices(d, s).len() as f64 * x.powi(s as i32))
        .sum::<f64>();
    let total = (1.0 - x).powi(-(d as i32)) - 1.0;
    Ok(ReassemblyWeights {
        finite_sum,
        tail: (total - finite_sum).max(0.0),
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReassemblyReport {
    /// `max_{i,j} [t^i_j]_α R^{|j|}`.
    pub c: f64,
    /// `√d C (finite_sum + tail)^{1/2}`.
    pub c_prime: f64,
    pub weights: ReassemblyWeights,
    /// `max ‖F(x) − F(y)‖_{2,δR} / dist(x,y)^α` over the pairs.
    pub max_ratio: f64,
    pub pass: bool,
}

/// Checks that coefficientwise Hölder bounds `C / R^{|j|}` reassemble into
/// a Hölder bound for `x ↦ F(x)` in the `‖·‖_{2,δR}` norm.
pub fn reassembly_check(values: &[Germ], pairs: &PairSample, r: f64, delta: f64) -> Result<ReassemblyReport> {
    let first = values
        .first()
        .ok_or_else(|| Error::InvalidParameter("no sample values".into()))?;
    let (d, n) = (first.dims(), first.max_degree());
    let weights = reassembly_weights(d, n, delta)?;
    let mut c: f64 = 0.0;
    for i in 0..d {
        for j in multiindices_between(d, 1, n) {
            let series: Vec<Complex64> = values.iter().map(|g| g.coeff(i, &j)).collect();
            c = c.max(pairs.estimate(&series).seminorm * r.powi(j.degree() as i32));
        }
    }
    let c_prime = (d as f64).sqrt() * c * (weights.finite_sum + weights.tail).sqrt();
    let mut max_ratio: f64 = 0.0;
    for (a, b, w) in pairs.iter() {
        let diff = values[a]
            .components()
            .iter()
            .zip(values[b].components())
            .map(|(x, y)| x.sub(y))
            .collect::<Result<Vec<_>>>()?;
        max_ratio = max_ratio.max(norm_2r(&diff, delta * r) / w);
    }
    Ok(ReassemblyReport {
        c,
        c_prime,
        weights,
        max_ratio,
        pass: max_ratio <= c_prime * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeff(g: &Germ, j: &[u32]) -> Complex64 {
        g.coeff(0, &MultiIndex::new(j))
    }

    #[test]
    fn j_examples() {
        let j = build_j_scaled(1.0, 1, 3).unwrap();
        assert_eq!(coeff(&j, &[1]), Complex64::new(1.0, 0.0));
        assert_eq!(coeff(&j, &[2]), Complex64::new(-1.0, 0.0));
        assert_eq!(coeff(&j, &[3]), Complex64::new(-1.0, 0.0));
        let j2 = build_j_scaled(2.0, 1, 2).unwrap();
        assert_eq!(coeff(&j2, &[2]), Complex64::new(-2.0, 0.0));
        for s in [0.5, 3.0] {
            let j = build_j_scaled(s, 2, 3).unwrap();
            assert!(j.deviation_from_identity() > 0.0);
            assert_eq!(j.linear_part(), Germ::identity(2, 3).linear_part());
        }
        assert!(build_j_scaled(0.0, 1, 2).is_err());
    }

    #[test]
    fn g_examples() {
        let t = solve_g_scaled(1.0, 1, 3).unwrap();
        assert_eq!(t.get(0, &MultiIndex::new(&[2])), Some(1.0));
        assert_eq!(t.get(0, &MultiIndex::new(&[3])), Some(3.0));
        for s in [1.0, 10.0, 100.0] {
            for d in 1..=2 {
                let t = solve_g_scaled(s, d, 6).unwrap();
                assert!(t.all_positive());
                assert!(t.max_imag <= 1e-14);
                assert!(t.growth_bound_holds());
            }
        }
    }

    #[test]
    fn g_inverts_j() {
        for s in [1.0, 4.0] {
            let j = build_j_scaled(s, 2, 5).unwrap();
            let g = j.invert().unwrap();
            assert!(j.compose(&g).unwrap().deviation_from_identity() <= 1e-10);
        }
    }

    #[test]
    fn g_monotone_in_s() {
        let tables: Vec<_> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&s| solve_g_scaled(s, 2, 5).unwrap())
            .collect();
        for w in tables.windows(2) {
            for (a, b) in w[0].entries.iter().zip(&w[1].entries) {
                assert!(a.value <= b.value);
            }
        }
    }

    #[test]
    fn weights() {
        let w = reassembly_weights(1, 60, 0.5).unwrap();
        assert!((w.total - 1.0 / 3.0).abs() < 1e-15);
        assert!((w.finite_sum + w.tail - 1.0 / 3.0).abs() < 1e-15);
        let w2 = reassembly_weights(2, 3, 0.5).unwrap();
        // 2 δ² + 3 δ⁴ + 4 δ⁶
        assert!((w2.finite_sum - (0.5 + 3.0 / 16.0 + 4.0 / 64.0)).abs() < 1e-15);
        assert!((w2.total - (16.0 / 9.0 - 1.0)).abs() < 1e-15);
        assert!(reassembly_weights(1, 3, 1.0).is_err());
        assert!(reassembly_weights(1, 3, 0.0).is_err());
    }

    #[test]
    fn grid_rounding() {
        assert_eq!(round_up_to_grid(0.0), KAPPA_GRID_MIN);
        for x in [0.01, 0.3, 0.999, 1.0, 2.5] {
            let v = round_up_to_grid(x);
            assert!(v >= x && v < x * 2f64.powf(1.0 / KAPPA_GRID_STEPS as f64) * (1.0 + 1e-12));
        }
    }
}
