//! Germ-valued cocycles over a base system.
//!
//! A cocycle is given by its time-one map `x ↦ F(x)`, a germ at each point of
//! the base. Products along orbits compose these germs,
//! `F(n, x) = F(T^{n-1} x) ∘ ... ∘ F(x)`, and a coboundary is a cocycle of the
//! form `F(x) = H(Tx) ∘ H(x)^{-1}`. Along a periodic orbit a coboundary product
//! telescopes to the identity germ; [`poo_check`] measures how far a cocycle
//! is from that.

mod fields;
mod generate;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{periodic_orbits, BaseSystem};
use crate::error::{Error, Result};
use crate::germ::Germ;
use crate::series::{MultiIndex, TruncatedSeries};

pub use fields::{
    CoefficientField, CylinderField, FieldSystem, FourierField, FourierTerm, ScalarField, CYLINDER_WINDOW,
};
pub use generate::{generate_solution, GeneratorConfig};

/// A map from the base space into truncated germs.
pub trait GermObservable<P>: Sync {
    fn dims(&self) -> usize;

    fn max_degree(&self) -> usize;

    fn evaluate(&self, x: &P) -> Result<Germ>;
}

impl<P, G: GermObservable<P> + ?Sized> GermObservable<P> for &G {
    fn dims(&self) -> usize {
        (**self).dims()
    }

    fn max_degree(&self) -> usize {
        (**self).max_degree()
    }

    fn evaluate(&self, x: &P) -> Result<Germ> {
        (**self).evaluate(x)
    }
}

/// One coefficient field `t^i_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry<F> {
    pub component: usize,
    pub index: MultiIndex,
    pub field: F,
}

/// A germ observable given by coefficient fields `t^i_j: X -> C`,
/// `1 <= |j| <= N`. Missing fields are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldGermRecord<F>", bound(deserialize = "F: Deserialize<'de>"))]
pub struct FieldGerm<F> {
    dims: usize,
    max_degree: usize,
    entries: Vec<CoefficientEntry<F>>,
}

#[derive(Deserialize)]
struct FieldGermRecord<F> {
    dims: usize,
    max_degree: usize,
    entries: Vec<CoefficientEntry<F>>,
}

impl<F> TryFrom<FieldGermRecord<F>> for FieldGerm<F> {
    type Error = Error;

    fn try_from(rec: FieldGermRecord<F>) -> Result<Self> {
        FieldGerm::new(rec.dims, rec.max_degree, rec.entries)
    }
}

impl<F> FieldGerm<F> {
    /// Entries are sorted into canonical `(component, index)` order; duplicates
    /// and out-of-range indices are rejected.
    pub fn new(dims: usize, max_degree: usize, mut entries: Vec<CoefficientEntry<F>>) -> Result<Self> {
        if dims == 0 || max_degree == 0 {
            return Err(Error::InvalidParameter("dims and max_degree must be >= 1".into()));
        }
        for e in &entries {
            if e.component >= dims || e.index.dims() != dims {
                return Err(Error::DimensionMismatch {
                    left: dims,
                    right: e.index.dims().max(e.component + 1),
                });
            }
            if e.index.degree() == 0 || e.index.degree() > max_degree {
                return Err(Error::InvalidParameter(format!(
                    "coefficient index {} outside degrees 1..={max_degree}",
                    e.index
                )));
            }
        }
        entries.sort_by(|a, b| (a.component, &a.index).cmp(&(b.component, &b.index)));
        if entries
            .windows(2)
            .any(|w| w[0].component == w[1].component && w[0].index == w[1].index)
        {
            return Err(Error::InvalidParameter("duplicate coefficient field".into()));
        }
        Ok(Self {
            dims,
            max_degree,
            entries,
        })
    }

    pub fn entries(&self) -> &[CoefficientEntry<F>] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut CoefficientEntry<F>> {
        self.entries.iter_mut()
    }

    pub fn field(&self, component: usize, index: &MultiIndex) -> Option<&F> {
        self.entries
            .iter()
            .find(|e| e.component == component && &e.index == index)
            .map(|e| &e.field)
    }
}

impl<P, F: ScalarField<P> + Sync> GermObservable<P> for FieldGerm<F> {
    fn dims(&self) -> usize {
        self.dims
    }

    fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn evaluate(&self, x: &P) -> Result<Germ> {
        let mut components = vec![TruncatedSeries::zero(self.dims, self.max_degree); self.dims];
        for e in &self.entries {
            components[e.component].set(&e.index, e.field.eval(x))?;
        }
        Germ::new(components)
    }
}

/// `x ↦ H(Tx) ∘ H(x)^{-1}`.
pub struct Coboundary<'a, S, H> {
    system: &'a S,
    h: &'a H,
}

/// The coboundary cocycle of a germ observable `H`.
pub fn coboundary_from<'a, S, H>(system: &'a S, h: &'a H) -> Coboundary<'a, S, H>
where
    S: BaseSystem,
    H: GermObservable<S::Point>,
{
    Coboundary { system, h }
}

impl<S: BaseSystem, H: GermObservable<S::Point>> GermObservable<S::Point> for Coboundary<'_, S, H> {
    fn dims(&self) -> usize {
        self.h.dims()
    }

    fn max_degree(&self) -> usize {
        self.h.max_degree()
    }

    fn evaluate(&self, x: &S::Point) -> Result<Germ> {
        let next = self.h.evaluate(&self.system.step(x))?;
        next.compose(&self.h.evaluate(x)?.invert()?)
    }
}

/// `G` with the constant `epsilon` added to one coefficient everywhere.
pub struct Perturbed<G> {
    pub base: G,
    pub component: usize,
    pub index: MultiIndex,
    pub epsilon: Complex64,
}

impl<P, G: GermObservable<P>> GermObservable<P> for Perturbed<G> {
    fn dims(&self) -> usize {
        self.base.dims()
    }

    fn max_degree(&self) -> usize {
        self.base.max_degree()
    }

    fn evaluate(&self, x: &P) -> Result<Germ> {
        let mut comps = self.base.evaluate(x)?.components().to_vec();
        comps[self.component].add_to(&self.index, self.epsilon)?;
        Germ::new(comps)
    }
}

/// Serializable description of a cocycle over a system with field type `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de>"))]
pub enum CocycleSpec<F> {
    /// `F` given directly by coefficient fields.
    Fields { germ: FieldGerm<F> },
    /// `F(x) = H(Tx) ∘ H(x)^{-1}`.
    Coboundary { h: FieldGerm<F> },
    /// Another cocycle with a constant added to one coefficient.
    Perturbed {
        base: Box<CocycleSpec<F>>,
        component: usize,
        index: MultiIndex,
        epsilon: [f64; 2],
    },
}

impl<F> CocycleSpec<F> {
    pub fn bind<'a, S>(&'a self, system: &'a S) -> BoundCocycle<'a, S, F>
    where
        S: BaseSystem,
        F: ScalarField<S::Point>,
    {
        BoundCocycle { system, spec: self }
    }

    pub fn dims(&self) -> usize {
        match self {
            CocycleSpec::Fields { germ } => germ.dims,
            CocycleSpec::Coboundary { h } => h.dims,
            CocycleSpec::Perturbed { base, .. } => base.dims(),
        }
    }

    pub fn max_degree(&self) -> usize {
        match self {
            CocycleSpec::Fields { germ } => germ.max_degree,
            CocycleSpec::Coboundary { h } => h.max_degree,
            CocycleSpec::Perturbed { base, .. } => base.max_degree(),
        }
    }
}

/// A [`CocycleSpec`] evaluated over a concrete system.
pub struct BoundCocycle<'a, S, F> {
    system: &'a S,
    spec: &'a CocycleSpec<F>,
}

impl<S, F> GermObservable<S::Point> for BoundCocycle<'_, S, F>
where
    S: BaseSystem,
    F: ScalarField<S::Point> + Sync,
{
    fn dims(&self) -> usize {
        self.spec.dims()
    }

    fn max_degree(&self) -> usize {
        self.spec.max_degree()
    }

    fn evaluate(&self, x: &S::Point) -> Result<Germ> {
        match self.spec {
            CocycleSpec::Fields { germ } => germ.evaluate(x),
            CocycleSpec::Coboundary { h } => coboundary_from(self.system, h).evaluate(x),
            CocycleSpec::Perturbed {
                base,
                component,
                index,
                epsilon,
            } => Perturbed {
                base: base.bind(self.system),
                component: *component,
                index: index.clone(),
                epsilon: Complex64::new(epsilon[0], epsilon[1]),
            }
            .evaluate(x),
        }
    }
}

/// `F(n, x) = F(T^{n-1} x) ∘ ... ∘ F(x)`; the identity for `n = 0`.
pub fn cocycle_product<S, G>(system: &S, f: &G, n: usize, x: &S::Point) -> Result<Germ>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    let mut out = Germ::identity(f.dims(), f.max_degree());
    let mut p = x.clone();
    for _ in 0..n {
        out = f.evaluate(&p)?.compose(&out)?;
        p = system.step(&p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooOrbit {
    pub period: usize,
    pub representative: String,
    /// Largest coefficient modulus of `F(k, p) - id`.
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooReport {
    pub tol: f64,
    pub orbits: Vec<PooOrbit>,
}

impl PooReport {
    pub fn pass(&self) -> bool {
        self.orbits.iter().all(|o| o.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.orbits.iter().map(|o| o.residual).fold(0.0, f64::max)
    }

    /// One JSON object per orbit.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for o in &self.orbits {
            serde_json::to_writer(&mut out, o)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Residual of the cocycle product around every periodic orbit of minimal
/// period `k <= kmax`. Orbits are reported by period, then in the system's
/// periodic-point order.
pub fn poo_check<S, G>(system: &S, f: &G, kmax: usize, tol: f64) -> Result<PooReport>
where
    S: BaseSystem,
    G: GermObservable<S::Point> + ?Sized,
{
    let mut orbits = Vec::new();
    for k in 1..=kmax {
        let reps: Vec<S::Point> = periodic_orbits(system, k)
            .into_iter()
            .map(|mut o| o.swap_remove(0))
            .collect();
        let residuals = reps
            .par_iter()
            .map(|p| Ok(cocycle_product(system, f, k, p)?.deviation_from_identity()))
            .collect::<Result<Vec<f64>>>()?;
        orbits.extend(reps.iter().zip(residuals).map(|(p, residual)| PooOrbit {
            period: k,
            representative: format!("{p:?}"),
            residual,
            pass: residual <= tol,
        }));
    }
    Ok(PooReport { tol, orbits })
}
