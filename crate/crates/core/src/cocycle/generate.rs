//! Seeded random germ observables with a known normalization, used as ground
//! truth `H` for coboundary cocycles.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CoefficientEntry, CoefficientField, FieldGerm, FieldSystem, ScalarField};
use crate::error::{Error, Result};
use crate::series::{enumerate_multiindices, MultiIndex};

/// Raw field amplitude before the `ρ^{|j|}` scaling. After recentering at
/// `x_0` every coefficient satisfies `|h^i_j| <= ρ^{|j|}`.
const FIELD_AMPLITUDE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub dims: usize,
    pub max_degree: usize,
    /// Amplitude scale `ρ` in `[0, 1)`.
    pub rho: f64,
    pub seed: u64,
    /// Give `H` a nonconstant linear part `I + ρ B(x)/d` with `B(x_0) = 0`.
    pub linear_coboundary: bool,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.max_degree == 0 {
            return Err(Error::InvalidParameter("dims and max_degree must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        Ok(())
    }
}

/// A random `H` with `H(x_0) = id`: the linear part is the identity at `x_0`
/// and every higher coefficient vanishes there.
///
/// Fields are drawn in component-major, graded-lex order from a ChaCha8
/// stream seeded by `seed`, so the result is reproducible.
pub fn generate_solution<S: FieldSystem>(
    system: &S,
    x0: &S::Point,
    cfg: &GeneratorConfig,
) -> Result<FieldGerm<S::Field>> {
    cfg.validate()?;
    let d = cfg.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut entries = Vec::new();
    for i in 0..d {
        for index in (1..=cfg.max_degree).flat_map(|s| enumerate_multiindices(d, s)) {
            let degree = index.degree();
            let mut field = system.random_field(&mut rng, FIELD_AMPLITUDE);
            let at_x0 = field.eval(x0);
            field.add_constant(-at_x0);
            let diagonal = degree == 1 && index == MultiIndex::unit(d, i);
            if degree == 1 {
                let scale = if cfg.linear_coboundary { cfg.rho / d as f64 } else { 0.0 };
                field.scale(Complex64::new(scale, 0.0));
                if diagonal {
                    field.add_constant(Complex64::new(1.0, 0.0));
                }
            } else {
                field.scale(Complex64::new(cfg.rho.powi(degree as i32), 0.0));
            }
            entries.push(CoefficientEntry {
                component: i,
                index,
                field,
            });
        }
    }
    FieldGerm::new(d, cfg.max_degree, entries)
}
