//! Reduce a cocycle to one with identity linear part, and detect the
//! unsupported case of non-trivial linear dynamics.

use livsic::cocycle::{coboundary_from, generate_solution, GeneratorConfig, GermObservable};
use livsic::dynamics::{DenseOrbit, FullShift, ShiftPoint};
use livsic::error::Result;
use livsic::germ::{Germ, Matrix};
use livsic::solver::{reduce_linear_part, GermSolveOptions, Orbit};
use num_complex::Complex64;

struct Doubling;

impl GermObservable<ShiftPoint> for Doubling {
    fn dims(&self) -> usize {
        1
    }
    fn max_degree(&self) -> usize {
        3
    }
    fn evaluate(&self, _: &ShiftPoint) -> Result<Germ> {
        Germ::from_linear(&Matrix::from_element(1, 1, Complex64::new(2.0, 0.0)), 3)
    }
}

fn main() -> Result<()> {
    let shift = FullShift::new(2, 64)?;
    let orbit = Orbit::dense(&shift, 1000)?;
    let cfg = GeneratorConfig {
        dims: 2,
        max_degree: 3,
        rho: 0.3,
        seed: 5,
        linear_coboundary: true,
    };
    let h = generate_solution(&shift, &shift.base_point(), &cfg)?;
    let f = coboundary_from(&shift, &h);
    let opts = GermSolveOptions::default();
    let red = reduce_linear_part(&shift, &f, &orbit, &opts)?;
    let mut worst: f64 = 0.0;
    for (h1, p) in red.h1.iter().zip(orbit.points()) {
        worst = worst.max((h1 - h.evaluate(p)?.linear_part()).camax());
    }
    println!(
        "linear part trivial: {}, max |H1 - H_true'(0)| = {worst:.3e}",
        red.trivial
    );
    println!(
        "matrix POO residual {:.3e}, max product norm {:.3}",
        red.matrix_poo.max_residual(),
        red.max_product_norm
    );

    match reduce_linear_part(&shift, &Doubling, &orbit, &opts) {
        Ok(_) => println!("doubling cocycle accepted"),
        Err(e) => println!("doubling cocycle rejected: {e}"),
    }
    Ok(())
}
