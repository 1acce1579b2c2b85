//! Recover a generated H from its coboundary F(x) = H(Tx)∘H(x)^-1.

use livsic::cocycle::{coboundary_from, generate_solution, GeneratorConfig, GermObservable};
use livsic::dynamics::{DenseOrbit, FullShift};
use livsic::error::Result;
use livsic::solver::{germ_solve, GermSolveOptions, Orbit};

fn main() -> Result<()> {
    let shift = FullShift::new(2, 64)?;
    let orbit = Orbit::dense(&shift, 2000)?;
    for dims in [1, 2] {
        let cfg = GeneratorConfig {
            dims,
            max_degree: 4,
            rho: 0.3,
            seed: 11,
            linear_coboundary: dims == 2,
        };
        let h = generate_solution(&shift, &shift.base_point(), &cfg)?;
        let f = coboundary_from(&shift, &h);
        let (solution, report) = germ_solve(
            &shift,
            &f,
            &orbit,
            &GermSolveOptions {
                kmax: 6,
                ..Default::default()
            },
        )?;
        let mut error: f64 = 0.0;
        for (g, p) in solution.germs.iter().zip(orbit.points()) {
            error = error.max(g.max_deviation(&h.evaluate(p)?));
        }
        println!(
            "d = {dims}: on-orbit residual {:.3e}, data POO {:.3e}, error vs H_true {:.3e}",
            report.on_orbit.residual, report.data_poo_residual, error
        );
        for c in report.coefficients.iter().take(4) {
            println!(
                "  g^{}_{}: [g] = {:.4}, |g| = {:.4}",
                c.component, c.index, c.seminorm, c.sup_norm
            );
        }
    }
    Ok(())
}
