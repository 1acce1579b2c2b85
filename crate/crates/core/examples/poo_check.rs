//! The periodic orbit obstruction for coboundaries and perturbations.

use livsic::cocycle::{coboundary_from, generate_solution, poo_check, GeneratorConfig, Perturbed};
use livsic::dynamics::{DenseOrbit, FullShift, ToralAutomorphism, TorusPoint};
use livsic::error::Result;
use livsic::series::MultiIndex;
use num_complex::Complex64;

fn main() -> Result<()> {
    let cfg = GeneratorConfig {
        dims: 2,
        max_degree: 4,
        rho: 0.3,
        seed: 7,
        linear_coboundary: true,
    };

    let cat = ToralAutomorphism::cat_map();
    let h = generate_solution(&cat, &TorusPoint::new(0.0, 0.0), &cfg)?;
    let f = coboundary_from(&cat, &h);
    let report = poo_check(&cat, &f, 4, 1e-10)?;
    println!(
        "cat map coboundary: {} orbits, max residual {:.3e}",
        report.orbits.len(),
        report.max_residual()
    );

    let shift = FullShift::new(2, 32)?;
    let h = generate_solution(&shift, &shift.base_point(), &cfg)?;
    let f = coboundary_from(&shift, &h);
    println!(
        "shift coboundary: max residual {:.3e}",
        poo_check(&shift, &f, 6, 1e-10)?.max_residual()
    );

    let bumped = Perturbed {
        base: f,
        component: 1,
        index: MultiIndex::new(&[1, 1]),
        epsilon: Complex64::new(1e-3, 0.0),
    };
    let report = poo_check(&shift, &bumped, 4, 1e-10)?;
    for o in report.orbits.iter().filter(|o| o.period <= 2) {
        println!(
            "perturbed, period {}: residual {:.3e} pass {}",
            o.period, o.residual, o.pass
        );
    }
    Ok(())
}
