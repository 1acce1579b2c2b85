//! The scalar cohomological equation phi(Tx) - phi(x) = psi(x) on a dense orbit.

use livsic::cocycle::{CoefficientField, FieldSystem, ScalarField};
use livsic::dynamics::{BaseSystem, DenseOrbit, FullShift, ShiftPoint};
use livsic::error::Result;
use livsic::solver::{livsic_constant, net_cloud, scalar_poo_check, scalar_solve, verify_scalar, Orbit, PairSample};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let shift = FullShift::new(2, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut phi0 = shift.random_field(&mut rng, 1.0);
    let at_x0 = phi0.eval(&shift.base_point());
    phi0.add_constant(-at_x0);
    let psi = |x: &ShiftPoint| phi0.eval(&shift.step(x)) - phi0.eval(x);
    println!(
        "periodic orbit check passes: {}",
        scalar_poo_check(&shift, &psi, 6, 1e-12).pass()
    );

    let orbit = Orbit::dense(&shift, 2000)?;
    let table = scalar_solve(&orbit, &psi)?;
    let error = table
        .values
        .iter()
        .zip(orbit.points())
        .map(|(v, p)| (v - phi0.eval(p)).norm())
        .fold(0.0, f64::max);
    println!("max |phi - phi_true| on the orbit: {error:.3e}");

    let constants = livsic_constant(&shift, 1.0, &orbit, &net_cloud(&shift))?;
    let pairs = PairSample::all_pairs(&shift, &orbit.points()[..800], 1.0);
    let data: Vec<_> = orbit.points().iter().map(psi).collect();
    let check = verify_scalar(&table, &data, &pairs, &constants);
    println!(
        "[phi] = {:.4}, bound K([psi] + |psi|) = {:.4}, K = {}",
        check.phi.seminorm, check.bound, constants.k
    );

    let one = |_: &ShiftPoint| Complex64::new(1.0, 0.0);
    let drift = verify_scalar(
        &scalar_solve(&orbit, &one)?,
        &vec![Complex64::new(1.0, 0.0); orbit.len()],
        &pairs,
        &constants,
    );
    println!("constant psi = 1 drifts: {}", drift.drift);

    let x = shift.random_point(&mut rng);
    let e = table.extend(&shift, &orbit, &x);
    println!(
        "off-orbit value {:.4}, true {:.4}, bound {:.4}",
        e.value,
        phi0.eval(&x),
        e.error_bound(&check.phi)
    );
    Ok(())
}
