//! Closing and shadowing on the full shift, and its dense orbit.

use livsic::dynamics::{closeness_excess, shadowing_excess, BaseSystem, FullShift, ShiftPoint};
use livsic::error::Result;
use livsic::solver::{livsic_constant, net_cloud, Orbit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let shift = FullShift::new(2, 32)?;
    let cc = shift.closing_constants();
    println!(
        "closing constants: c = {}, lambda = {:.4}, delta0 = {}",
        cc.c, cc.lambda, cc.delta0
    );

    // Repeats the word 011 on [-6, 12) and is 1 elsewhere.
    let x = ShiftPoint::from_window(-6, [0, 1, 1].repeat(6), 1);
    let k = 3;
    println!("{x:?}: dist(x, T^3 x) = {}", shift.dist(&x, &shift.iterate(&x, k)));
    let p = shift.close_orbit(&x, k)?;
    let y = shift.shadowing_point(&x, &p, k)?;
    println!(
        "x returns at k = {k}; closeness excess {:.3e}, shadowing excess {:.3e}",
        closeness_excess(&shift, &x, &p, k),
        shadowing_excess(&shift, &x, &p, &y, k)
    );

    for len in [100, 500, 2000] {
        let orbit = Orbit::dense(&shift, len)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud: Vec<_> = (0..200).map(|_| shift.random_point(&mut rng)).collect();
        let radius = orbit.covering_radius(&shift, &cloud);
        match livsic_constant(&shift, 1.0, &orbit, &net_cloud(&shift)) {
            Ok(kc) => println!(
                "L = {len}: covering radius {radius:.4}, N_net = {}, K = {}",
                kc.n_net, kc.k
            ),
            Err(e) => println!("L = {len}: covering radius {radius:.4}, {e}"),
        }
    }
    Ok(())
}
