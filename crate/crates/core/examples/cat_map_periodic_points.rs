//! Periodic points and closing for the cat map.

use livsic::dynamics::{closeness_excess, BaseSystem, ToralAutomorphism, TorusPoint};
use livsic::error::Result;

fn main() -> Result<()> {
    let cat = ToralAutomorphism::cat_map();
    for k in 1..=5 {
        let (count, _) = cat.periodic_points_exact(k);
        println!("Fix(T^{k}) has {count} points, |det(A^k - I)| = {count}");
    }
    // A point close to its own image under T^3.
    let p = &cat.periodic_points(3)[4];
    let [x, y] = p.coords();
    let near = TorusPoint::new(x + 1e-4, y - 2e-4);
    let closed = cat.close_orbit(&near, 3)?;
    println!(
        "closing at period 3: dist(x, T^3 x) = {:.3e}, dist(T^3 p, p) = {:.3e}, closeness excess = {:.3e}",
        cat.dist(&near, &cat.iterate(&near, 3)),
        cat.dist(&closed, &cat.iterate(&closed, 3)),
        closeness_excess(&cat, &near, &closed, 3)
    );
    Ok(())
}
