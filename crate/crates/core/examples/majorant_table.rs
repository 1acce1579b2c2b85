//! The majorant series G_S and its growth rate R(S).

use livsic::error::Result;
use livsic::majorant::{reassembly_weights, solve_g_scaled};

fn main() -> Result<()> {
    let table = solve_g_scaled(1.0, 1, 6)?;
    for e in &table.entries {
        println!("S = 1, d = 1: g_{} = {}", e.index, e.value);
    }
    for s in [1.0, 10.0, 100.0] {
        for d in [1, 2] {
            let t = solve_g_scaled(s, d, 6)?;
            println!(
                "S = {s:>5}, d = {d}: {} coefficients, min {:.3e}, R(S) = {:.4e}, growth bound holds {}",
                t.entries.len(),
                t.min_value,
                t.growth_rate,
                t.growth_bound_holds()
            );
        }
    }
    let w = reassembly_weights(2, 6, 0.5)?;
    println!(
        "reassembly weights d = 2, delta = 0.5: finite {:.4}, tail {:.4}",
        w.finite_sum, w.tail
    );
    Ok(())
}
