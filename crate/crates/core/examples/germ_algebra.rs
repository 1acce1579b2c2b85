//! Compose, invert and inspect truncated germs.

use livsic::error::Result;
use livsic::germ::{fdb_homogeneous_p, Germ};
use livsic::series::{MultiIndex, TruncatedSeries};
use num_complex::Complex64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn main() -> Result<()> {
    let n = 4;
    // F(z, w) = (2z + w^2, w + z w)
    let f = Germ::new(vec![
        TruncatedSeries::from_terms(
            2,
            n,
            [(MultiIndex::new(&[1, 0]), c(2.0)), (MultiIndex::new(&[0, 2]), c(1.0))],
        )?,
        TruncatedSeries::from_terms(
            2,
            n,
            [(MultiIndex::new(&[0, 1]), c(1.0)), (MultiIndex::new(&[1, 1]), c(1.0))],
        )?,
    ])?;
    let g = f.invert()?;
    println!("F'(0) = {}", f.linear_part());
    println!("F^-1 coefficients:");
    for (i, comp) in g.components().iter().enumerate() {
        for (j, v) in comp.terms() {
            println!("  component {i}, index {j}: {v}");
        }
    }
    let round_trip = f.compose(&g)?;
    println!("|F∘F^-1 - id| = {:.3e}", round_trip.deviation_from_identity());

    let p = fdb_homogeneous_p(&MultiIndex::new(&[2, 1]), &MultiIndex::new(&[1, 1]), &f)?;
    println!("Faà di Bruno coefficient P((2,1),(1,1)) = {p}");
    Ok(())
}
