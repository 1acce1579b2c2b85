use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{BaseSystem, ClosingConstants, DenseOrbit};
use crate::error::{Error, Result};

pub(crate) const DEFAULT_HORIZON: usize = 64;

/// Bi-infinite symbol sequences, given by a rule rather than stored.
#[derive(Debug)]
enum Sequence {
    /// `word[i mod len]`.
    Periodic(Vec<u8>),
    /// Zeros at negative positions; at positions `>= 0`, all words over the
    /// alphabet concatenated in length-lexicographic order.
    Enumeration { alphabet: u8 },
    /// `symbols[i - start]` inside the window, `fill` outside.
    Window { start: i64, symbols: Vec<u8>, fill: u8 },
    /// `past` below `cut`, `future` from `cut` on.
    Spliced {
        past: ShiftPoint,
        future: ShiftPoint,
        cut: i64,
    },
}

impl Sequence {
    fn at(&self, i: i64) -> u8 {
        match self {
            Sequence::Periodic(word) => word[i.rem_euclid(word.len() as i64) as usize],
            Sequence::Enumeration { alphabet } => enumeration_symbol(*alphabet, i),
            Sequence::Window { start, symbols, fill } => {
                let k = i - start;
                if k >= 0 && (k as usize) < symbols.len() {
                    symbols[k as usize]
                } else {
                    *fill
                }
            }
            Sequence::Spliced { past, future, cut } => {
                if i < *cut {
                    past.symbol(i)
                } else {
                    future.symbol(i)
                }
            }
        }
    }
}

/// Symbol at position `i` of the concatenation of all words, shortest first,
/// lexicographic within each length.
fn enumeration_symbol(m: u8, i: i64) -> u8 {
    if i < 0 {
        return 0;
    }
    let m = m as u128;
    let mut pos = i as u128;
    let mut len: u32 = 1;
    loop {
        let count = m.pow(len);
        let block = count * len as u128;
        if pos < block {
            let word = pos / len as u128;
            let digit = (pos % len as u128) as u32;
            return ((word / m.pow(len - 1 - digit)) % m) as u8;
        }
        pos -= block;
        len += 1;
    }
}

/// A point of the two-sided shift: the sequence `n ↦ seq(origin + n)`.
#[derive(Clone)]
pub struct ShiftPoint {
    seq: Arc<Sequence>,
    origin: i64,
}

impl ShiftPoint {
    /// Symbol `x_i`.
    pub fn symbol(&self, i: i64) -> u8 {
        self.seq.at(self.origin + i)
    }

    /// `x_{-r}, ..., x_r`.
    pub fn window(&self, r: usize) -> Vec<u8> {
        let r = r as i64;
        (-r..=r).map(|i| self.symbol(i)).collect()
    }

    /// The periodic point repeating `word` with `x_0 = word[0]`.
    pub fn periodic(word: Vec<u8>) -> Self {
        assert!(!word.is_empty(), "periodic word must be non-empty");
        Self {
            seq: Arc::new(Sequence::Periodic(word)),
            origin: 0,
        }
    }

    /// The point with `x_{start + n} = symbols[n]` and `fill` elsewhere.
    pub fn from_window(start: i64, symbols: Vec<u8>, fill: u8) -> Self {
        Self {
            seq: Arc::new(Sequence::Window { start, symbols, fill }),
            origin: 0,
        }
    }

    fn shifted(&self, by: i64) -> Self {
        Self {
            seq: Arc::clone(&self.seq),
            origin: self.origin + by,
        }
    }
}

impl fmt::Debug for ShiftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: String = (-8..0).map(|i| char::from(b'0' + self.symbol(i))).collect();
        let right: String = (0..8).map(|i| char::from(b'0' + self.symbol(i))).collect();
        write!(f, "ShiftPoint(…{left}|{right}…)")
    }
}

/// The two-sided full shift on `m` symbols with metric `2^{-n}`, `n` the
/// smallest `|i|` where the sequences differ.
///
/// Comparisons look at `|i| <= horizon`; sequences agreeing there are at
/// distance 0.
#[derive(Debug, Clone)]
pub struct FullShift {
    alphabet: u8,
    horizon: usize,
    enumeration: Arc<Sequence>,
}

impl FullShift {
    pub fn new(alphabet: u8, horizon: usize) -> Result<Self> {
        if !(2..=10).contains(&alphabet) {
            return Err(Error::InvalidParameter(format!(
                "alphabet size {alphabet} outside 2..=10"
            )));
        }
        if horizon < 4 {
            return Err(Error::InvalidParameter(format!("horizon {horizon} below 4")));
        }
        Ok(Self {
            alphabet,
            horizon,
            enumeration: Arc::new(Sequence::Enumeration { alphabet }),
        })
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

impl BaseSystem for FullShift {
    type Point = ShiftPoint;

    fn step(&self, x: &ShiftPoint) -> ShiftPoint {
        x.shifted(1)
    }

    fn step_inverse(&self, x: &ShiftPoint) -> ShiftPoint {
        x.shifted(-1)
    }

    fn dist(&self, x: &ShiftPoint, y: &ShiftPoint) -> f64 {
        for n in 0..=self.horizon as i64 {
            if x.symbol(n) != y.symbol(n) || x.symbol(-n) != y.symbol(-n) {
                return 0.5f64.powi(n as i32);
            }
        }
        0.0
    }

    /// With the `2^{-n}` metric the repeated word agrees with `x` on a window
    /// that loses one symbol per step towards either end, so `λ = log 2`.
    /// `c = 4` leaves room over the sharp value 1.
    fn closing_constants(&self) -> ClosingConstants {
        ClosingConstants {
            c: 4.0,
            lambda: std::f64::consts::LN_2,
            delta0: 0.125,
        }
    }

    fn periodic_points(&self, k: usize) -> Vec<ShiftPoint> {
        assert!(k >= 1);
        let m = self.alphabet as usize;
        let total = m.pow(k as u32);
        (0..total)
            .map(|mut code| {
                let mut word = vec![0u8; k];
                for slot in word.iter_mut().rev() {
                    *slot = (code % m) as u8;
                    code /= m;
                }
                ShiftPoint::periodic(word)
            })
            .collect()
    }

    fn close_orbit(&self, x: &ShiftPoint, k: usize) -> Result<ShiftPoint> {
        let gap = self.dist(x, &x.shifted(k as i64));
        if k == 0 || !(gap < self.closing_constants().delta0) {
            return Err(Error::Precondition(format!(
                "dist(x, T^{k} x) = {gap} is not below delta0"
            )));
        }
        Ok(ShiftPoint::periodic((0..k as i64).map(|i| x.symbol(i)).collect()))
    }

    /// `x` up to time `k`, `p` from then on.
    fn shadowing_point(&self, x: &ShiftPoint, p: &ShiftPoint, k: usize) -> Result<ShiftPoint> {
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        Ok(ShiftPoint {
            seq: Arc::new(Sequence::Spliced {
                past: x.clone(),
                future: p.clone(),
                cut: k as i64,
            }),
            origin: 0,
        })
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> ShiftPoint {
        let h = self.horizon as i64;
        let symbols = (-h..=h).map(|_| rng.gen_range(0..self.alphabet)).collect();
        ShiftPoint::from_window(-h, symbols, 0)
    }
}

impl DenseOrbit for FullShift {
    fn dense_orbit(&self, n: usize) -> ShiftPoint {
        ShiftPoint {
            seq: Arc::clone(&self.enumeration),
            origin: n as i64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{empirical_density, is_exponentially_close, shadowing_excess};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn shift() -> FullShift {
        FullShift::new(2, 32).unwrap()
    }

    #[test]
    fn enumeration_prefix() {
        let s: Vec<u8> = (0..16).map(|i| enumeration_symbol(2, i)).collect();
        // 0 1 | 00 01 10 11 | 000 001 ...
        assert_eq!(s, [0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 1]);
        assert_eq!(enumeration_symbol(2, -5), 0);
    }

    #[test]
    fn dist_examples() {
        let sys = shift();
        let x = ShiftPoint::periodic(vec![0, 1, 1]);
        assert_eq!(sys.dist(&x, &x.clone()), 0.0);
        let a = ShiftPoint::from_window(-1, vec![1, 1, 1, 0], 0);
        let b = ShiftPoint::from_window(-1, vec![1, 1, 1, 1], 0);
        assert_eq!(sys.dist(&a, &b), 0.25);
        let c = ShiftPoint::from_window(0, vec![1], 0);
        assert_eq!(sys.dist(&c, &ShiftPoint::periodic(vec![0])), 1.0);
    }

    #[test]
    fn metric_axioms_sampled() {
        let sys = shift();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // random points agree often near the center when built from short windows
        let pts: Vec<_> = (0..40)
            .map(|_| {
                let symbols = (0..7).map(|_| rng.gen_range(0..2)).collect();
                ShiftPoint::from_window(-3, symbols, 0)
            })
            .collect();
        for a in &pts {
            for b in &pts {
                assert_eq!(sys.dist(a, b), sys.dist(b, a));
                for c in pts.iter().take(10) {
                    assert!(sys.dist(a, c) <= sys.dist(a, b) + sys.dist(b, c));
                }
            }
        }
    }

    #[test]
    fn close_orbit_examples() {
        let sys = shift();
        let p = ShiftPoint::periodic(vec![1, 0, 1]);
        let q = sys.close_orbit(&p, 3).unwrap();
        assert_eq!(sys.dist(&p, &q), 0.0);

        // ...0 1010101|0101010 01 0...: "10" repeats around the origin
        let mut symbols: Vec<u8> = [1, 0].repeat(7);
        symbols.extend([0, 1]);
        let x = ShiftPoint::from_window(-6, symbols, 0);
        let p = sys.close_orbit(&x, 2).unwrap();
        assert_eq!(p.window(3), ShiftPoint::periodic(vec![1, 0]).window(3));
        assert!(is_exponentially_close(&sys, &x, &p, 2));
        assert_eq!(sys.dist(&sys.iterate(&p, 2), &p), 0.0);

        let far = ShiftPoint::from_window(0, vec![1, 0], 0);
        assert!(sys.close_orbit(&far, 1).is_err());
    }

    #[test]
    fn shadowing_point_inequalities() {
        let sys = shift();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let k = rng.gen_range(1..12usize);
            let word: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2)).collect();
            let noise: Vec<u8> = (0..60).map(|_| rng.gen_range(0..2)).collect();
            let mut symbols = noise.clone();
            for i in 0..(3 * k + 8) {
                symbols[20 - 4 + i] = word[i % k];
            }
            let x = ShiftPoint::from_window(-20, symbols, 1);
            let p = sys.close_orbit(&x, k).unwrap();
            assert!(is_exponentially_close(&sys, &x, &p, k));
            let y = sys.shadowing_point(&x, &p, k).unwrap();
            assert!(shadowing_excess(&sys, &x, &p, &y, k) <= 0.0);
        }
    }

    #[test]
    fn dense_orbit_consistency() {
        let sys = shift();
        assert_eq!(sys.dist(&sys.dense_orbit(0), &sys.base_point()), 0.0);
        for n in 0..50 {
            assert_eq!(
                sys.dense_orbit(n + 1).window(10),
                sys.step(&sys.dense_orbit(n)).window(10)
            );
        }
    }

    #[test]
    fn all_three_cylinders_visited_early() {
        let sys = shift();
        let mut seen = std::collections::BTreeSet::new();
        let mut first_full = None;
        for n in 0..=46 {
            seen.insert(sys.dense_orbit(n).window(1));
            if seen.len() == 8 && first_full.is_none() {
                first_full = Some(n);
            }
        }
        assert!(first_full.is_some_and(|n| n <= 46));
    }

    #[test]
    fn dense_orbit_covers_random_samples() {
        let sys = shift();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let orbit: Vec<_> = (0..2000).map(|n| sys.dense_orbit(n)).collect();
        let samples: Vec<_> = (0..100).map(|_| sys.random_point(&mut rng)).collect();
        assert!(empirical_density(&sys, &orbit, &samples).unwrap() <= 0.125);
    }

    #[test]
    fn periodic_points_count() {
        let sys = FullShift::new(3, 16).unwrap();
        let pts = sys.periodic_points(3);
        assert_eq!(pts.len(), 27);
        for p in &pts {
            assert_eq!(sys.dist(&sys.iterate(p, 3), p), 0.0);
        }
    }
}
