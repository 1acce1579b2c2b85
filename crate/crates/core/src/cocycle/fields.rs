//! Scalar observables `X -> C` used as coefficient fields of germ-valued maps.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BaseSystem, FullShift, ShiftPoint, ToralAutomorphism, TorusPoint};

/// A complex-valued function on the base space.
pub trait ScalarField<P>: Sync {
    fn eval(&self, x: &P) -> Complex64;

    /// A constant `C` with `|f(x) - f(y)| <= C dist(x, y)^α`, when known.
    fn holder_constant(&self, _alpha: f64) -> Option<f64> {
        None
    }
}

impl<P, F> ScalarField<P> for F
where
    F: Fn(&P) -> Complex64 + Sync,
{
    fn eval(&self, x: &P) -> Complex64 {
        self(x)
    }
}

/// A serializable field family closed under the affine operations the
/// generator needs.
pub trait CoefficientField<P>:
    ScalarField<P> + Clone + std::fmt::Debug + Serialize + DeserializeOwned + Send + Sync
{
    fn add_constant(&mut self, c: Complex64);

    fn scale(&mut self, s: Complex64);
}

/// A base system paired with the coefficient-field family that lives on it.
pub trait FieldSystem: BaseSystem {
    type Field: CoefficientField<Self::Point>;

    fn constant_field(&self, value: Complex64) -> Self::Field;

    /// A random field with values of modulus at most `amplitude`.
    fn random_field<R: Rng + ?Sized>(&self, rng: &mut R, amplitude: f64) -> Self::Field;
}

fn random_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.gen::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub freq: [i64; 2],
    pub re: f64,
    pub im: f64,
}

/// Trigonometric polynomial `Σ_m a_m e^{2πi m·x}` on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    pub terms: Vec<FourierTerm>,
}

impl FourierField {
    pub fn new(terms: impl IntoIterator<Item = ([i64; 2], Complex64)>) -> Self {
        Self {
            terms: terms
                .into_iter()
                .map(|(freq, a)| FourierTerm {
                    freq,
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    /// Lipschitz constant for the Euclidean torus metric, `Σ 2π|m||a_m|`.
    pub fn euclidean_lipschitz(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let m = ((t.freq[0] * t.freq[0] + t.freq[1] * t.freq[1]) as f64).sqrt();
                TAU * m * Complex64::new(t.re, t.im).norm()
            })
            .sum()
    }
}

impl ScalarField<TorusPoint> for FourierField {
    fn eval(&self, x: &TorusPoint) -> Complex64 {
        let [x0, x1] = x.coords();
        self.terms
            .iter()
            .map(|t| {
                let phase = TAU * (t.freq[0] as f64 * x0 + t.freq[1] as f64 * x1);
                Complex64::new(t.re, t.im) * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Lipschitz, hence `α`-Hölder for every `α` on a space of diameter 1.
    /// The normalized metric is `√2` times the Euclidean one.
    fn holder_constant(&self, _alpha: f64) -> Option<f64> {
        Some(self.euclidean_lipschitz() * FRAC_1_SQRT_2)
    }
}

impl CoefficientField<TorusPoint> for FourierField {
    fn add_constant(&mut self, c: Complex64) {
        match self.terms.iter_mut().find(|t| t.freq == [0, 0]) {
            Some(t) => {
                t.re += c.re;
                t.im += c.im;
            }
            None => self.terms.push(FourierTerm {
                freq: [0, 0],
                re: c.re,
                im: c.im,
            }),
        }
    }

    fn scale(&mut self, s: Complex64) {
        for t in &mut self.terms {
            let a = Complex64::new(t.re, t.im) * s;
            t.re = a.re;
            t.im = a.im;
        }
    }
}

/// Locally constant function of the central word `x_{-w} ... x_w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderField {
    pub alphabet: u8,
    pub window: usize,
    /// `[re, im]` per word, words in lexicographic order (`x_{-w}` most
    /// significant).
    pub values: Vec<[f64; 2]>,
}

impl CylinderField {
    pub fn new(alphabet: u8, window: usize, values: Vec<Complex64>) -> Self {
        assert_eq!(
            values.len(),
            (alphabet as usize).pow(2 * window as u32 + 1),
            "one value per central word"
        );
        Self {
            alphabet,
            window,
            values: values.into_iter().map(|v| [v.re, v.im]).collect(),
        }
    }

    pub fn value(&self, word_code: usize) -> Complex64 {
        let [re, im] = self.values[word_code];
        Complex64::new(re, im)
    }

    /// Largest difference between two values.
    pub fn oscillation(&self) -> f64 {
        let mut osc: f64 = 0.0;
        for a in &self.values {
            for b in &self.values {
                osc = osc.max(Complex64::new(a[0] - b[0], a[1] - b[1]).norm());
            }
        }
        osc
    }
}

impl ScalarField<ShiftPoint> for CylinderField {
    fn eval(&self, x: &ShiftPoint) -> Complex64 {
        let w = self.window as i64;
        let code = (-w..=w).fold(0usize, |acc, i| acc * self.alphabet as usize + x.symbol(i) as usize);
        self.value(code)
    }

    /// Points at distance below `2^{-w}` share the central word, so
    /// `C = 2^{αw} osc(f)` works.
    fn holder_constant(&self, alpha: f64) -> Option<f64> {
        Some(2f64.powf(alpha * self.window as f64) * self.oscillation())
    }
}

impl CoefficientField<ShiftPoint> for CylinderField {
    fn add_constant(&mut self, c: Complex64) {
        for v in &mut self.values {
            v[0] += c.re;
            v[1] += c.im;
        }
    }

    fn scale(&mut self, s: Complex64) {
        for v in &mut self.values {
            let a = Complex64::new(v[0], v[1]) * s;
            *v = [a.re, a.im];
        }
    }
}

/// Frequencies with Euclidean length at most 2.
const FOURIER_RADIUS: i64 = 2;

impl FieldSystem for ToralAutomorphism {
    type Field = FourierField;

    fn constant_field(&self, value: Complex64) -> FourierField {
        FourierField::new([([0, 0], value)])
    }

    fn random_field<R: Rng + ?Sized>(&self, rng: &mut R, amplitude: f64) -> FourierField {
        let freqs: Vec<[i64; 2]> = (-FOURIER_RADIUS..=FOURIER_RADIUS)
            .flat_map(|a| (-FOURIER_RADIUS..=FOURIER_RADIUS).map(move |b| [a, b]))
            .filter(|m| m[0] * m[0] + m[1] * m[1] <= FOURIER_RADIUS * FOURIER_RADIUS)
            .collect();
        let each = amplitude / freqs.len() as f64;
        FourierField::new(
            freqs
                .into_iter()
                .map(|m| (m, random_in_disk(rng, each)))
                .collect::<Vec<_>>(),
        )
    }
}

/// Window of generated cylinder fields.
pub const CYLINDER_WINDOW: usize = 1;

impl FieldSystem for FullShift {
    type Field = CylinderField;

    fn constant_field(&self, value: Complex64) -> CylinderField {
        CylinderField::new(self.alphabet(), 0, vec![value; self.alphabet() as usize])
    }

    fn random_field<R: Rng + ?Sized>(&self, rng: &mut R, amplitude: f64) -> CylinderField {
        let count = (self.alphabet() as usize).pow(2 * CYLINDER_WINDOW as u32 + 1);
        let values = (0..count).map(|_| random_in_disk(rng, amplitude)).collect();
        CylinderField::new(self.alphabet(), CYLINDER_WINDOW, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fourier_at_origin_sums_amplitudes() {
        let f = FourierField::new([([1, 0], Complex64::new(0.5, 0.0)), ([0, -2], Complex64::new(0.0, 2.0))]);
        let v = f.eval(&TorusPoint::new(0.0, 0.0));
        assert!((v - Complex64::new(0.5, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_lipschitz_hint_holds() {
        let cat = ToralAutomorphism::cat_map();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = cat.random_field(&mut rng, 1.0);
        let c = f.holder_constant(1.0).unwrap();
        assert!(c <= f.euclidean_lipschitz());
        for _ in 0..2000 {
            let x = cat.random_point(&mut rng);
            let y = cat.random_point(&mut rng);
            let d = cat.dist(&x, &y);
            assert!((f.eval(&x) - f.eval(&y)).norm() <= c * d + 1e-12);
        }
    }

    #[test]
    fn cylinder_holder_hint_holds() {
        let shift = FullShift::new(2, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = shift.random_field(&mut rng, 1.0);
        for alpha in [0.25, 0.5, 1.0] {
            let c = f.holder_constant(alpha).unwrap();
            for _ in 0..500 {
                let x = shift.random_point(&mut rng);
                let mut y_sym: Vec<u8> = x.window(16);
                let flip = rng.gen_range(0..y_sym.len());
                y_sym[flip] = 1 - y_sym[flip];
                let y = ShiftPoint::from_window(-16, y_sym, 0);
                let d = shift.dist(&x, &y);
                assert!((f.eval(&x) - f.eval(&y)).norm() <= c * d.powf(alpha) + 1e-12);
            }
        }
    }

    #[test]
    fn constants_and_affine_ops() {
        let shift = FullShift::new(3, 8).unwrap();
        let mut f = shift.constant_field(Complex64::new(2.0, 0.0));
        let x = shift.random_point(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(f.eval(&x), Complex64::new(2.0, 0.0));
        f.add_constant(Complex64::new(-1.0, 1.0));
        f.scale(Complex64::new(2.0, 0.0));
        assert_eq!(f.eval(&x), Complex64::new(2.0, 2.0));
        assert_eq!(f.oscillation(), 0.0);

        let cat = ToralAutomorphism::cat_map();
        let mut g = cat.constant_field(Complex64::new(1.0, 0.0));
        g.add_constant(Complex64::new(1.0, 0.0));
        assert_eq!(g.terms.len(), 1);
        assert_eq!(g.eval(&TorusPoint::new(0.3, 0.7)), Complex64::new(2.0, 0.0));
    }
}
