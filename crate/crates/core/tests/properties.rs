mod oracle;

use livsic::cocycle::{coboundary_from, cocycle_product, generate_solution, FieldSystem, GeneratorConfig, ScalarField};
use livsic::dynamics::{
    is_exponentially_close, BaseSystem, DenseOrbit, FullShift, ShiftPoint, ToralAutomorphism, TorusPoint,
};
use livsic::germ::Germ;
use livsic::majorant::{build_j_scaled, solve_g_scaled};
use livsic::series::{enumerate_multiindices, norm_2r, MultiIndex, TruncatedSeries};
use livsic::solver::{germ_solve, scalar_solve, GermSolveOptions, Orbit};
use oracle::{c, random_germ, random_positive_germ, random_series};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Series with small integer coefficients, so products are exact.
fn integer_series(rng: &mut ChaCha8Rng, d: usize, n: usize) -> TruncatedSeries {
    let mut terms = Vec::new();
    for j in (1..=n).flat_map(|s| enumerate_multiindices(d, s)) {
        if rng.gen_bool(0.6) {
            terms.push((j, c(rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64)));
        }
    }
    TruncatedSeries::from_terms(d, n, terms).unwrap()
}

#[test]
fn multiindex_counts_match_brute_force() {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for d in 1..=4 {
        for s in 0..=10 {
            let ours: Vec<Vec<u32>> = enumerate_multiindices(d, s)
                .iter()
                .map(|j| j.entries().to_vec())
                .collect();
            let mut brute = oracle::brute_multiindices(d, s);
            assert_eq!(ours.len(), binom(s + d - 1, d - 1));
            let mut sorted = ours.clone();
            sorted.sort();
            brute.sort();
            assert_eq!(sorted, brute, "d={d} s={s}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiply_commutative_and_associative(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut r = rng(seed);
        let (a, b, e) = (integer_series(&mut r, d, n), integer_series(&mut r, d, n), integer_series(&mut r, d, n));
        prop_assert_eq!(a.multiply(&b).unwrap(), b.multiply(&a).unwrap());
        prop_assert_eq!(
            a.multiply(&b).unwrap().multiply(&e).unwrap(),
            a.multiply(&b.multiply(&e).unwrap()).unwrap()
        );
    }

    #[test]
    fn norm_2r_is_a_monotone_norm(seed in any::<u64>(), d in 1usize..=3, r1 in 0.1f64..2.0, r2 in 0.1f64..2.0) {
        let mut g = rng(seed);
        let a = vec![random_series(&mut g, d, 4, 1, 1.0)];
        let b = vec![random_series(&mut g, d, 4, 1, 1.0)];
        let lambda = oracle::random_complex(&mut g, 3.0);
        let sum = vec![a[0].add(&b[0]).unwrap()];
        prop_assert!(norm_2r(&sum, r1) <= norm_2r(&a, r1) + norm_2r(&b, r1) + 1e-12);
        let scaled = vec![a[0].scale(lambda)];
        prop_assert!((norm_2r(&scaled, r1) - lambda.norm() * norm_2r(&a, r1)).abs() <= 1e-12 * (1.0 + norm_2r(&scaled, r1)));
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        prop_assert!(norm_2r(&a, lo) <= norm_2r(&a, hi));
    }

    #[test]
    fn compose_matches_oracle(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut r = rng(seed);
        let f = random_germ(&mut r, d, n, 0.5);
        let g = random_germ(&mut r, d, n, 0.5);
        let ours = f.compose(&g).unwrap();
        prop_assert!(oracle::max_diff(&ours, &oracle::brute_compose(&f, &g)) <= 1e-12);
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut r = rng(seed);
        let (f, g, h) = (random_germ(&mut r, d, n, 0.3), random_germ(&mut r, d, n, 0.3), random_germ(&mut r, d, n, 0.3));
        let left = f.compose(&g.compose(&h).unwrap()).unwrap();
        let right = f.compose(&g).unwrap().compose(&h).unwrap();
        prop_assert!(left.max_deviation(&right) <= 1e-10);
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut r = rng(seed);
        let f = random_germ(&mut r, d, n, 0.3);
        let g = f.invert().unwrap();
        prop_assert!(f.compose(&g).unwrap().deviation_from_identity() <= 1e-10);
        prop_assert!(g.compose(&f).unwrap().deviation_from_identity() <= 1e-10);
    }

    #[test]
    fn positive_germs_compose_to_positive(seed in any::<u64>(), d in 1usize..=3, n in 1usize..=5) {
        let mut r = rng(seed);
        let h = random_positive_germ(&mut r, d, n).compose(&random_positive_germ(&mut r, d, n)).unwrap();
        for comp in h.components() {
            for (_, v) in comp.terms() {
                prop_assert!(v.re >= 0.0 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn torus_metric_axioms(seed in any::<u64>()) {
        let cat = ToralAutomorphism::cat_map();
        let mut r = rng(seed);
        let (x, y, z) = (cat.random_point(&mut r), cat.random_point(&mut r), cat.random_point(&mut r));
        prop_assert_eq!(cat.dist(&x, &x), 0.0);
        prop_assert!(cat.dist(&x, &y) > 0.0);
        prop_assert!((cat.dist(&x, &y) - cat.dist(&y, &x)).abs() <= 1e-15);
        prop_assert!(cat.dist(&x, &z) <= cat.dist(&x, &y) + cat.dist(&y, &z) + 1e-15);
        prop_assert!(cat.dist(&x, &y) <= 1.0);
        let [a, b] = x.coords();
        prop_assert!(cat.dist(&x, &TorusPoint::new(a + 1.0, b - 3.0)) <= 1e-12);
    }

    #[test]
    fn shift_metric_axioms(seed in any::<u64>()) {
        let sys = FullShift::new(3, 24).unwrap();
        let mut r = rng(seed);
        let (x, y, z) = (sys.random_point(&mut r), sys.random_point(&mut r), sys.random_point(&mut r));
        prop_assert_eq!(sys.dist(&x, &x), 0.0);
        prop_assert_eq!(sys.dist(&x, &y), sys.dist(&y, &x));
        prop_assert!(sys.dist(&x, &z) <= sys.dist(&x, &y) + sys.dist(&y, &z));
        let window = x.window(24);
        let copy = ShiftPoint::from_window(-24, window, 0);
        prop_assert_eq!(sys.dist(&x, &copy), 0.0);
    }

    #[test]
    fn torus_closing(seed in any::<u64>(), k in 1usize..=4) {
        let cat = ToralAutomorphism::cat_map();
        let mut r = rng(seed);
        let pts = cat.periodic_points(k);
        let q = &pts[r.gen_range(0..pts.len())];
        let [a, b] = q.coords();
        let eps = 1e-3 / 3f64.powi(k as i32);
        let x = TorusPoint::new(a + r.gen_range(-eps..eps), b + r.gen_range(-eps..eps));
        let p = cat.close_orbit(&x, k).unwrap();
        prop_assert!(cat.dist(&p, &cat.iterate(&p, k)) <= 1e-10);
        prop_assert!(is_exponentially_close(&cat, &x, &p, k));
    }

    #[test]
    fn shift_closing(seed in any::<u64>(), k in 1usize..=6) {
        let sys = FullShift::new(2, 32).unwrap();
        let mut r = rng(seed);
        let word: Vec<u8> = (0..k).map(|_| r.gen_range(0..2)).collect();
        let reps = 12 / k + 2;
        let x = ShiftPoint::from_window(-(k as i64) * (reps as i64 / 2), word.repeat(reps), r.gen_range(0..2));
        let p = sys.close_orbit(&x, k).unwrap();
        prop_assert_eq!(sys.dist(&p, &sys.iterate(&p, k)), 0.0);
        prop_assert!(is_exponentially_close(&sys, &x, &p, k));
    }

    #[test]
    fn cocycle_law(seed in any::<u64>(), n in 0usize..=5, m in 0usize..=5) {
        let sys = FullShift::new(2, 32).unwrap();
        let cfg = GeneratorConfig { dims: 2, max_degree: 3, rho: 0.4, seed, linear_coboundary: true };
        let h = generate_solution(&sys, &sys.base_point(), &cfg).unwrap();
        let f = coboundary_from(&sys, &h);
        let x = sys.random_point(&mut rng(seed ^ 1));
        let whole = cocycle_product(&sys, &f, n + m, &x).unwrap();
        let split = cocycle_product(&sys, &f, m, &sys.iterate(&x, n)).unwrap()
            .compose(&cocycle_product(&sys, &f, n, &x).unwrap()).unwrap();
        prop_assert!(whole.max_deviation(&split) <= 1e-10);
    }

    #[test]
    fn cylinder_fields_respect_declared_holder_constant(seed in any::<u64>(), alpha in 0.2f64..=1.0) {
        let sys = FullShift::new(3, 24).unwrap();
        let mut r = rng(seed);
        let f = sys.random_field(&mut r, 1.0);
        let cst = f.holder_constant(alpha).unwrap();
        for _ in 0..50 {
            let x = sys.random_point(&mut r);
            let y = if r.gen_bool(0.5) {
                let mut w = x.window(24);
                let i = r.gen_range(0..w.len());
                w[i] = (w[i] + 1) % 3;
                ShiftPoint::from_window(-24, w, 0)
            } else {
                sys.random_point(&mut r)
            };
            let d = sys.dist(&x, &y);
            prop_assert!((f.eval(&x) - f.eval(&y)).norm() <= cst * d.powf(alpha) + 1e-12);
        }
    }

    #[test]
    fn holder_product_rule_with_declared_constants(seed in any::<u64>(), alpha in 0.2f64..=1.0) {
        let sys = FullShift::new(2, 24).unwrap();
        let mut r = rng(seed);
        let (f, g) = (sys.random_field(&mut r, 1.0), sys.random_field(&mut r, 1.0));
        let sup = |h: &livsic::cocycle::CylinderField| h.values.iter().map(|v| c(v[0], v[1]).norm()).fold(0.0, f64::max);
        let bound = f.holder_constant(alpha).unwrap() * sup(&g) + g.holder_constant(alpha).unwrap() * sup(&f);
        let points: Vec<_> = (0..60).map(|_| sys.random_point(&mut r)).collect();
        for x in &points {
            for y in &points {
                let d = sys.dist(x, y);
                if d > 0.0 {
                    let fg = |p: &ShiftPoint| f.eval(p) * g.eval(p);
                    prop_assert!((fg(x) - fg(y)).norm() / d.powf(alpha) <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn scalar_solve_telescopes(seed in any::<u64>()) {
        let sys = FullShift::new(2, 32).unwrap();
        let mut r = rng(seed);
        let psi = sys.random_field(&mut r, 1.0);
        let orbit = Orbit::dense(&sys, 300).unwrap();
        let table = scalar_solve(&orbit, &psi).unwrap();
        for n in 0..orbit.len() - 1 {
            prop_assert!((table.values[n + 1] - table.values[n] - psi.eval(&orbit.points()[n])).norm() <= 1e-12);
        }
    }

    #[test]
    fn coboundaries_have_trivial_linear_products(seed in any::<u64>(), k in 1usize..=5) {
        let sys = FullShift::new(2, 32).unwrap();
        let cfg = GeneratorConfig { dims: 2, max_degree: 2, rho: 0.5, seed, linear_coboundary: true };
        let h = generate_solution(&sys, &sys.base_point(), &cfg).unwrap();
        let f = coboundary_from(&sys, &h);
        let pts = sys.periodic_points(k);
        let p = &pts[(seed as usize) % pts.len()];
        let product = cocycle_product(&sys, &f, k, p).unwrap();
        let id = Germ::identity(2, 2);
        prop_assert!((product.linear_part() - id.linear_part()).iter().map(|v| v.norm()).fold(0.0, f64::max) <= 1e-10);
    }

    #[test]
    fn majorant_inverts_and_grows_in_s(d in 1usize..=2, n in 2usize..=6) {
        let mut last: Option<livsic::majorant::MajorantTable> = None;
        for s in [1.0, 2.0, 4.0, 8.0] {
            let j = build_j_scaled(s, d, n).unwrap();
            let t = solve_g_scaled(s, d, n).unwrap();
            let g = Germ::new(
                (0..d)
                    .map(|i| {
                        let terms = t.entries.iter()
                            .filter(|e| e.component == i)
                            .map(|e| (e.index.clone(), c(e.value, 0.0)))
                            .chain([(MultiIndex::unit(d, i), c(1.0, 0.0))]);
                        TruncatedSeries::from_terms(d, n, terms).unwrap()
                    })
                    .collect(),
            ).unwrap();
            prop_assert!(j.compose(&g).unwrap().deviation_from_identity() <= 1e-10 * t.entries.iter().map(|e| e.value).fold(1.0, f64::max));
            prop_assert!(t.growth_bound_holds());
            for e in &t.entries {
                prop_assert!(e.value <= t.growth_rate.powi(e.index.degree() as i32 - 1) * (1.0 + 1e-12));
            }
            if let Some(prev) = &last {
                for e in &t.entries {
                    prop_assert!(e.value >= prev.get(e.component, &e.index).unwrap());
                }
            }
            last = Some(t);
        }
    }
}

#[test]
fn cat_map_counts_match_trace_formula_and_grid() {
    let cat = ToralAutomorphism::cat_map();
    let m = [[2i64, 1], [1, 1]];
    let (mut a, mut b) = (2i64, 3i64);
    for k in 1..=8 {
        // tr(M^{k+1}) = 3 tr(M^k) - tr(M^{k-1})
        let trace = b;
        let count = cat.periodic_points(k).len();
        assert_eq!(count as i64, trace - 2, "k={k}");
        if k <= 6 {
            assert_eq!(count, oracle::grid_periodic_count(m, k), "k={k}");
        }
        let next = 3 * b - a;
        a = b;
        b = next;
    }
}

#[test]
fn reconstruction_is_prefix_stable() {
    let sys = FullShift::new(2, 64).unwrap();
    let cfg = GeneratorConfig {
        dims: 2,
        max_degree: 3,
        rho: 0.3,
        seed: 21,
        linear_coboundary: true,
    };
    let h = generate_solution(&sys, &sys.base_point(), &cfg).unwrap();
    let f = coboundary_from(&sys, &h);
    let opts = GermSolveOptions {
        kmax: 4,
        ..Default::default()
    };
    let (short, _) = germ_solve(&sys, &f, &Orbit::dense(&sys, 600).unwrap(), &opts).unwrap();
    let (long, _) = germ_solve(&sys, &f, &Orbit::dense(&sys, 1200).unwrap(), &opts).unwrap();
    assert_eq!(short.germs[..], long.germs[..600]);
}
