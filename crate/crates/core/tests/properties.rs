use dilatlab::ccdist::{cc_lower, cc_upper, endpoint, word_decomposition, CcOptions};
use dilatlab::nilpotent::{builtin, CarnotGroup};
use dilatlab::scalar::coord_distance;
use dilatlab::{as_dilatation_structure, DilatationStructure, NormedGroupWithDilatations, Point};
use dilatlab::nilpotent::NormVariant;
use proptest::prelude::*;

fn heisenberg() -> CarnotGroup {
    builtin("heisenberg:1").unwrap()
}

fn engel() -> CarnotGroup {
    builtin("engel").unwrap()
}

fn coords(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-r..r, n)
}

/// `log(exp(x) exp(y))` through 3x3 unitriangular matrices.
fn matrix_product(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = |p: &[f64]| [p[0], p[1], p[2] + p[0] * p[1] / 2.0];
    let (a, b) = (m(x), m(y));
    let (p, r) = (a[0] + b[0], a[1] + b[1]);
    let q = a[2] + b[2] + a[0] * b[1];
    vec![p, r, q - p * r / 2.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn heisenberg_product_matches_matrices(x in coords(3, 3.0), y in coords(3, 3.0)) {
        let h = heisenberg();
        prop_assert!(coord_distance(&h.mul(&x, &y), &matrix_product(&x, &y)) <= 1e-12);
    }

    #[test]
    fn products_associate(a in coords(4, 1.0), b in coords(4, 1.0), c in coords(4, 1.0)) {
        for g in [engel()] {
            let lhs = g.mul(&g.mul(&a, &b), &c);
            let rhs = g.mul(&a, &g.mul(&b, &c));
            prop_assert!(coord_distance(&lhs, &rhs) <= 1e-12);
        }
        let h = heisenberg();
        let (a, b, c) = (&a[..3], &b[..3], &c[..3]);
        prop_assert!(coord_distance(&h.mul(&h.mul(a, b), c), &h.mul(a, &h.mul(b, c))) <= 1e-12);
    }

    #[test]
    fn dilations_are_morphisms(a in coords(4, 1.0), b in coords(4, 1.0), eps in 0.05f64..2.0) {
        let g = engel();
        let lhs = g.dilation(&g.mul(&a, &b), &eps);
        let rhs = g.mul(&g.dilation(&a, &eps), &g.dilation(&b, &eps));
        prop_assert!(coord_distance(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn distance_is_left_invariant(x in coords(3, 1.0), u in coords(3, 1.0), v in coords(3, 1.0)) {
        let g = NormedGroupWithDilatations::carnot("h", heisenberg(), NormVariant::Koranyi).unwrap();
        let s = as_dilatation_structure(g);
        let h = heisenberg();
        let d = s.distance(&Point(u.clone()), &Point(v.clone()));
        let moved = s.distance(&Point(h.mul(&x, &u)), &Point(h.mul(&x, &v)));
        prop_assert!((d - moved).abs() <= 1e-6 * (1.0 + d));
    }

    #[test]
    fn words_reach_their_points(x in coords(3, 1.0)) {
        let h = heisenberg();
        let w = word_decomposition(&h, &x).unwrap();
        prop_assert!(coord_distance(&w.evaluate::<f64>(&h), &x) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cc_bounds_sandwich(y in coords(3, 1.0)) {
        let h = heisenberg();
        let e = vec![0.0; 3];
        let opts = CcOptions { segments: 16, ..CcOptions::default() };
        let r = cc_upper(&h, &e, &y, &opts).unwrap();
        prop_assert!(cc_lower(&h, &e, &y) <= r.upper + 1e-12);
        prop_assert!(r.residual <= 1e-8);
        prop_assert!(coord_distance(&endpoint::<f64>(&h, &r.path), &y) <= 1e-8);
    }
}

#[test]
fn horizontal_targets_are_tight() {
    let h = heisenberg();
    for y in [[0.7, 0.0, 0.0], [0.3, -0.4, 0.0]] {
        let r = cc_upper(&h, &[0.0; 3], &y, &CcOptions::default()).unwrap();
        let lower = cc_lower(&h, &[0.0; 3], &y);
        assert!(r.upper - lower <= 1e-6 * lower, "{} vs {lower}", r.upper);
    }
}

#[test]
fn finer_paths_never_worsen_the_bound() {
    let h = heisenberg();
    let y = [0.2, 0.1, 0.5];
    let bounds: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&k| cc_upper(&h, &[0.0; 3], &y, &CcOptions { segments: k, ..CcOptions::default() }).unwrap().upper)
        .collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{bounds:?}");
}
