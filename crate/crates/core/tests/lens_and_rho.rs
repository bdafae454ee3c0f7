use proptest::prelude::*;

use rhoforge::hyperb::{hyperbolized_simplex, hyperbolized_sphere};
use rhoforge::lensrho::{
    homotopy_invariant_count, invariant_count, lens_complex, lens_count, rho_atiyah_bott, LensSpec,
};

#[test]
fn lens_spaces_are_closed_orientable_three_manifolds() {
    for n in 3..=9u64 {
        let l = lens_complex(LensSpec::new(n, 2)).unwrap();
        let h = l.homology();
        assert!(h.h(0).is(1, &[]) && h.h(1).is(0, &[n]) && h.h(2).is_trivial() && h.h(3).is(1, &[]), "{n}: {h}");
        assert_eq!(l.euler(), 0);
        assert!(l.boundary().f_vector().is_empty());
    }
}

#[test]
fn five_dimensional_lens_space() {
    let l = lens_complex(LensSpec::new(3, 3)).unwrap();
    let h = l.homology();
    assert!(h.h(1).is(0, &[3]) && h.h(3).is(0, &[3]) && h.h(5).is(1, &[]), "{h}");
    assert!(h.h(2).is_trivial() && h.h(4).is_trivial());
}

#[test]
fn hyperbolized_stages_have_the_expected_shapes() {
    let h = hyperbolized_simplex(3).unwrap();
    assert_eq!(h.simplices.len(), 3);
    assert_eq!(h.spheres.len(), 2);
    assert_eq!(h.simplices[0].complex.f_vector(), vec![2, 1]);
    for (n, y) in h.spheres.iter().enumerate() {
        assert!(y.complex.boundary().f_vector().is_empty(), "Y^{} has boundary", n + 1);
    }
    assert_eq!(hyperbolized_sphere(1).unwrap().complex.f_vector(), vec![6, 6]);
    assert!(hyperbolized_sphere(3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quotient_counts_divide_the_join(n in 3u64..14, d in 1u32..4) {
        let c = lens_count(LensSpec::new(n, d)).unwrap();
        prop_assert_eq!(c.top as u64, n.pow(d - 1));
        prop_assert_eq!(c.f_vector.len(), 2 * d as usize);
        let chi: i64 = c.f_vector.iter().enumerate().map(|(q, &k)| if q % 2 == 0 { k as i64 } else { -(k as i64) }).sum();
        prop_assert_eq!(chi, 0);
    }

    #[test]
    fn rho_for_d2_is_the_closed_form(n in 3u64..2000) {
        let want = ((n - 1) * (n - 2)) as f64 / 3.0;
        let got = rho_atiyah_bott(LensSpec::new(n, 2)).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn even_sums_grow_and_odd_sums_vanish(n in 3u64..300, k in 1u32..4) {
        let even = |n| rho_atiyah_bott(LensSpec::new(n, 2 * k)).unwrap();
        prop_assert!(even(n) > 0.0);
        prop_assert!(even(n + 1) > even(n));
        prop_assert!(rho_atiyah_bott(LensSpec::new(n, 2 * k - 1)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn invariant_counts_are_bounded(n in 2u64..500, k in 0u64..5) {
        let dim = 2 * k + 1;
        let a = invariant_count(n, dim).unwrap();
        let b = homotopy_invariant_count(n, dim).unwrap();
        prop_assert!(a <= n / 2 + 1);
        prop_assert!(b < n + 1);
    }
}
