use modlab_core::geometry::Polyline;
use modlab_core::reshetnyak::{ac_bound_check, r_norm};
use modlab_core::rnp_lab::{difference_quotient, noncauchy_gap, sin_family};
use modlab_core::vectorvalues::{lp_norm, value_norm, NormTag};
use modlab_core::ScalarField;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coordinates_decay(m in 1usize..200, t in 0.0..1.0f64) {
        let f = sin_family(m, 16).unwrap();
        for (n, v) in f.eval(t).iter().enumerate() {
            prop_assert!(v.abs() <= 1.0 / (n + 1) as f64 + 1e-15);
        }
        prop_assert!(f.value_norm_at(t) <= 1.0);
    }

    #[test]
    fn quotients_are_bounded(m in 1usize..500, t in 0.01..0.5f64, h in 1e-6..0.4f64) {
        let f = sin_family(m, 16).unwrap();
        let q = difference_quotient(&f, t, h).unwrap();
        prop_assert!(value_norm(&q, NormTag::Linf) <= 1.0 + 1e-12);
    }

    #[test]
    fn analytic_r_norm_is_bounded(m in 1usize..400, p in 1.0..3.0f64) {
        let f = sin_family(m, 32).unwrap();
        let (lp, g) = f.analytic_norms(p).unwrap();
        prop_assert!(g <= 1.0 + 1e-12);
        prop_assert!(f.r_norm(p).unwrap() <= lp + 1.0 + 1e-6);
    }

    #[test]
    fn ac_bound_holds_with_unit_density(m in 1usize..40, a in 0.02..0.98f64, b in 0.02..0.98f64) {
        prop_assume!((a - b).abs() > 1e-3);
        let f = sin_family(m, 64).unwrap().to_vector_field().unwrap();
        let one = ScalarField::constant(f.grid().clone(), 1.0).unwrap();
        let c = Polyline::segment(&[a], &[b]).unwrap();
        prop_assert!(ac_bound_check(&f, &one, &c, 1e-12).unwrap().pass);
    }
}

#[test]
fn grid_r_norm_tracks_the_analytic_one() {
    let f = sin_family(8, 512).unwrap();
    let field = f.to_vector_field().unwrap();
    let (lp, _) = f.analytic_norms(2.0).unwrap();
    assert!((lp_norm(&field, 2.0).unwrap() - lp).abs() < 1e-12);
    let grid = r_norm(&field, 2.0).unwrap();
    assert!((grid - f.r_norm(2.0).unwrap()).abs() < 1e-2, "{grid}");
}

#[test]
fn scalar_gap_vanishes_and_scaled_gap_does_not() {
    let t = std::f64::consts::FRAC_1_SQRT_2;
    let one = sin_family(1, 16).unwrap();
    let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5]
        .iter()
        .map(|&h| noncauchy_gap(&one, t, h, h / 2.0).unwrap())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    for h in [1e-2f64, 1e-3] {
        let wide = sin_family((10.0 / (h / 2.0)).ceil() as usize, 16).unwrap();
        assert!(noncauchy_gap(&wide, t, h, h / 2.0).unwrap() > 0.5);
    }
}
