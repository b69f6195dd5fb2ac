use modlab_core::geometry::{curve_integral, length};
use modlab_core::vectorvalues::{bochner_integral, dual_norm, lp_norm, scalarize, value_norm};
use modlab_core::{DualFunctional, Grid, NormTag, Polyline, ScalarField, VectorField};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 2)
}

fn polyline() -> impl Strategy<Value = Polyline> {
    prop::collection::vec(point(), 2..6).prop_filter_map("degenerate", |v| {
        Polyline::new(v).ok().filter(|c| c.length() > 1e-3)
    })
}

fn tag() -> impl Strategy<Value = NormTag> {
    prop::sample::select(NormTag::ALL.to_vec())
}

fn field(m: usize) -> impl Strategy<Value = (Vec<f64>, NormTag)> {
    (prop::collection::vec(-5.0..5.0f64, 36 * m), tag())
}

fn grid6() -> Grid {
    Grid::unit(2, 6).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restrict_is_additive(c in polyline(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (s, t) = (a.min(b) * c.length(), a.max(b) * c.length());
        let left = if s > 0.0 { c.restrict(0.0, s).unwrap().length() } else { 0.0 };
        let mid = if t > s { c.restrict(s, t).unwrap().length() } else { 0.0 };
        let right = if t < c.length() { c.restrict(t, c.length()).unwrap().length() } else { 0.0 };
        prop_assert!((left + mid + right - c.length()).abs() < 1e-12);
        prop_assert!((mid - (t - s)).abs() < 1e-12);
    }

    #[test]
    fn length_survives_refinement(c in polyline()) {
        let mut verts = Vec::new();
        let pts: Vec<Vec<f64>> = c.vertices().map(|v| v.to_vec()).collect();
        for w in pts.windows(2) {
            verts.push(w[0].clone());
            verts.push(vec![0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1])]);
        }
        verts.push(pts.last().unwrap().clone());
        let fine = Polyline::new(verts).unwrap();
        prop_assert!((length(&fine) - length(&c)).abs() < 1e-12);
        let param = c.arclength_parametrize().unwrap();
        prop_assert!((param.length() - c.length()).abs() < 1e-12);
    }

    #[test]
    fn line_integral_is_monotone_and_linear(
        c in polyline(),
        a in prop::collection::vec(0.0..2.0f64, 36),
        extra in prop::collection::vec(0.0..2.0f64, 36),
    ) {
        let g = grid6();
        let lo = ScalarField::new(g.clone(), a.clone()).unwrap();
        let hi = ScalarField::new(g.clone(), a.iter().zip(&extra).map(|(x, y)| x + y).collect()).unwrap();
        let d = ScalarField::new(g, extra).unwrap();
        let (il, ih, id) = (
            curve_integral(&lo, &c).unwrap(),
            curve_integral(&hi, &c).unwrap(),
            curve_integral(&d, &c).unwrap(),
        );
        prop_assert!(il <= ih + 1e-12);
        prop_assert!((il + id - ih).abs() < 1e-10);
    }

    #[test]
    fn constant_density_integrates_to_length(c in polyline(), k in 0.0..3.0f64) {
        let rho = ScalarField::constant(grid6(), k).unwrap();
        prop_assert!((curve_integral(&rho, &c).unwrap() - k * c.length()).abs() < 1e-10);
    }

    #[test]
    fn minkowski(((a, t), (b, _)) in (field(2), field(2)), p in 1.0..4.0f64) {
        let f = VectorField::new(grid6(), 2, a, t).unwrap();
        let g = VectorField::new(grid6(), 2, b, t).unwrap();
        let sum = lp_norm(&f.add(&g).unwrap(), p).unwrap();
        prop_assert!(sum <= lp_norm(&f, p).unwrap() + lp_norm(&g, p).unwrap() + 1e-10);
    }

    #[test]
    fn bochner_norm_inequality((a, t) in field(3)) {
        let f = VectorField::new(grid6(), 3, a, t).unwrap();
        let integral = bochner_integral(&f);
        prop_assert!(value_norm(&integral, t) <= lp_norm(&f, 1.0).unwrap() + 1e-12);
    }

    #[test]
    fn pairing_commutes_with_integration((a, t) in field(3), v in prop::collection::vec(-1.0..1.0f64, 3)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let f = VectorField::new(grid6(), 3, a, t).unwrap();
        let v = DualFunctional::normalized(v, t).unwrap();
        prop_assert!(dual_norm(v.coeffs(), t) <= 1.0 + 1e-12);
        let lhs = v.apply(&bochner_integral(&f));
        let s = scalarize(&f, &v).unwrap();
        let rhs: f64 = s.values().iter().sum::<f64>() * s.grid().cell_volume();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn interpolation_stays_within_lipschitz_bound((a, t) in field(2), x in point(), y in point()) {
        let f = VectorField::new(grid6(), 2, a, t).unwrap();
        let d: Vec<f64> = f.sample(&x).unwrap().iter().zip(f.sample(&y).unwrap()).map(|(p, q)| p - q).collect();
        let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        prop_assert!(value_norm(&d, t) <= f.interpolant_lipschitz_bound() * dist + 1e-10);
    }
}

#[test]
fn curve_leaving_the_box_is_rejected() {
    let rho = ScalarField::constant(grid6(), 1.0).unwrap();
    let c = Polyline::segment(&[0.5, 0.5], &[1.5, 0.5]).unwrap();
    assert!(matches!(
        curve_integral(&rho, &c),
        Err(modlab_core::Error::Domain(_))
    ));
}
