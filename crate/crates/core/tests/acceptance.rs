//! One test per acceptance criterion. Each prints a PASS/FAIL line.

use modlab_core::suite::{dichotomy_fixture, run_criterion, DICHOTOMY_LADDER};

fn criterion(id: u8) {
    let out = run_criterion(id).expect("criterion runs");
    for line in out.summary_lines() {
        println!("{line}");
    }
    for c in &out.checks {
        println!(
            "    {} {}: values={:?} bound={:e}",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.values,
            c.bound
        );
    }
    assert!(out.pass(), "criterion {id} failed");
}

#[test]
fn criterion_1_segment_modulus() {
    criterion(1);
}

#[test]
fn criterion_2_outer_measure() {
    criterion(2);
}

#[test]
fn criterion_3_chebyshev_bounds() {
    criterion(3);
}

#[test]
fn criterion_4_weak_derivative() {
    criterion(4);
}

#[test]
fn criterion_5_norm_equivalence() {
    criterion(5);
}

#[test]
fn criterion_6_ftc_and_ac() {
    criterion(6);
}

#[test]
fn criterion_7_rnp_dichotomy() {
    criterion(7);
}

#[test]
fn criterion_8_fuglede_schedule() {
    criterion(8);
}

/// Recompute the gap floor by sweeping every coordinate with the plain
/// two-point quotient, independently of the library.
#[test]
fn gap_floor_fixture_matches_sweep() {
    let fx = dichotomy_fixture().unwrap();
    assert!((fx.t - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
    let t = fx.t;
    let mut min_gap = f64::INFINITY;
    for (rung, &h) in fx.rungs.iter().zip(&DICHOTOMY_LADDER) {
        assert_eq!(rung.h, h);
        let hp = h / 2.0;
        let m = (10.0 / hp).ceil() as usize;
        assert_eq!(rung.m, m);
        let (mut best, mut arg) = (0.0f64, 0);
        for n in 1..=m {
            let nf = n as f64;
            let q = |s: f64| ((nf * (t + s)).sin() - (nf * t).sin()) / (nf * s);
            let d = (q(h) - q(hp)).abs();
            if d > best {
                best = d;
                arg = n;
            }
        }
        assert!(
            (best - rung.gap).abs() < 1e-8,
            "h={h}: sweep {best} fixture {}",
            rung.gap
        );
        assert_eq!(arg, rung.argmax_n);
        min_gap = min_gap.min(best);
    }
    assert!(fx.c0 <= min_gap && min_gap - fx.c0 < 0.05);
}
