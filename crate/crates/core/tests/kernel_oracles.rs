use std::f64::consts::PI;

use besov_core::kernels::{
    build_lp_pair, build_mollifier, moment, moment_by_quadrature, verify_lp_conditions, LpPair,
};
use besov_core::spectral::SpectralMultiplier;

/// `int x^alpha K(x) dx` summed directly from the synthesized samples.
fn direct_moment(samples: &(Vec<f64>, Vec<f64>), alpha: i32) -> f64 {
    let (xs, vals) = samples;
    let h = xs[1] - xs[0];
    h * xs.iter().zip(vals).map(|(x, v)| x.powi(alpha) * v).sum::<f64>()
}

#[test]
fn eighth_moment_matches_direct_quadrature() {
    let phi = build_mollifier(1024.0).unwrap();
    let samples = phi.spatial_samples(14);
    let direct = direct_moment(&samples, 8);
    assert!(direct.abs() < 1e-8, "direct sum {direct}");
    assert!(moment(&phi, 8).unwrap().abs() < 1e-8);
    let q = moment_by_quadrature(&phi, 8, 1e-6).unwrap();
    assert!((q.value - direct).abs() < 1e-10);
}

#[test]
fn mass_is_one_by_every_route() {
    let phi = build_mollifier(64.0).unwrap();
    assert!((moment(&phi, 0).unwrap() - 1.0).abs() < 1e-10);
    assert!((moment(&phi, 1).unwrap()).abs() < 1e-10);
    let direct = direct_moment(&phi.spatial_samples(14), 0);
    assert!((direct - 1.0).abs() < 1e-10, "{direct}");
}

#[test]
fn peak_value_matches_symbol_integral() {
    // phi(0) = (1/pi) int_0^inf phi_hat, by Simpson's rule on the symbol.
    let phi = build_mollifier(32.0).unwrap();
    let r = phi.support_radius();
    let n = 20_000;
    let h = r / n as f64;
    let simpson: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * phi.symbol(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0
        / PI;
    let (xs, vals) = phi.spatial_samples(14);
    let at_zero = vals[xs.iter().position(|x| *x == 0.0).unwrap()];
    assert!((at_zero / simpson - 1.0).abs() < 1e-9, "{at_zero} vs {simpson}");
}

#[test]
fn quadrature_flags_a_truncated_window() {
    let phi = build_mollifier(32.0).unwrap();
    assert!(moment_by_quadrature(&phi, 16, 1e-300).is_err());
}

#[test]
fn canonical_pair_passes_every_order() {
    let pair = build_lp_pair(32.0, 0.5).unwrap();
    let d = verify_lp_conditions(&pair, 3.0);
    assert!(d.pass, "{:?}", d.failures);
    let d = verify_lp_conditions(&pair, 7.9);
    assert!(d.pass);
    assert_eq!(d.moments_checked.len(), 8);
    assert_eq!(d.moments_checked.last().unwrap().0, 7);
    let d = verify_lp_conditions(&pair, -2.0);
    assert!(d.pass && d.moments_checked.is_empty());
}

#[test]
fn mollifier_twice_is_a_pair_of_negative_order_only() {
    let phi = build_mollifier(32.0).unwrap();
    // The band conditions are checked on |xi| <= 16, inside the support of the symbol.
    let pair = LpPair::new(phi, phi, 16.0, 0.5);
    assert!(verify_lp_conditions(&pair, -1.0).pass);
    let d = verify_lp_conditions(&pair, 1.0);
    assert!(!d.pass);
    let d0 = verify_lp_conditions(&pair, 0.0);
    assert!(!d0.pass);
    assert!(d0.failures.iter().any(|f| f.contains("moment 0")), "{:?}", d0.failures);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(build_mollifier(0.0).is_err());
    assert!(build_mollifier(-1.0).is_err());
    assert!(build_lp_pair(32.0, 1.0).is_err());
    assert!(build_lp_pair(32.0, 0.0).is_err());
    assert!(moment(&build_mollifier(8.0).unwrap(), 17).is_err());
}
