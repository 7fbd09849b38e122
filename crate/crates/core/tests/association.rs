use besov_core::association::{
    association_verdict, bump_battery, holder_bound, pairing_profile, AssociationOptions,
    AssociationVerdict,
};
use besov_core::besov::{default_grid, detect_regularity, embed, DetectSettings};
use besov_core::corpus::{self, standard_corpus};
use besov_core::kernels::build_lp_pair;
use besov_core::nets::{
    classify_negligible, net_sobolev_profile, perturbed, ClassifyOptions, NetSpec, Negligibility,
};
use besov_core::scale::{critical_exponent, ScaleGrid};
use besov_core::spectral::{SpectralFunction, Torus};

const INF: f64 = f64::INFINITY;

fn setup(exp: u32) -> (Torus, besov_core::kernels::LpPair, ScaleGrid) {
    let torus = Torus::unit(exp);
    let pair = build_lp_pair(32.0, 0.5).unwrap();
    let grid = default_grid(&pair, &torus).unwrap();
    (torus, pair, grid)
}

fn offset(torus: Torus) -> SpectralFunction {
    SpectralFunction::constant(torus, 1.0)
        .add(&corpus::smooth_trig(torus).scale(0.5))
        .unwrap()
}

#[test]
fn linear_perturbation_has_unit_rate() {
    let (torus, pair, grid) = setup(12);
    let t = corpus::heaviside(torus);
    let battery = bump_battery(torus, 8, 3);
    let base = embed(&t, &pair.phi).unwrap();
    let net = perturbed(&base, offset(torus), |e| e, "eps g").unwrap();
    let r = association_verdict(&t, &net, &battery, 2.0, &grid, &AssociationOptions::default()).unwrap();
    assert!((r.b_hat - 1.0).abs() < 0.05, "{}", r.b_hat);
    assert!(matches!(r.verdict, AssociationVerdict::Strong { .. }));
    let net = perturbed(&base, offset(torus), |e| e * e, "eps^2 g").unwrap();
    let r = association_verdict(&t, &net, &battery, 2.0, &grid, &AssociationOptions::default()).unwrap();
    assert!((r.b_hat - 2.0).abs() < 0.05, "{}", r.b_hat);
}

#[test]
fn super_polynomial_perturbation_is_rapid() {
    let (torus, pair, grid) = setup(12);
    let t = corpus::kink(torus);
    let base = embed(&t, &pair.phi).unwrap();
    let net = perturbed(&base, offset(torus), |e: f64| (-1.0 / e).exp(), "exp(-1/eps) g").unwrap();
    let r = association_verdict(&t, &net, &bump_battery(torus, 8, 3), 2.0, &grid, &AssociationOptions::default())
        .unwrap();
    assert!(r.is_rapid(), "{:?}", r.slopes);
}

#[test]
fn fixed_perturbation_is_not_associated() {
    let (torus, pair, grid) = setup(12);
    let t = SpectralFunction::dirac(torus);
    let net = perturbed(&embed(&t, &pair.phi).unwrap(), offset(torus), |_| 1.0, "g").unwrap();
    let r = association_verdict(&t, &net, &bump_battery(torus, 8, 3), 2.0, &grid, &AssociationOptions::default())
        .unwrap();
    assert_eq!(r.verdict, AssociationVerdict::None);
    assert!(r.b_hat.abs() < 0.05);
}

#[test]
fn pairing_of_an_exact_representative_vanishes() {
    let (torus, _, grid) = setup(10);
    let t = corpus::smooth_trig(torus);
    let t2 = t.clone();
    let net = NetSpec::function("T", move |_| Ok(t2.clone()));
    let profile = pairing_profile(&t, &net, &bump_battery(torus, 1, 0)[0].function, &grid).unwrap();
    assert!(profile.norms().iter().all(|v| *v == 0.0));
}

#[test]
fn negligible_changes_of_representative_keep_the_verdict() {
    let (torus, pair, grid) = setup(12);
    let battery = bump_battery(torus, 8, 11);
    let opts = AssociationOptions::default();
    let g = offset(torus);
    let noise = corpus::smooth_bump(torus);
    let noise_net = NetSpec::function("exp(-1/eps) bump", {
        let noise = noise.clone();
        move |e: f64| Ok(noise.scale((-1.0 / e).exp()))
    });
    let copts = ClassifyOptions { grid, ..ClassifyOptions::default() };
    assert_eq!(
        classify_negligible(&noise_net, 2.0, 2.0, None, &copts).unwrap().verdict,
        Negligibility::Negligible
    );
    for t in [corpus::heaviside(torus), SpectralFunction::dirac(torus)] {
        for b in [0, 1, 2] {
            let net = perturbed(&embed(&t, &pair.phi).unwrap(), g.clone(), move |e: f64| e.powi(b), "eps^b g").unwrap();
            let a = association_verdict(&t, &net, &battery, 2.0, &grid, &opts).unwrap();
            let b_net = net.add(&noise_net).unwrap();
            let b = association_verdict(&t, &b_net, &battery, 2.0, &grid, &opts).unwrap();
            assert_eq!(
                std::mem::discriminant(&a.verdict),
                std::mem::discriminant(&b.verdict)
            );
            assert!((a.b_hat - b.b_hat).abs() < 0.05);
        }
    }
}

#[test]
fn rapidly_associated_representatives_differ_by_a_negligible_net() {
    let (torus, pair, grid) = setup(12);
    let battery = bump_battery(torus, 16, 7);
    let copts = ClassifyOptions { grid, ..ClassifyOptions::default() };
    let g = offset(torus);
    for member in standard_corpus(torus) {
        let t = &member.function;
        let canonical = embed(t, &pair.phi).unwrap();
        let other = perturbed(&canonical, g.clone(), |e: f64| (-1.0 / e).exp(), "exp(-1/eps) g").unwrap();
        let r = association_verdict(t, &other, &battery, 2.0, &grid, &AssociationOptions::default()).unwrap();
        assert!(r.is_rapid(), "{}", member.name);
        let diff = other.sub(&canonical).unwrap();
        let v = classify_negligible(&diff, 2.0, 2.0, None, &copts).unwrap();
        assert_eq!(v.verdict, Negligibility::Negligible, "{}", member.name);
    }
}

#[test]
fn holder_bound_never_exceeds_the_detected_exponent() {
    // A rapidly associated net in the k-scale space for every s > 0 places T in
    // C^{k - s0} with s0 -> 0; that bound must not beat the detector.
    let torus = corpus::default_torus();
    let pair = build_lp_pair(32.0, 0.5).unwrap();
    let grid = default_grid(&pair, &torus).unwrap();
    for member in standard_corpus(torus).into_iter().filter(|m| !m.is_smooth() && m.name != "dirac") {
        let t = &member.function;
        let net = embed(t, &pair.phi).unwrap();
        let mut k_ok = None;
        for k in 0..4 {
            let fit = critical_exponent(&net_sobolev_profile(&net, k, INF, None, &grid).unwrap()).unwrap();
            // Growth slower than any power, up to the fit tolerance.
            if fit.slope > -0.1 {
                k_ok = Some(k);
            }
        }
        let k = k_ok.expect("bounded sup norm at order 0");
        let s0 = holder_bound(1e-3, 1e9, k, 1, 0).unwrap();
        let r = detect_regularity(t, &DetectSettings::new(INF, INF), &pair, &grid).unwrap();
        assert!(k as f64 - s0 <= r.r_hat + 0.1, "{}: bound {} vs r_hat {}", member.name, k as f64 - s0, r.r_hat);
    }
}

#[test]
fn holder_bound_is_monotone() {
    let mut prev = f64::INFINITY;
    for i in 1..50 {
        let b = 0.1 * i as f64;
        let s0 = holder_bound(1.0, b, 3, 1, 1).unwrap();
        assert!(s0 < prev);
        prev = s0;
    }
    let mut prev = 0.0;
    for i in 1..50 {
        let s = 0.1 * i as f64;
        let s0 = holder_bound(s, 2.0, 3, 1, 1).unwrap();
        assert!(s0 > prev);
        prev = s0;
    }
    assert_eq!(holder_bound(2.0, 2.0, 0, 1, 0).unwrap(), 0.5);
    assert!(holder_bound(1.0, 1.0, 2, 0, 0).is_err());
}
