//! Besov norms, the mollifier embedding and the regularity detector.
//!
//! The detector rests on the characterisation `T in B^r_{p,q}` iff
//! `eps^{k-r} ||T * phi_eps||_{W^{k,p}}` is `q`-integrable against `deps/eps`
//! for an integer `k > r`. The profile `||T * phi_eps||_{W^{k,p}} ~ eps^{-s_hat}`
//! therefore gives `r_hat = k - s_hat`, provided `k` is large enough, which is
//! why `k` is raised until `k > r_hat + 1`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{verify_lp_conditions, Kernel, KernelKind, LpPair};
use crate::nets::NetSpec;
use crate::scale::{
    critical_exponent_with, q_integral, sweep, verdict_from_fit, Convergence, ExponentFit,
    ScaleGrid, VerdictOptions,
};
use crate::spectral::{SpectralFunction, Torus};

/// Default number of scales per profile.
pub const DEFAULT_SCALES: usize = 48;

/// Geometric grid from `y = 1` down to the smallest scale both kernels of `pair` admit.
pub fn default_grid(pair: &LpPair, torus: &Torus) -> Result<ScaleGrid> {
    let y_min = pair.support_radius() / torus.nyquist() * (1.0 + 1e-9);
    ScaleGrid::new(y_min, 1.0, DEFAULT_SCALES)
}

/// Besov quantity `||T * phi||_p + (int_{y_min}^1 (y^{-s} ||T * psi_y||_p)^q dy/y)^{1/q}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    pub low_part: f64,
    pub scale_part: f64,
    /// Lower end of the scale integral.
    pub truncated_at: f64,
    /// Whether the untruncated integral converges, judged from the `psi` profile.
    pub verdict: Convergence,
    pub fit: ExponentFit,
}

pub fn besov_norm(
    t: &SpectralFunction,
    s: f64,
    p: f64,
    q: f64,
    pair: &LpPair,
    grid: &ScaleGrid,
) -> Result<BesovNorm> {
    besov_norm_with(t, s, p, q, pair, grid, &VerdictOptions::default())
}

pub fn besov_norm_with(
    t: &SpectralFunction,
    s: f64,
    p: f64,
    q: f64,
    pair: &LpPair,
    grid: &ScaleGrid,
    opts: &VerdictOptions,
) -> Result<BesovNorm> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidParameter(format!("q must lie in [1, inf], got {q}")));
    }
    let diag = verify_lp_conditions(pair, s);
    if !diag.pass {
        return Err(Error::InvalidPair(diag.failures.join("; ")));
    }
    let low_part = t.convolve_scaled(&pair.phi, 1.0)?.lp_norm(p)?;
    let profile = sweep(t, &pair.psi, grid, 0, p, &pair.psi.id())?;
    let integral = q_integral(&profile, s, q);
    let scale_part = if q.is_infinite() {
        integral
    } else {
        integral.powf(1.0 / q)
    };
    let fit = critical_exponent_with(&profile, &opts.fit)?;
    Ok(BesovNorm {
        value: low_part + scale_part,
        low_part,
        scale_part,
        truncated_at: grid.y_min(),
        verdict: verdict_from_fit(&fit, s, q, opts),
        fit,
    })
}

/// The net `eps -> T * phi_eps`, evaluated on demand.
pub fn embed(t: &SpectralFunction, phi: &Kernel) -> Result<NetSpec> {
    if phi.kind() != KernelKind::Mollifier {
        return Err(Error::InvalidParameter(format!(
            "embedding needs a mollifier, got {}",
            phi.id()
        )));
    }
    let t = Arc::new(t.clone());
    let phi = *phi;
    Ok(NetSpec::function(format!("embed[{}]", phi.id()), move |eps| {
        t.convolve_scaled(&phi, eps)
    }))
}

/// Product of `t` with a band-limited cutoff `window` taking values in `[0, 1]`.
///
/// The product is the convolution of the two coefficient sequences, taken
/// cyclically in the mode index. For band-limited `t` this is the exact
/// product; for a full-band `t` such as a Dirac mass the cyclic wrap keeps
/// `delta * w = w(0) delta` exact instead of leaving a truncation ripple at
/// the band edge.
pub fn localize(t: &SpectralFunction, window: &SpectralFunction) -> Result<SpectralFunction> {
    if window.torus() != t.torus() {
        return Err(Error::InvalidParameter("window lives on a different torus".into()));
    }
    let samples = window.synthesize();
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    if lo < -1e-12 || hi > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "window values must lie in [0, 1], found [{lo}, {hi}]"
        )));
    }
    let n = t.torus().size();
    let band = window.bandwidth(1e-15);
    if band >= n / 4 {
        return Err(Error::AliasingRisk(format!(
            "window bandwidth {band} reaches a quarter of the grid size {n}"
        )));
    }
    let (c, w) = (t.coeffs(), window.coeffs());
    let slot = |m: i64| m.rem_euclid(n as i64) as usize;
    let coeffs = (0..n as i64)
        .map(|j| {
            (-(band as i64)..=band as i64)
                .map(|k| w[slot(k)] * c[slot(j - k)])
                .sum::<Complex64>()
        })
        .collect();
    SpectralFunction::from_coeffs(*t.torus(), coeffs, t.tag())
}

/// Parameters of [`detect_regularity`] and [`detect_smooth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectSettings {
    #[serde(with = "crate::json::float")]
    pub p: f64,
    #[serde(with = "crate::json::float")]
    pub q: f64,
    /// First derivative order tried.
    pub k_start: u32,
    /// Largest derivative order the escalation may reach.
    pub k_cap: u32,
    /// Highest order scanned by the smoothness test.
    pub k_max: u32,
    /// Fits with a larger standard error are inconclusive.
    pub stderr_limit: f64,
    pub verdict: VerdictOptions,
}

impl DetectSettings {
    pub fn new(p: f64, q: f64) -> Self {
        Self {
            p,
            q,
            k_start: 0,
            k_cap: 12,
            k_max: 8,
            stderr_limit: 0.2,
            verdict: VerdictOptions::default(),
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k_start = k;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    Besov { r_hat: f64 },
    Smooth,
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_conclusive(&self) -> bool {
        !matches!(self, Verdict::Inconclusive { .. })
    }
}

/// Evidence for or against smoothness: `s_hat(k)` for `k = 0 ..= k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothEvidence {
    pub smooth: bool,
    /// `-slope` of the `W^{k,p}` profile; `-inf` when the profile vanishes.
    #[serde(with = "crate::json::float_vec")]
    pub s_hat: Vec<f64>,
    /// An exponent `s` for which every order converged.
    pub witness: Option<f64>,
    pub scanned: (f64, f64),
    pub k_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    #[serde(with = "crate::json::float")]
    pub r_hat: f64,
    #[serde(with = "crate::json::float")]
    pub s_hat: f64,
    pub k_used: u32,
    pub stderr: f64,
    pub window: (f64, f64),
    pub fit: ExponentFit,
    /// `(k, r_hat)` for every order tried.
    pub history: Vec<(u32, f64)>,
    pub settings: DetectSettings,
    pub smooth: Option<SmoothEvidence>,
    pub verdict: Verdict,
}

fn phi_profile_fit(
    t: &SpectralFunction,
    pair: &LpPair,
    grid: &ScaleGrid,
    k: u32,
    settings: &DetectSettings,
) -> Result<ExponentFit> {
    let profile = sweep(t, &pair.phi, grid, k, settings.p, &pair.phi.id())?;
    critical_exponent_with(&profile, &settings.verdict.fit)
}

/// Fits `||T * phi_eps||_{W^{k,p}} ~ eps^{-s_hat}` and reports `r_hat = k - s_hat`,
/// raising `k` by 2 until `k > r_hat + 1`.
pub fn detect_regularity(
    t: &SpectralFunction,
    settings: &DetectSettings,
    pair: &LpPair,
    grid: &ScaleGrid,
) -> Result<RegularityReport> {
    let mut k = settings.k_start;
    let mut history = Vec::new();
    loop {
        let fit = phi_profile_fit(t, pair, grid, k, settings)?;
        let r_hat = k as f64 + fit.slope;
        history.push((k, r_hat));
        let report = |verdict| RegularityReport {
            r_hat,
            s_hat: -fit.slope,
            k_used: k,
            stderr: fit.stderr,
            window: fit.window,
            fit,
            history: history.clone(),
            settings: *settings,
            smooth: None,
            verdict,
        };
        if fit.is_vanishing() {
            return Ok(report(Verdict::Inconclusive {
                reason: "profile vanishes identically at small scales".into(),
            }));
        }
        if k as f64 > r_hat + 1.0 {
            let verdict = if fit.stderr > settings.stderr_limit {
                Verdict::Inconclusive {
                    reason: format!(
                        "fit stderr {:.3} exceeds {}",
                        fit.stderr, settings.stderr_limit
                    ),
                }
            } else {
                Verdict::Besov { r_hat }
            };
            return Ok(report(verdict));
        }
        if k + 2 > settings.k_cap {
            return Ok(report(Verdict::Inconclusive {
                reason: format!("order escalation reached the cap k = {}", settings.k_cap),
            }));
        }
        k += 2;
    }
}

/// Single fit at the order `settings.k_start`, without escalation. The
/// estimate is reported as conclusive only when `k > r_hat`.
pub fn detect_at_order(
    t: &SpectralFunction,
    settings: &DetectSettings,
    pair: &LpPair,
    grid: &ScaleGrid,
) -> Result<RegularityReport> {
    let single = DetectSettings {
        k_cap: settings.k_start,
        ..*settings
    };
    let mut report = detect_regularity(t, &single, pair, grid)?;
    report.settings = *settings;
    if report.fit.is_vanishing() || report.stderr > settings.stderr_limit {
        return Ok(report);
    }
    report.verdict = if (report.k_used as f64) > report.r_hat {
        Verdict::Besov { r_hat: report.r_hat }
    } else {
        Verdict::Inconclusive {
            reason: format!("order k = {} does not exceed r_hat = {:.3}", report.k_used, report.r_hat),
        }
    };
    Ok(report)
}

/// Whether some `s` makes `int eps^{qs} ||T * phi_eps||^q_{W^{k,p}} deps/eps`
/// converge simultaneously for every `k <= k_max`.
pub fn detect_smooth(
    t: &SpectralFunction,
    settings: &DetectSettings,
    pair: &LpPair,
    grid: &ScaleGrid,
) -> Result<SmoothEvidence> {
    if settings.k_max < 4 {
        return Err(Error::InvalidParameter(format!(
            "smoothness scan needs k_max >= 4, got {}",
            settings.k_max
        )));
    }
    let fits = (0..=settings.k_max)
        .map(|k| phi_profile_fit(t, pair, grid, k, settings))
        .collect::<Result<Vec<_>>>()?;
    let lo = -2.0;
    let hi = settings.k_max as f64 / 2.0;
    let steps = ((hi - lo) / 0.25).round() as usize;
    let witness = (0..=steps).map(|i| lo + 0.25 * i as f64).find(|&s| {
        fits.iter()
            .all(|f| verdict_from_fit(f, -s, settings.q, &settings.verdict) == Convergence::Convergent)
    });
    Ok(SmoothEvidence {
        smooth: witness.is_some(),
        s_hat: fits.iter().map(|f| -f.slope).collect(),
        witness,
        scanned: (lo, hi),
        k_max: settings.k_max,
    })
}

/// Smoothness test first; the Besov exponent is estimated only for non-smooth input.
pub fn analyze(
    t: &SpectralFunction,
    settings: &DetectSettings,
    pair: &LpPair,
    grid: &ScaleGrid,
) -> Result<RegularityReport> {
    let evidence = detect_smooth(t, settings, pair, grid)?;
    let mut report = if evidence.smooth {
        // No finite exponent exists, so a single order suffices for the fit diagnostics.
        let single = DetectSettings {
            k_cap: settings.k_start,
            ..*settings
        };
        let mut r = detect_regularity(t, &single, pair, grid)?;
        r.settings = *settings;
        r
    } else {
        detect_regularity(t, settings, pair, grid)?
    };
    if evidence.smooth {
        report.r_hat = f64::INFINITY;
        report.s_hat = f64::NEG_INFINITY;
        report.verdict = Verdict::Smooth;
    }
    report.smooth = Some(evidence);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::kernels::{build_lp_pair, build_mollifier};

    fn setup() -> (Torus, LpPair, ScaleGrid) {
        let torus = Torus::unit(12);
        let pair = build_lp_pair(32.0, 0.5).unwrap();
        let grid = default_grid(&pair, &torus).unwrap();
        (torus, pair, grid)
    }

    #[test]
    fn zero_has_zero_norm() {
        let (torus, pair, grid) = setup();
        let n = besov_norm(&SpectralFunction::zero(torus), 1.0, 2.0, 2.0, &pair, &grid).unwrap();
        assert_eq!(n.value, 0.0);
        assert_eq!(n.verdict, Convergence::Convergent);
    }

    #[test]
    fn invalid_pair_is_rejected() {
        let (torus, pair, grid) = setup();
        let bad = LpPair::new(pair.phi, pair.phi, 32.0, 0.5);
        let err = besov_norm(&SpectralFunction::dirac(torus), 1.0, 2.0, 2.0, &bad, &grid);
        assert!(matches!(err, Err(Error::InvalidPair(_))));
    }

    #[test]
    fn embedding_of_one_is_one() {
        let (torus, _, _) = setup();
        let phi = build_mollifier(32.0).unwrap();
        let net = embed(&SpectralFunction::constant(torus, 1.0), &phi).unwrap();
        for eps in [1.0, 0.1, 0.01] {
            let v = net.evaluate(eps).unwrap().synthesize();
            assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-12));
        }
        assert!(embed(&SpectralFunction::dirac(torus), &build_lp_pair(8.0, 0.5).unwrap().psi).is_err());
    }

    #[test]
    fn localize_identities() {
        let (torus, _, _) = setup();
        let one = SpectralFunction::constant(torus, 1.0);
        let w = crate::kernels::cosine_bump(torus, 0.5, 8);
        let k = corpus::kink(torus);
        let same = localize(&k.truncate(64), &one).unwrap();
        assert!(same.sub(&k.truncate(64)).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-12);
        let got = localize(&one, &w).unwrap();
        assert!(got.sub(&w).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-12);
        assert!(localize(&one, &w.scale(2.0)).is_err());
    }

    #[test]
    fn smooth_input_escalates_to_the_cap() {
        let (torus, pair, grid) = setup();
        let r = detect_regularity(&corpus::smooth_trig(torus), &DetectSettings::new(2.0, 2.0), &pair, &grid).unwrap();
        assert!(!r.verdict.is_conclusive());
        assert_eq!(r.k_used, 12);
    }

    #[test]
    fn report_identity_holds() {
        let (torus, pair, grid) = setup();
        let r = detect_regularity(&corpus::heaviside(torus), &DetectSettings::new(2.0, f64::INFINITY).with_k(1), &pair, &grid).unwrap();
        assert!((r.r_hat - (r.k_used as f64 - r.s_hat)).abs() < 1e-12);
        assert!(r.k_used as f64 > r.r_hat + 1.0);
    }
}
