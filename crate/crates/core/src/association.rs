//! Strong and rapid association between a net and a distribution.
//!
//! A net `f_eps` is strongly associated to `T` with rate `b` when
//! `|<T - f_eps, rho>| = O(eps^b)` for every test function `rho`, and rapidly
//! associated when this holds for every `b`. The quantifier over `rho` is
//! replaced by a seeded battery of band-limited bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::cosine_bump;
use crate::nets::NetSpec;
use crate::scale::{
    critical_exponent_with, segment_slopes, ExponentFit, ProfileMeta, ScaleGrid, ScaleProfile,
    VerdictOptions,
};
use crate::spectral::{SpectralFunction, Torus};

/// A named test function.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub id: String,
    pub function: SpectralFunction,
}

/// `count` bumps `cos^{2M}(pi (x - c)/L)` with uniform centres and `M` in `8..=32`.
pub fn bump_battery(torus: Torus, count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let center = rng.random_range(0.0..torus.period());
            let order: u32 = rng.random_range(8..=32);
            TestFunction {
                id: format!("bump{i}[c={center:.6},M={order}]"),
                function: cosine_bump(torus, center, order),
            }
        })
        .collect()
}

/// Pairings below this many ulps of `L sum |c_j| |d_{-j}|` are indistinguishable from zero.
const ROUNDOFF_ULPS: f64 = 64.0;

/// `eps -> |<T - f_eps, rho>|`.
pub fn pairing_profile(
    t: &SpectralFunction,
    net: &NetSpec,
    rho: &SpectralFunction,
    grid: &ScaleGrid,
) -> Result<ScaleProfile> {
    Ok(pairing_profile_with_floor(t, net, rho, grid)?.0)
}

/// [`pairing_profile`] together with the largest rounding floor over the grid.
pub fn pairing_profile_with_floor(
    t: &SpectralFunction,
    net: &NetSpec,
    rho: &SpectralFunction,
    grid: &ScaleGrid,
) -> Result<(ScaleProfile, f64)> {
    let scales = grid.scales();
    let pairs = scales
        .par_iter()
        .map(|&eps| {
            let diff = t.sub(&net.evaluate(eps)?)?;
            let floor = ROUNDOFF_ULPS * f64::EPSILON * diff.pairing_magnitude(rho)?;
            Ok((diff.pairing(rho)?.abs(), floor))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let floor = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let profile = ScaleProfile::new(
        scales,
        pairs.into_iter().map(|p| p.0).collect(),
        ProfileMeta {
            p: 1.0,
            k: 0,
            kernel: format!("pairing[{}]", net.label()),
        },
    )?;
    Ok((profile, floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationOptions {
    pub verdict: VerdictOptions,
    /// Decay faster than `eps^rapid_slope` (with a steepening tail) counts as rapid.
    pub rapid_slope: f64,
    /// Per-test-function fits with a larger standard error are inconclusive.
    pub stderr_limit: f64,
}

impl Default for AssociationOptions {
    fn default() -> Self {
        Self {
            verdict: VerdictOptions::default(),
            rapid_slope: 10.0,
            stderr_limit: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AssociationVerdict {
    Strong { b_hat: f64 },
    Rapid,
    None,
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationReport {
    pub test_functions: Vec<String>,
    /// Decay slope per test function; `inf` for vanishing or super-polynomial decay.
    #[serde(with = "crate::json::float_vec")]
    pub slopes: Vec<f64>,
    pub fits: Vec<ExponentFit>,
    #[serde(with = "crate::json::float")]
    pub b_hat: f64,
    #[serde(with = "crate::json::float")]
    pub q: f64,
    pub verdict: AssociationVerdict,
}

impl AssociationReport {
    pub fn is_rapid(&self) -> bool {
        self.verdict == AssociationVerdict::Rapid
    }
}

/// Decay exponent of a pairing profile; `inf` for vanishing or super-polynomial decay.
///
/// Values under `floor` (absolute) count as zero when they form the small-scale tail.
pub fn decay_slope(profile: &ScaleProfile, floor: f64, opts: &AssociationOptions) -> Result<(f64, ExponentFit)> {
    let max = profile.norms().iter().copied().fold(0.0, f64::max);
    let mut fit_opts = opts.verdict.fit;
    if max > 0.0 {
        fit_opts.zero_floor = fit_opts.zero_floor.max(floor / max);
    }
    let fit = critical_exponent_with(profile, &fit_opts)?;
    if fit.is_vanishing() {
        return Ok((f64::INFINITY, fit));
    }
    let tail = segment_slopes(profile, 3, &fit_opts)
        .first()
        .copied()
        .unwrap_or(fit.slope);
    if fit.slope > opts.rapid_slope && tail >= fit.slope {
        return Ok((f64::INFINITY, fit));
    }
    Ok((fit.slope, fit))
}

/// Per-test-function decay of `<T - f_eps, rho>`, summarised as rapid, strong or none.
pub fn association_verdict(
    t: &SpectralFunction,
    net: &NetSpec,
    battery: &[TestFunction],
    q: f64,
    grid: &ScaleGrid,
    opts: &AssociationOptions,
) -> Result<AssociationReport> {
    if battery.is_empty() {
        return Err(Error::InvalidParameter("empty test-function battery".into()));
    }
    let mut slopes = Vec::with_capacity(battery.len());
    let mut fits = Vec::with_capacity(battery.len());
    for rho in battery {
        let (profile, floor) = pairing_profile_with_floor(t, net, &rho.function, grid)?;
        let (slope, fit) = decay_slope(&profile, floor, opts)?;
        slopes.push(slope);
        fits.push(fit);
    }
    let ids = battery.iter().map(|r| r.id.clone()).collect();
    let worst = slopes
        .iter()
        .zip(&fits)
        .filter(|(s, _)| s.is_finite())
        .min_by(|a, b| a.0.total_cmp(b.0));
    let (b_hat, verdict) = match worst {
        None => (f64::INFINITY, AssociationVerdict::Rapid),
        Some((&b_hat, fit)) => {
            let noisy = fits
                .iter()
                .zip(&slopes)
                .find(|(f, s)| s.is_finite() && f.stderr > opts.stderr_limit);
            if let Some((f, _)) = noisy {
                (
                    b_hat,
                    AssociationVerdict::Inconclusive {
                        reason: format!("decay fit stderr {:.3} exceeds {}", f.stderr, opts.stderr_limit),
                    },
                )
            } else if b_hat > opts.verdict.margin(fit) {
                (b_hat, AssociationVerdict::Strong { b_hat })
            } else {
                (b_hat, AssociationVerdict::None)
            }
        }
    };
    Ok(AssociationReport {
        test_functions: ids,
        slopes,
        fits,
        b_hat,
        q,
        verdict,
    })
}

/// Loss of regularity `s0 = s (k + d + k0) / (s + b)` in the Hölder-Zygmund
/// bound `k - s0` for a net of rate `b` in the `(k, s)` scale space.
pub fn holder_bound(s: f64, b: f64, k: u32, d: u32, k0: u32) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(s * (k + d + k0) as f64 / (s + b))
}
