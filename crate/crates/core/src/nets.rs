//! Nets `eps -> f_eps` and their moderate / negligible classification.
//!
//! A net is moderate when `int_0^1 eps^{qs} ||f_eps||^q deps/eps` is finite
//! for some `s`, and negligible when `int_0^1 eps^{-qs} ||f_eps||^q deps/eps`
//! is finite for every `s`. Sampled nets are judged from the fitted exponent
//! of their norm profile; spike nets, whose mass sits on intervals of width
//! `e^{-n}` that no grid resolves, are judged from closed-form per-spike sums
//! carried out in log space.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale::{
    critical_exponent_with, segment_slopes, verdict_from_fit, Convergence, ExponentFit,
    ProfileMeta, ScaleGrid, ScaleProfile, VerdictOptions,
};
use crate::spectral::SpectralFunction;

pub type ValueFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FunctionFn = Arc<dyn Fn(f64) -> Result<SpectralFunction> + Send + Sync>;

#[derive(Clone)]
pub enum NetKind {
    Constant(ValueFn),
    Function(FunctionFn),
    Spike(SpikeNet),
}

/// A net together with a label used in reports.
#[derive(Clone)]
pub struct NetSpec {
    label: String,
    kind: NetKind,
    continuous: bool,
}

impl fmt::Debug for NetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            NetKind::Constant(_) => "constant".to_string(),
            NetKind::Function(_) => "function".to_string(),
            NetKind::Spike(s) => format!("{s:?}"),
        };
        f.debug_struct("NetSpec")
            .field("label", &self.label)
            .field("kind", &kind)
            .field("continuous", &self.continuous)
            .finish()
    }
}

impl NetSpec {
    pub fn constant<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: NetKind::Constant(Arc::new(f)),
            continuous: true,
        }
    }

    pub fn function<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<SpectralFunction> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: NetKind::Function(Arc::new(f)),
            continuous: true,
        }
    }

    pub fn spike(net: SpikeNet) -> Self {
        Self {
            label: net.label(),
            kind: NetKind::Spike(net),
            continuous: true,
        }
    }

    /// Marks the net as not continuous in `eps` (kept for reporting only).
    pub fn discontinuous(mut self) -> Self {
        self.continuous = false;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &NetKind {
        &self.kind
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn is_function_net(&self) -> bool {
        matches!(self.kind, NetKind::Function(_))
    }

    /// Scalar value of a constant or spike net.
    pub fn value(&self, eps: f64) -> Result<f64> {
        match &self.kind {
            NetKind::Constant(f) => Ok(f(eps)),
            NetKind::Spike(s) => Ok(s.value(eps)),
            NetKind::Function(_) => Err(Error::InvalidParameter(format!(
                "net {} is function-valued",
                self.label
            ))),
        }
    }

    /// Member `f_eps` of a function net.
    pub fn evaluate(&self, eps: f64) -> Result<SpectralFunction> {
        match &self.kind {
            NetKind::Function(f) => f(eps),
            _ => Err(Error::InvalidParameter(format!(
                "net {} is scalar-valued",
                self.label
            ))),
        }
    }

    /// Product with a net of constants, `eps -> c_eps f_eps`.
    pub fn times(&self, c: &NetSpec) -> Result<NetSpec> {
        let cf = match &c.kind {
            NetKind::Constant(f) => f.clone(),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "{} is not a net of constants",
                    c.label
                )))
            }
        };
        let label = format!("({})*({})", c.label, self.label);
        Ok(match &self.kind {
            NetKind::Constant(f) => {
                let f = f.clone();
                NetSpec::constant(label, move |e| cf(e) * f(e))
            }
            NetKind::Function(f) => {
                let f = f.clone();
                NetSpec::function(label, move |e| Ok(f(e)?.scale(cf(e))))
            }
            NetKind::Spike(_) => {
                return Err(Error::InvalidParameter(
                    "products of spike nets are not sampled".into(),
                ))
            }
        })
    }

    fn combine(&self, other: &NetSpec, sign: f64, op: &str) -> Result<NetSpec> {
        let label = format!("({}){op}({})", self.label, other.label);
        match (&self.kind, &other.kind) {
            (NetKind::Function(a), NetKind::Function(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Ok(NetSpec::function(label, move |e| a(e)?.add(&b(e)?.scale(sign))))
            }
            (NetKind::Constant(a), NetKind::Constant(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Ok(NetSpec::constant(label, move |e| a(e) + sign * b(e)))
            }
            _ => Err(Error::InvalidParameter(format!(
                "cannot combine {} and {}",
                self.label, other.label
            ))),
        }
    }

    pub fn add(&self, other: &NetSpec) -> Result<NetSpec> {
        self.combine(other, 1.0, "+")
    }

    pub fn sub(&self, other: &NetSpec) -> Result<NetSpec> {
        self.combine(other, -1.0, "-")
    }

    /// Pointwise square of a scalar net.
    pub fn squared(&self) -> Result<NetSpec> {
        match &self.kind {
            NetKind::Constant(f) => {
                let f = f.clone();
                Ok(NetSpec::constant(format!("({})^2", self.label), move |e| f(e) * f(e)))
            }
            NetKind::Spike(s) => Ok(NetSpec::spike(s.squared())),
            NetKind::Function(_) => Err(Error::InvalidParameter(
                "squares are only formed for scalar nets".into(),
            )),
        }
    }
}

/// Deterministic perturbation `eps -> f_eps + w(eps) g`.
pub fn perturbed<W>(base: &NetSpec, g: SpectralFunction, weight: W, label: &str) -> Result<NetSpec>
where
    W: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let g = Arc::new(g);
    let offset = NetSpec::function(label.to_string(), move |e| Ok(g.scale(weight(e))));
    let mut out = base.add(&offset)?;
    out.label = format!("{} + {label}", base.label);
    Ok(out)
}

/// Height law of the spikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpikeVariant {
    /// Plateau height `n^{-2} e^{n/q}`.
    PolynomialDamped,
    /// Plateau height `e^{n/q - sqrt(n)}`.
    RootDamped,
}

impl SpikeVariant {
    /// Accepts the CLI names `remark1` / `remark2` as well as the descriptive names.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "remark1" | "polynomial-damped" => Ok(Self::PolynomialDamped),
            "remark2" | "root-damped" => Ok(Self::RootDamped),
            _ => Err(Error::InvalidParameter(format!("unknown spike variant {name:?}"))),
        }
    }

    pub fn cli_name(&self) -> &'static str {
        match self {
            Self::PolynomialDamped => "remark1",
            Self::RootDamped => "remark2",
        }
    }
}

/// Net of constants that is zero except for trapezoidal spikes centred at
/// `eps = 1/n` (`n >= 4`): plateau of half-width `e^{-n}/2`, linear ramps
/// down to zero at distance `e^{-n}`, raised to `power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeNet {
    pub q: f64,
    pub variant: SpikeVariant,
    pub power: u32,
}

/// Default number of spikes summed before the tail test.
pub const SPIKE_NMAX: u64 = 120;
const SPIKE_FIRST: u64 = 4;
const HORIZON_CAP: u64 = 10_000_000;
const RATIO_THRESHOLD: f64 = 1e-3;
const RATIO_RUN: usize = 10;

impl SpikeNet {
    pub fn new(variant: SpikeVariant, q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("spike net needs finite q >= 1, got {q}")));
        }
        Ok(Self { q, variant, power: 1 })
    }

    pub fn squared(&self) -> Self {
        Self {
            power: 2 * self.power,
            ..*self
        }
    }

    pub fn label(&self) -> String {
        let base = format!("spike[{}, q={}]", self.variant.cli_name(), self.q);
        if self.power == 1 {
            base
        } else {
            format!("{base}^{}", self.power)
        }
    }

    /// `ln` of the plateau height of spike `n`.
    pub fn log_height(&self, n: u64) -> f64 {
        let nf = n as f64;
        let base = match self.variant {
            SpikeVariant::PolynomialDamped => -2.0 * nf.ln() + nf / self.q,
            SpikeVariant::RootDamped => nf / self.q - nf.sqrt(),
        };
        self.power as f64 * base
    }

    /// `ln |f_eps|`, or `-inf` off the spikes.
    pub fn log_value(&self, eps: f64) -> f64 {
        if eps.is_nan() || eps <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let n = (1.0 / eps).round();
        if n < SPIKE_FIRST as f64 || !n.is_finite() {
            return f64::NEG_INFINITY;
        }
        let n = n as u64;
        let half = (-(n as f64)).exp();
        let d = (eps - 1.0 / n as f64).abs();
        if d >= half {
            f64::NEG_INFINITY
        } else if d <= 0.5 * half {
            self.log_height(n)
        } else {
            self.log_height(n) + self.power as f64 * ((half - d) / (0.5 * half)).ln()
        }
    }

    pub fn value(&self, eps: f64) -> f64 {
        self.log_value(eps).exp()
    }

    /// `ln` of the bound on `int eps^{q_test s - 1} |f_eps|^{q_test}` over spike `n`.
    pub fn log_term(&self, n: u64, s: f64, q_test: f64) -> f64 {
        let nf = n as f64;
        let w = (-nf).exp();
        let expo = q_test * s - 1.0;
        let worst = if expo >= 0.0 { 1.0 / nf + w } else { 1.0 / nf - w };
        std::f64::consts::LN_2 - nf + q_test * self.log_height(n) + expo * worst.ln()
    }

    /// Coefficients `(A, B, C)` of `ln term ~ A ln n + B n + C sqrt(n)`.
    fn term_shape(&self, s: f64, q_test: f64) -> (f64, f64, f64) {
        let pw = self.power as f64;
        let b = -1.0 + q_test * pw / self.q;
        let weight = -(q_test * s - 1.0);
        match self.variant {
            SpikeVariant::PolynomialDamped => (-2.0 * q_test * pw + weight, b, 0.0),
            SpikeVariant::RootDamped => (weight, b, -q_test * pw),
        }
    }

    fn horizon(&self, s: f64, q_test: f64, n_max: u64) -> u64 {
        let (a, b, c) = self.term_shape(s, q_test);
        let b = if b.abs() < 1e-12 { 0.0 } else { b };
        let decreasing = b < 0.0 || (b == 0.0 && c < 0.0);
        if !decreasing && b == 0.0 {
            return n_max;
        }
        // Largest root u = sqrt(n) of B u^2 + (C/2) u + A = 0, the last turning point.
        let u = if b == 0.0 {
            -2.0 * a / c
        } else {
            let disc = 0.25 * c * c - 4.0 * a * b;
            if disc < 0.0 {
                0.0
            } else {
                let r1 = (-0.5 * c + disc.sqrt()) / (2.0 * b);
                let r2 = (-0.5 * c - disc.sqrt()) / (2.0 * b);
                r1.max(r2)
            }
        };
        let turn = if u > 0.0 { (u * u).ceil() as u64 } else { 0 };
        let factor = if decreasing { 10 } else { 2 };
        n_max.max(turn.saturating_mul(factor)).min(HORIZON_CAP)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesVerdict {
    Finite,
    Divergent,
}

/// Outcome of [`spike_integral`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeIntegral {
    pub verdict: SeriesVerdict,
    /// `ln` of the partial sum at the horizon.
    pub log_value: f64,
    pub horizon: u64,
    /// `ln` of the partial sums for `n = 4 ..= min(horizon, n_max)`.
    pub log_partial_sums: Vec<f64>,
    /// `term / partial sum` over the last terms before the horizon.
    pub tail_ratios: Vec<f64>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `int_0^1 eps^{q_test s} |f_eps|^{q_test} deps/eps` summed spike by spike in log space.
pub fn spike_integral(net: &SpikeNet, s: f64, q_test: f64) -> SpikeIntegral {
    spike_integral_upto(net, s, q_test, SPIKE_NMAX)
}

pub fn spike_integral_upto(net: &SpikeNet, s: f64, q_test: f64, n_max: u64) -> SpikeIntegral {
    let horizon = net.horizon(s, q_test, n_max);
    let mut log_sum = f64::NEG_INFINITY;
    let mut recorded = Vec::new();
    let mut ratios = std::collections::VecDeque::with_capacity(RATIO_RUN);
    for n in SPIKE_FIRST..=horizon {
        let t = net.log_term(n, s, q_test);
        log_sum = log_add(log_sum, t);
        if n <= n_max {
            recorded.push(log_sum);
        }
        if n + RATIO_RUN as u64 > horizon {
            ratios.push_back(t - log_sum);
        }
    }
    // Convergence needs the term/partial-sum ratio to be both small and still falling.
    let decaying = ratios.iter().zip(ratios.iter().skip(1)).all(|(a, b)| b < a);
    let small = ratios.iter().all(|r| *r < RATIO_THRESHOLD.ln());
    let finite = decaying && small;
    let tail_ratios: Vec<f64> = ratios.into_iter().map(f64::exp).collect();
    SpikeIntegral {
        verdict: if finite {
            SeriesVerdict::Finite
        } else {
            SeriesVerdict::Divergent
        },
        log_value: log_sum,
        horizon,
        log_partial_sums: recorded,
        tail_ratios,
    }
}

/// Grid, scan range and verdict margin of the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub grid: ScaleGrid,
    /// Integer exponents are scanned over `[-s_max, s_max]`.
    pub s_max: i32,
    pub verdict: VerdictOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            grid: ScaleGrid::new(1e-3, 1.0, 48).expect("valid default grid"),
            s_max: 10,
            verdict: VerdictOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Moderateness {
    Moderate { s_star: i32 },
    NotModerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Negligibility {
    Negligible,
    NotNegligible { s_fail: i32 },
}

/// Verdict together with the fit it was read from (absent for spike nets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classified<V> {
    pub net: String,
    pub verdict: V,
    pub fit: Option<ExponentFit>,
}

/// `eps -> ||f_eps||_{W^{k,p}(omega)}` for function nets (`omega` given by a
/// window multiplied in), `eps -> |c_eps|` for nets of constants.
pub fn net_sobolev_profile(
    net: &NetSpec,
    k: u32,
    p: f64,
    window: Option<&SpectralFunction>,
    grid: &ScaleGrid,
) -> Result<ScaleProfile> {
    let scales = grid.scales();
    let norms = match net.kind() {
        NetKind::Constant(f) => scales.iter().map(|&e| f(e).abs()).collect::<Vec<f64>>(),
        NetKind::Function(f) => scales
            .par_iter()
            .map(|&e| {
                let fe = f(e)?;
                let fe = match window {
                    Some(w) => fe.multiply(w)?,
                    None => fe,
                };
                fe.sobolev_norm(k, p)
            })
            .collect::<Result<Vec<f64>>>()?,
        NetKind::Spike(_) => {
            return Err(Error::InvalidParameter(
                "spike nets are evaluated in closed form, not on a grid".into(),
            ))
        }
    };
    ScaleProfile::new(
        scales,
        norms,
        ProfileMeta {
            p,
            k,
            kernel: net.label().to_string(),
        },
    )
}

/// Nets of constants are evaluated in closed form, so only exact zeros are dropped from their fits.
fn exact_if_scalar(net: &NetSpec, opts: &ClassifyOptions) -> ClassifyOptions {
    let mut out = *opts;
    if !net.is_function_net() {
        out.verdict.fit.zero_floor = 0.0;
    }
    out
}

/// Fitted exponent of a profile, taking the steeper of the whole-tail fit and
/// the smallest-scale segment so that super-polynomial behaviour is not
/// averaged away.
fn growth_exponent(profile: &ScaleProfile, opts: &ClassifyOptions) -> Result<ExponentFit> {
    let fit = critical_exponent_with(profile, &opts.verdict.fit)?;
    if fit.is_vanishing() {
        return Ok(fit);
    }
    let segs = segment_slopes(profile, 3, &opts.verdict.fit);
    Ok(match segs.first() {
        Some(&tail) if tail < fit.slope => ExponentFit { slope: tail, ..fit },
        _ => fit,
    })
}

fn decay_exponent(profile: &ScaleProfile, opts: &ClassifyOptions) -> Result<ExponentFit> {
    let fit = critical_exponent_with(profile, &opts.verdict.fit)?;
    if fit.is_vanishing() {
        return Ok(fit);
    }
    let segs = segment_slopes(profile, 3, &opts.verdict.fit);
    Ok(match segs.first() {
        Some(&tail) if tail > fit.slope => ExponentFit { slope: tail, ..fit },
        _ => fit,
    })
}

/// Smallest integer `s` in `[-s_max, s_max]` with `int eps^{qs} ||f_eps||^q deps/eps < inf`.
pub fn classify_moderate(
    net: &NetSpec,
    q: f64,
    k: u32,
    p: f64,
    window: Option<&SpectralFunction>,
    opts: &ClassifyOptions,
) -> Result<Classified<Moderateness>> {
    let range = -opts.s_max..=opts.s_max;
    if let NetKind::Spike(spike) = net.kind() {
        let s_star = range
            .into_iter()
            .find(|&s| spike_integral(spike, s as f64, q).verdict == SeriesVerdict::Finite);
        return Ok(Classified {
            net: net.label().to_string(),
            verdict: s_star.map_or(Moderateness::NotModerate, |s_star| Moderateness::Moderate { s_star }),
            fit: None,
        });
    }
    let opts = &exact_if_scalar(net, opts);
    let profile = match net_sobolev_profile(net, k, p, window, &opts.grid) {
        Ok(profile) => profile,
        // Values beyond the double range grow faster than any power on this grid.
        Err(Error::NonFinite) => {
            return Ok(Classified {
                net: net.label().to_string(),
                verdict: Moderateness::NotModerate,
                fit: None,
            })
        }
        Err(e) => return Err(e),
    };
    let fit = growth_exponent(&profile, opts)?;
    let s_star = range.into_iter().find(|&s| {
        verdict_from_fit(&fit, -(s as f64), q, &opts.verdict) == Convergence::Convergent
    });
    Ok(Classified {
        net: net.label().to_string(),
        verdict: s_star.map_or(Moderateness::NotModerate, |s_star| Moderateness::Moderate { s_star }),
        fit: Some(fit),
    })
}

/// Negligibility from the `L^p` profile alone: convergence of
/// `int eps^{-qs} ||f_eps||_p^q deps/eps` for `s = 1, ..., s_max`.
pub fn classify_negligible(
    net: &NetSpec,
    q: f64,
    p: f64,
    window: Option<&SpectralFunction>,
    opts: &ClassifyOptions,
) -> Result<Classified<Negligibility>> {
    classify_negligible_upto(net, q, p, 0, window, opts)
}

/// As [`classify_negligible`], requiring the bound for every derivative order `<= k_max`.
pub fn classify_negligible_upto(
    net: &NetSpec,
    q: f64,
    p: f64,
    k_max: u32,
    window: Option<&SpectralFunction>,
    opts: &ClassifyOptions,
) -> Result<Classified<Negligibility>> {
    let label = net.label().to_string();
    if let NetKind::Spike(spike) = net.kind() {
        let fail = (1..=opts.s_max)
            .find(|&s| spike_integral(spike, -(s as f64), q).verdict == SeriesVerdict::Divergent);
        return Ok(Classified {
            net: label,
            verdict: fail.map_or(Negligibility::Negligible, |s_fail| Negligibility::NotNegligible { s_fail }),
            fit: None,
        });
    }
    let opts = &exact_if_scalar(net, opts);
    let orders = if net.is_function_net() { k_max } else { 0 };
    let mut worst: Option<(i32, ExponentFit)> = None;
    let mut last_fit = None;
    for k in 0..=orders {
        let profile = net_sobolev_profile(net, k, p, window, &opts.grid)?;
        let fit = decay_exponent(&profile, opts)?;
        let fail = (1..=opts.s_max)
            .find(|&s| verdict_from_fit(&fit, s as f64, q, &opts.verdict) != Convergence::Convergent);
        if let Some(s) = fail {
            if worst.as_ref().is_none_or(|(w, _)| s < *w) {
                worst = Some((s, fit));
            }
        }
        last_fit = Some(fit);
    }
    Ok(match worst {
        Some((s_fail, fit)) => Classified {
            net: label,
            verdict: Negligibility::NotNegligible { s_fail },
            fit: Some(fit),
        },
        None => Classified {
            net: label,
            verdict: Negligibility::Negligible,
            fit: last_fit,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Torus;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn unit_constant_net_is_moderate_with_s_star_one() {
        let one = NetSpec::constant("one", |_| 1.0);
        let c = classify_moderate(&one, 2.0, 0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Moderateness::Moderate { s_star: 1 });
    }

    #[test]
    fn power_nets_have_matching_s_star() {
        let net = NetSpec::constant("eps^-3", |e: f64| e.powi(-3));
        let c = classify_moderate(&net, 1.0, 0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Moderateness::Moderate { s_star: 4 });
        let c = classify_moderate(&net, f64::INFINITY, 0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Moderateness::Moderate { s_star: 3 });
    }

    #[test]
    fn exponential_growth_is_not_moderate() {
        let net = NetSpec::constant("exp(1/eps)", |e: f64| (1.0 / e).exp());
        let c = classify_moderate(&net, 2.0, 0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Moderateness::NotModerate);
        let net = NetSpec::constant("exp(eps^-0.7)", |e: f64| e.powf(-0.7).exp());
        let c = classify_moderate(&net, 2.0, 0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Moderateness::NotModerate);
    }

    #[test]
    fn exponential_decay_is_negligible() {
        let net = NetSpec::constant("exp(-1/eps)", |e: f64| (-1.0 / e).exp());
        let c = classify_negligible(&net, 2.0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Negligibility::Negligible);
        let net = NetSpec::constant("eps^3", |e: f64| e.powi(3));
        let c = classify_negligible(&net, 2.0, 2.0, None, &opts()).unwrap();
        assert_eq!(c.verdict, Negligibility::NotNegligible { s_fail: 3 });
    }

    #[test]
    fn spike_values_follow_the_trapezoid() {
        let net = SpikeNet::new(SpikeVariant::PolynomialDamped, 2.0).unwrap();
        let n = 6u64;
        let w = (-(n as f64)).exp();
        let centre = 1.0 / n as f64;
        let h = net.log_height(n).exp();
        assert!((net.value(centre) - h).abs() < 1e-12 * h);
        assert!((net.value(centre + 0.75 * w) - 0.5 * h).abs() < 1e-9 * h);
        assert_eq!(net.value(centre + 1.5 * w), 0.0);
        assert_eq!(net.value(0.5), 0.0);
    }

    #[test]
    fn spike_terms_match_closed_form_shape() {
        // ln term = ln 2 + (1 - 2q - qs) ln n + O(n e^{-n}) for the polynomially damped net at its own q.
        let net = SpikeNet::new(SpikeVariant::PolynomialDamped, 2.0).unwrap();
        for n in [20u64, 50, 100] {
            let want = std::f64::consts::LN_2 + (1.0 - 4.0) * (n as f64).ln();
            assert!((net.log_term(n, 0.0, 2.0) - want).abs() < 1e-6);
        }
    }

    #[test]
    fn spike_series_verdicts() {
        let poly = SpikeNet::new(SpikeVariant::PolynomialDamped, 2.0).unwrap();
        assert_eq!(spike_integral(&poly, 0.0, 2.0).verdict, SeriesVerdict::Finite);
        assert_eq!(spike_integral(&poly.squared(), 10.0, 2.0).verdict, SeriesVerdict::Divergent);
        let root = SpikeNet::new(SpikeVariant::RootDamped, 2.0).unwrap();
        let deep = spike_integral(&root, -10.0, 2.0);
        assert_eq!(deep.verdict, SeriesVerdict::Finite);
        assert!(deep.horizon > SPIKE_NMAX);
        assert_eq!(spike_integral(&root, 5.0, 4.0).verdict, SeriesVerdict::Divergent);
    }

    #[test]
    fn moderate_module_closure_on_function_nets() {
        let t = Torus::unit(8);
        let g = crate::corpus::smooth_trig(t);
        let a = NetSpec::function("eps^-2 g", move |e: f64| Ok(g.scale(e.powi(-2))));
        let c = NetSpec::constant("eps^-1", |e: f64| 1.0 / e);
        let ca = a.times(&c).unwrap();
        let v = classify_moderate(&ca, 2.0, 1, 2.0, None, &opts()).unwrap();
        assert_eq!(v.verdict, Moderateness::Moderate { s_star: 4 });
    }

    #[test]
    fn nets_combine_only_with_matching_kinds() {
        let c = NetSpec::constant("c", |_| 1.0);
        let s = NetSpec::spike(SpikeNet::new(SpikeVariant::RootDamped, 1.0).unwrap());
        assert!(c.add(&s).is_err());
        assert!(s.times(&c).is_err());
        assert!(c.evaluate(0.5).is_err());
        assert!(SpikeVariant::parse("remark3").is_err());
    }
}
