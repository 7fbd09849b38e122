//! Scale grids, scale profiles and power-law exponent estimation.
//!
//! A profile samples `N(y)` on a geometric grid `y_j = y_max rho^j`. The
//! measure `dy/y` is uniform in `log y`, so the scale integrals
//! `int (y^{-s} N(y))^q dy/y` are evaluated with power-law interpolation in `log y`.
//! Convergence of the untruncated integral is inferred from the fitted
//! exponent `a` of `N(y) ~ y^a` as `y -> 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{min_scale, SpectralFunction, SpectralMultiplier};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    y_min: f64,
    y_max: f64,
    count: usize,
}

impl ScaleGrid {
    pub const MIN_COUNT: usize = 16;

    pub fn new(y_min: f64, y_max: f64, count: usize) -> Result<Self> {
        if !(y_min > 0.0 && y_min < y_max && y_max <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scale grid needs 0 < y_min < y_max <= 1, got [{y_min}, {y_max}]"
            )));
        }
        if count < Self::MIN_COUNT {
            return Err(Error::InvalidParameter(format!(
                "scale grid needs at least {} points, got {count}",
                Self::MIN_COUNT
            )));
        }
        Ok(Self { y_min, y_max, count })
    }

    /// Grid reaching down to the smallest scale at which `kernel` stays below Nyquist.
    pub fn for_kernel<M: SpectralMultiplier + ?Sized>(
        kernel: &M,
        torus: &crate::spectral::Torus,
        y_max: f64,
        count: usize,
    ) -> Result<Self> {
        let y_min = min_scale(kernel, torus) * (1.0 + 1e-9);
        Self::new(y_min, y_max, count)
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn ratio(&self) -> f64 {
        (self.y_min / self.y_max).powf(1.0 / (self.count - 1) as f64)
    }

    /// Scales in decreasing order, `y_0 = y_max`, `y_{J-1} = y_min`.
    pub fn scales(&self) -> Vec<f64> {
        let log_max = self.y_max.ln();
        let step = (self.y_min.ln() - log_max) / (self.count - 1) as f64;
        (0..self.count)
            .map(|j| {
                if j + 1 == self.count {
                    self.y_min
                } else {
                    (log_max + step * j as f64).exp()
                }
            })
            .collect()
    }

    /// Same range with twice as many intervals.
    pub fn refined(&self) -> Self {
        Self {
            count: 2 * self.count - 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfileMeta {
    #[serde(with = "crate::json::float")]
    pub p: f64,
    pub k: u32,
    pub kernel: String,
}

/// Sampled curve `y_j -> N(y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleProfile {
    scales: Vec<f64>,
    norms: Vec<f64>,
    pub meta: ProfileMeta,
}

impl ScaleProfile {
    pub fn new(scales: Vec<f64>, norms: Vec<f64>, meta: ProfileMeta) -> Result<Self> {
        if scales.len() != norms.len() {
            return Err(Error::InvalidParameter(format!(
                "{} scales but {} norms",
                scales.len(),
                norms.len()
            )));
        }
        if scales.is_empty() {
            return Err(Error::InvalidParameter("empty profile".into()));
        }
        if scales.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
            return Err(Error::InvalidParameter("scales must be positive".into()));
        }
        if norms.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if norms.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidParameter("norms must be nonnegative".into()));
        }
        Ok(Self { scales, norms, meta })
    }

    /// Samples `f` on the grid.
    pub fn from_fn<F>(grid: &ScaleGrid, meta: ProfileMeta, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let scales = grid.scales();
        let norms = scales.par_iter().map(|&y| f(y)).collect();
        Self::new(scales, norms, meta)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// `(y, N)` pairs sorted by increasing `y`.
    fn ascending(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = self
            .scales
            .iter()
            .copied()
            .zip(self.norms.iter().copied())
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }

    pub fn map_norms<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self> {
        let norms = self
            .scales
            .iter()
            .zip(&self.norms)
            .map(|(&y, &n)| f(y, n))
            .collect();
        Self::new(self.scales.clone(), norms, self.meta.clone())
    }
}

/// `N(y_j) = ||(T * K_{y_j})||_{W^{k,p}}` over the grid; scales are evaluated in parallel.
pub fn sweep<M>(t: &SpectralFunction, kernel: &M, grid: &ScaleGrid, k: u32, p: f64, kernel_id: &str) -> Result<ScaleProfile>
where
    M: SpectralMultiplier + Sync + ?Sized,
{
    let y_min = min_scale(kernel, t.torus());
    if grid.y_min() < y_min {
        return Err(Error::ScaleOutOfRange {
            y: grid.y_min(),
            y_min,
        });
    }
    let scales = grid.scales();
    let norms = scales
        .par_iter()
        .map(|&y| t.convolve_scaled(kernel, y)?.sobolev_norm(k, p))
        .collect::<Result<Vec<f64>>>()?;
    ScaleProfile::new(
        scales,
        norms,
        ProfileMeta {
            p,
            k,
            kernel: kernel_id.to_string(),
        },
    )
}

/// `int (y^{-s} N(y))^q dy/y` over the sampled range, or `max_j y_j^{-s} N_j`
/// when `q = inf`.
///
/// Between neighbouring scales the integrand is interpolated as a power of `y`,
/// so pure power laws are integrated exactly; intervals touching a zero norm
/// fall back to the trapezoid rule in `log y`.
pub fn q_integral(profile: &ScaleProfile, s: f64, q: f64) -> f64 {
    let pts = profile.ascending();
    let log_weighted = |&(y, n): &(f64, f64)| {
        if n == 0.0 {
            f64::NEG_INFINITY
        } else {
            n.ln() - s * y.ln()
        }
    };
    if q.is_infinite() {
        return pts.iter().map(|pt| log_weighted(pt).exp()).fold(0.0, f64::max);
    }
    let logs: Vec<f64> = pts.iter().map(|pt| q * log_weighted(pt)).collect();
    pts.windows(2)
        .zip(logs.windows(2))
        .map(|(yw, lw)| {
            let h = yw[1].0.ln() - yw[0].0.ln();
            let (l0, l1) = (lw[0], lw[1]);
            if !(l0.is_finite() && l1.is_finite()) {
                return 0.5 * h * (l0.exp() + l1.exp());
            }
            let d = l1 - l0;
            if d.abs() < 1e-9 {
                h * (0.5 * (l0 + l1)).exp()
            } else {
                h * (l1.exp() - l0.exp()) / d
            }
        })
        .sum()
}

/// Tuning of the tail-window regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Largest admissible absolute residual, in natural-log units.
    pub residual_tol: f64,
    /// Shortest window as a fraction of the usable points.
    pub min_window_fraction: f64,
    /// A run of smallest-scale norms at or below this fraction of the profile
    /// maximum is treated as vanishing (roundoff of an exact zero).
    pub zero_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            residual_tol: 0.05,
            min_window_fraction: 0.5,
            zero_floor: 1e-13,
        }
    }
}

/// Power-law fit `N(y) ~ C y^slope` over the small-scale tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// `f64::INFINITY` when the profile vanishes at small scales.
    #[serde(with = "crate::json::float")]
    pub slope: f64,
    pub stderr: f64,
    #[serde(with = "crate::json::float")]
    pub intercept: f64,
    /// `(y_lo, y_hi)` of the regression window.
    pub window: (f64, f64),
    pub points: usize,
    pub max_residual: f64,
    /// Whether the chosen window met the residual tolerance.
    pub within_tolerance: bool,
}

impl ExponentFit {
    fn vanishing(window: (f64, f64), points: usize) -> Self {
        Self {
            slope: f64::INFINITY,
            stderr: 0.0,
            intercept: f64::NEG_INFINITY,
            window,
            points,
            max_residual: 0.0,
            within_tolerance: true,
        }
    }

    pub fn is_vanishing(&self) -> bool {
        self.slope == f64::INFINITY
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    stderr: f64,
    max_residual: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - intercept - slope * x)
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = if xs.len() > 2 && sxx > 0.0 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let max_residual = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    LineFit {
        slope,
        intercept,
        stderr,
        max_residual,
    }
}

/// Length of the vanishing small-scale run, and the remaining nonzero points.
fn usable_points(pts: &[(f64, f64)], max: f64, opts: &FitOptions) -> (usize, Vec<(f64, f64)>) {
    let floor = opts.zero_floor * max;
    let leading = pts.iter().take_while(|p| p.1 <= floor).count();
    let usable = pts[leading..].iter().copied().filter(|p| p.1 > 0.0).collect();
    (leading, usable)
}

/// Log-log slope over the small-scale tail with default options.
pub fn critical_exponent(profile: &ScaleProfile) -> Result<ExponentFit> {
    critical_exponent_with(profile, &FitOptions::default())
}

/// Log-log slope over the longest run of smallest scales whose residuals stay
/// within `residual_tol`; when no such run reaches the minimum length the
/// whole usable range is fitted and `within_tolerance` is false.
pub fn critical_exponent_with(profile: &ScaleProfile, opts: &FitOptions) -> Result<ExponentFit> {
    let pts = profile.ascending();
    let total = pts.len();
    let whole = (pts[0].0, pts[total - 1].0);
    let max = pts.iter().fold(0.0_f64, |m, p| m.max(p.1));
    if max == 0.0 {
        return Ok(ExponentFit::vanishing(whole, total));
    }
    let (leading_zeros, usable) = usable_points(&pts, max, opts);
    if leading_zeros >= 4.min(total) {
        return Ok(ExponentFit::vanishing(
            (pts[0].0, pts[leading_zeros - 1].0),
            leading_zeros,
        ));
    }
    if 2 * usable.len() < total || usable.len() < 3 {
        return Err(Error::DegenerateProfile(format!(
            "{} of {} norms underflow",
            total - usable.len(),
            total
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1.ln()).collect();
    let n = usable.len();
    let w_min = ((n as f64 * opts.min_window_fraction).ceil() as usize).clamp(3, n);
    let mut chosen = None;
    for w in (w_min..=n).rev() {
        let fit = least_squares(&xs[..w], &ys[..w]);
        if fit.max_residual < opts.residual_tol {
            chosen = Some((w, fit, true));
            break;
        }
    }
    let (w, fit, ok) = chosen.unwrap_or_else(|| (n, least_squares(&xs, &ys), false));
    Ok(ExponentFit {
        slope: fit.slope,
        stderr: fit.stderr,
        intercept: fit.intercept,
        window: (usable[0].0, usable[w - 1].0),
        points: w,
        max_residual: fit.max_residual,
        within_tolerance: ok,
    })
}

/// Slopes of consecutive segments (ordered from small to large scales);
/// a power law gives equal slopes, super-polynomial behaviour a drift.
pub fn segment_slopes(profile: &ScaleProfile, segments: usize, opts: &FitOptions) -> Vec<f64> {
    let pts = profile.ascending();
    let max = pts.iter().fold(0.0_f64, |m, p| m.max(p.1));
    let (_, usable) = usable_points(&pts, max, opts);
    let seg = usable.len() / segments.max(1);
    if seg < 3 {
        return Vec::new();
    }
    usable
        .chunks(seg)
        .filter(|c| c.len() >= 3)
        .map(|c| {
            let xs: Vec<f64> = c.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = c.iter().map(|p| p.1.ln()).collect();
            least_squares(&xs, &ys).slope
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    Convergent,
    Divergent,
    Borderline,
}

/// Decision margin `max(stderr_factor * stderr, margin_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictOptions {
    pub stderr_factor: f64,
    pub margin_floor: f64,
    pub fit: FitOptions,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        Self {
            stderr_factor: 3.0,
            margin_floor: 0.02,
            fit: FitOptions::default(),
        }
    }
}

impl VerdictOptions {
    pub fn margin(&self, fit: &ExponentFit) -> f64 {
        (self.stderr_factor * fit.stderr).max(self.margin_floor)
    }
}

/// Whether `int_0 (y^{-s} N(y))^q dy/y` (or the `q = inf` sup) is finite,
/// judged from a fitted exponent.
pub fn verdict_from_fit(fit: &ExponentFit, s: f64, q: f64, opts: &VerdictOptions) -> Convergence {
    if fit.is_vanishing() {
        return Convergence::Convergent;
    }
    let m = opts.margin(fit);
    let a = fit.slope;
    if q.is_infinite() {
        if a >= s - m {
            Convergence::Convergent
        } else {
            Convergence::Divergent
        }
    } else if a > s + m {
        Convergence::Convergent
    } else if a < s - m {
        Convergence::Divergent
    } else {
        Convergence::Borderline
    }
}

pub fn convergence_verdict(profile: &ScaleProfile, s: f64, q: f64) -> Result<Convergence> {
    convergence_verdict_with(profile, s, q, &VerdictOptions::default())
}

pub fn convergence_verdict_with(
    profile: &ScaleProfile,
    s: f64,
    q: f64,
    opts: &VerdictOptions,
) -> Result<Convergence> {
    let fit = critical_exponent_with(profile, &opts.fit)?;
    Ok(verdict_from_fit(&fit, s, q, opts))
}
