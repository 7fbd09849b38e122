//! Periodic functions and distributions carried by their discrete spectrum.
//!
//! A [`SpectralFunction`] on a [`Torus`] of period `L` with `N` grid points
//! stores the coefficients `c_m` of
//!
//! ```text
//! f(x) = sum_{|m| <= N/2} c_m exp(i xi_m x),    xi_m = 2 pi m / L
//! ```
//!
//! in FFT order: slot `j < N/2` holds `m = j`, slot `j > N/2` holds
//! `m = j - N`, and slot `N/2` holds the coefficient shared by `m = +N/2`
//! and `m = -N/2`. With that convention the Dirac comb has every slot equal
//! to `1/L`, and sampling followed by analysis is the identity.
//!
//! Convolution with a kernel is pointwise multiplication of the spectrum by
//! the kernel's closed-form symbol, so it carries no quadrature error.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// One-dimensional periodic domain sampled on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Torus {
    period: f64,
    size: usize,
}

impl Torus {
    pub const MIN_SIZE: usize = 8;

    pub fn new(period: f64, size: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "torus period must be positive, got {period}"
            )));
        }
        if !size.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(size));
        }
        if size < Self::MIN_SIZE {
            return Err(Error::InvalidParameter(format!(
                "grid size must be at least {}, got {size}",
                Self::MIN_SIZE
            )));
        }
        Ok(Self { period, size })
    }

    /// Unit period, `N = 2^exp` points.
    pub fn unit(exp: u32) -> Self {
        Self::new(1.0, 1usize << exp).expect("valid unit torus")
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.size as f64
    }

    /// Largest representable angular frequency, `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.size as f64 / self.period
    }

    /// Signed mode number stored in FFT slot `slot`. The Nyquist slot reports `+N/2`.
    pub fn mode(&self, slot: usize) -> i64 {
        let n = self.size as i64;
        let j = slot as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn frequency(&self, slot: usize) -> f64 {
        2.0 * PI * self.mode(slot) as f64 / self.period
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.size).map(|j| j as f64 * h).collect()
    }

    fn nyquist_slot(&self) -> usize {
        self.size / 2
    }
}

/// Whether the object is a smooth function or a (possibly singular) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Function,
    Distribution,
}

/// Anything that acts on a spectrum as a real multiplier with compact support.
pub trait SpectralMultiplier {
    /// Value of the symbol at angular frequency `xi`.
    fn symbol(&self, xi: f64) -> f64;
    /// Radius outside of which the symbol vanishes identically.
    fn support_radius(&self) -> f64;
}

/// Smallest dilation `y` at which `multiplier(y xi)` still vanishes at Nyquist.
pub fn min_scale<M: SpectralMultiplier + ?Sized>(multiplier: &M, torus: &Torus) -> f64 {
    multiplier.support_radius() / torus.nyquist()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    torus: Torus,
    coeffs: Vec<Complex64>,
    tag: Tag,
}

/// `p` in `[1, inf]`; `f64::INFINITY` selects the sup norm.
pub fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must lie in [1, inf], got {p}"
        )));
    }
    Ok(())
}

/// Rectangle-rule `L^p` norm of grid samples with spacing `h`.
pub fn lp_norm_of_samples(samples: &[f64], h: f64, p: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        h * samples.iter().map(|v| v.abs()).sum::<f64>()
    } else if p == 2.0 {
        (h * samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    } else {
        (h * samples.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

impl SpectralFunction {
    pub fn from_coeffs(torus: Torus, coeffs: Vec<Complex64>, tag: Tag) -> Result<Self> {
        if coeffs.len() != torus.size() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                torus.size(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(Self { torus, coeffs, tag })
    }

    pub fn zero(torus: Torus) -> Self {
        Self {
            torus,
            coeffs: vec![Complex64::new(0.0, 0.0); torus.size()],
            tag: Tag::Function,
        }
    }

    pub fn constant(torus: Torus, value: f64) -> Self {
        let mut f = Self::zero(torus);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Dirac mass at `x0`: every coefficient `exp(-i xi x0) / L`.
    pub fn dirac_at(torus: Torus, x0: f64) -> Self {
        let inv_l = 1.0 / torus.period();
        let ny = torus.nyquist_slot();
        let coeffs = (0..torus.size())
            .map(|j| {
                if j == ny {
                    // Shared slot: average of the +N/2 and -N/2 phases.
                    Complex64::new(inv_l * (torus.frequency(j) * x0).cos(), 0.0)
                } else {
                    Complex64::from_polar(inv_l, -torus.frequency(j) * x0)
                }
            })
            .collect();
        Self {
            torus,
            coeffs,
            tag: Tag::Distribution,
        }
    }

    pub fn dirac(torus: Torus) -> Self {
        Self::dirac_at(torus, 0.0)
    }

    /// Forward transform of real grid samples.
    pub fn from_samples(torus: Torus, samples: &[f64], tag: Tag) -> Result<Self> {
        if samples.len() != torus.size() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                torus.size(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = torus.size();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        plan(n, false).process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf[torus.nyquist_slot()] *= 0.5;
        Ok(Self {
            torus,
            coeffs: buf,
            tag,
        })
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn with_tag(mut self, tag: Tag) -> Self {
        self.tag = tag;
        self
    }

    /// Complex samples on the grid (inverse transform).
    pub fn synthesize_complex(&self) -> Vec<Complex64> {
        let n = self.torus.size();
        let mut buf = self.coeffs.clone();
        buf[self.torus.nyquist_slot()] *= 2.0;
        plan(n, true).process(&mut buf);
        buf
    }

    /// Real part of the grid samples.
    pub fn synthesize(&self) -> Vec<f64> {
        self.synthesize_complex().into_iter().map(|c| c.re).collect()
    }

    /// Applies a frequency-domain multiplier. The shared Nyquist slot receives
    /// the average of the multiplier at `+xi_N` and `-xi_N`.
    pub fn map_spectrum<F>(&self, multiplier: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let ny = self.torus.nyquist_slot();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let xi = self.torus.frequency(j);
                if j == ny {
                    c * 0.5 * (multiplier(xi) + multiplier(-xi))
                } else {
                    c * multiplier(xi)
                }
            })
            .collect();
        Self {
            torus: self.torus,
            coeffs,
            tag: self.tag,
        }
    }

    /// Spectral derivative of the given order, `(i xi)^order`.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        self.map_spectrum(|xi| Complex64::new(0.0, xi).powu(order))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            torus: self.torus,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            tag: self.tag,
        }
    }

    fn check_same_torus(&self, other: &Self) -> Result<()> {
        if self.torus != other.torus {
            return Err(Error::InvalidParameter(
                "operands live on different tori".into(),
            ));
        }
        Ok(())
    }

    fn combined_tag(&self, other: &Self) -> Tag {
        if self.tag == Tag::Distribution || other.tag == Tag::Distribution {
            Tag::Distribution
        } else {
            Tag::Function
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_torus(other)?;
        Ok(Self {
            torus: self.torus,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            tag: self.combined_tag(other),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Reindexes `x -> factor * x` (integer factor keeps the period).
    /// Modes pushed past Nyquist are dropped.
    pub fn dilate(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        let n = self.torus.size() as i64;
        let mut out = Self::zero(self.torus);
        out.tag = self.tag;
        for (j, &c) in self.coeffs.iter().enumerate() {
            let m = self.torus.mode(j) * factor as i64;
            if m.abs() < n / 2 {
                out.coeffs[m.rem_euclid(n) as usize] += c;
            }
        }
        Ok(out)
    }

    /// Drops every mode with `|m| > max_mode`.
    pub fn truncate(&self, max_mode: usize) -> Self {
        let mut out = self.clone();
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            if self.torus.mode(j).unsigned_abs() as usize > max_mode {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Highest `|m|` whose coefficient exceeds `rel_tol` times the largest coefficient.
    pub fn bandwidth(&self, rel_tol: f64) -> usize {
        let max = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if max == 0.0 {
            return 0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > rel_tol * max)
            .map(|(j, _)| self.torus.mode(j).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    fn check_aliasing(&self, p: f64) -> Result<()> {
        if self.tag == Tag::Distribution && p.is_finite() {
            let quarter = self.torus.size() / 4;
            if self.bandwidth(1e-12) > quarter {
                return Err(Error::AliasingRisk(format!(
                    "distribution with spectrum reaching mode {} has no finite L^{p} norm on this grid",
                    self.bandwidth(1e-12)
                )));
            }
        }
        Ok(())
    }

    /// `L^p` norm over one period by the rectangle rule; exact grid sup for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        self.check_aliasing(p)?;
        Ok(lp_norm_of_samples(
            &self.synthesize(),
            self.torus.spacing(),
            p,
        ))
    }

    /// `max_{j <= k} ||f^{(j)}||_p`.
    pub fn sobolev_norm(&self, k: u32, p: f64) -> Result<f64> {
        check_exponent(p)?;
        self.check_aliasing(p)?;
        let h = self.torus.spacing();
        let mut best = 0.0_f64;
        for order in 0..=k {
            let v = lp_norm_of_samples(&self.derivative(order).synthesize(), h, p);
            best = best.max(v);
        }
        Ok(best)
    }

    /// `T * K_y`, with `K_y` the dilate whose symbol is `K(y xi)`.
    pub fn convolve_scaled<M: SpectralMultiplier + ?Sized>(&self, kernel: &M, y: f64) -> Result<Self> {
        let y_min = min_scale(kernel, &self.torus);
        if !(y.is_finite() && y > 0.0) || y < y_min {
            return Err(Error::ScaleOutOfRange { y, y_min });
        }
        let mut out = self.map_spectrum(|xi| Complex64::new(kernel.symbol(y * xi), 0.0));
        out.tag = Tag::Function;
        Ok(out)
    }

    /// The distributional pairing `<f, g> = int f g dx`, real part.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        self.check_same_torus(other)?;
        let n = self.torus.size();
        let ny = self.torus.nyquist_slot();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let partner = (n - j) % n;
            let w = if j == ny { 2.0 } else { 1.0 };
            acc += self.coeffs[j] * other.coeffs[partner] * w;
        }
        Ok(acc.re * self.torus.period())
    }

    /// `L sum_j |c_j| |d_{-j}|`, which bounds `|<f, g>|` and sets the scale of
    /// its rounding error.
    pub fn pairing_magnitude(&self, other: &Self) -> Result<f64> {
        self.check_same_torus(other)?;
        let n = self.torus.size();
        let ny = self.torus.nyquist_slot();
        let sum: f64 = (0..n)
            .map(|j| {
                let w = if j == ny { 2.0 } else { 1.0 };
                w * self.coeffs[j].norm() * other.coeffs[(n - j) % n].norm()
            })
            .sum();
        Ok(sum * self.torus.period())
    }

    /// Pointwise product, exact when the combined bandwidth stays below Nyquist.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_torus(other)?;
        let a = self.bandwidth(1e-15);
        let b = other.bandwidth(1e-15);
        if a + b >= self.torus.size() / 2 {
            return Err(Error::AliasingRisk(format!(
                "product bandwidth {a} + {b} reaches Nyquist {}",
                self.torus.size() / 2
            )));
        }
        Ok(self.multiply_circular(other))
    }

    fn multiply_circular(&self, other: &Self) -> Self {
        let fa = self.synthesize_complex();
        let fb = other.synthesize_complex();
        let n = self.torus.size();
        let mut buf: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        plan(n, false).process(&mut buf);
        let scale = 1.0 / n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf[self.torus.nyquist_slot()] *= 0.5;
        Self {
            torus: self.torus,
            coeffs: buf,
            tag: self.combined_tag(other),
        }
    }

    /// `L * sum |c_m|^2`, counting the shared Nyquist slot twice.
    pub fn parseval_energy(&self) -> f64 {
        let ny = self.torus.nyquist_slot();
        self.torus.period()
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| if j == ny { 2.0 * c.norm_sqr() } else { c.norm_sqr() })
                .sum::<f64>()
    }
}
