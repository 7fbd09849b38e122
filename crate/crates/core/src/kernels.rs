//! Band-limited mollifiers and Littlewood-Paley pairs.
//!
//! Every kernel is defined by a closed-form even symbol built from the
//! smooth step `S(t) = g(t) / (g(t) + g(1 - t))`, `g(t) = exp(-1/t)`.
//! A flat-top symbol equal to one near the origin gives a unit-mass kernel
//! whose higher moments all vanish; an annular symbol that vanishes near the
//! origin gives a kernel with all moments vanishing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralFunction, SpectralMultiplier, Tag, Torus};

/// The `C^inf` transition from 0 (at `t <= 0`) to 1 (at `t >= 1`).
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Mollifier,
    Lp,
}

/// Guaranteed order of vanishing moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentOrder {
    Finite(u32),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
enum Profile {
    /// One on `|xi| <= plateau`, zero on `|xi| >= support`.
    FlatTop { plateau: f64, support: f64 },
    /// Zero on `|xi| <= inner_zero`, one on `[inner_full, outer_full]`, zero past `support`.
    Annulus {
        inner_zero: f64,
        inner_full: f64,
        outer_full: f64,
        support: f64,
    },
}

fn flat_top(xi: f64, plateau: f64, support: f64) -> f64 {
    smooth_step((support - xi.abs()) / (support - plateau))
}

impl Profile {
    fn eval(&self, xi: f64) -> f64 {
        match *self {
            Profile::FlatTop { plateau, support } => flat_top(xi, plateau, support),
            Profile::Annulus {
                inner_zero,
                inner_full,
                outer_full,
                support,
            } => flat_top(xi, outer_full, support) - flat_top(xi, inner_zero, inner_full),
        }
    }

    fn support(&self) -> f64 {
        match *self {
            Profile::FlatTop { support, .. } | Profile::Annulus { support, .. } => support,
        }
    }

    /// Radius of the neighbourhood of the origin on which the symbol is constant.
    fn flat_radius(&self) -> f64 {
        match *self {
            Profile::FlatTop { plateau, .. } => plateau,
            Profile::Annulus { inner_zero, .. } => inner_zero,
        }
    }
}

/// A kernel given by its spectral profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    kind: KernelKind,
    profile: Profile,
    sigma: f64,
    eta: Option<f64>,
    moment_order: MomentOrder,
}

impl SpectralMultiplier for Kernel {
    fn symbol(&self, xi: f64) -> f64 {
        self.profile.eval(xi)
    }

    fn support_radius(&self) -> f64 {
        self.profile.support()
    }
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Flat-top mollifier: symbol one on `|xi| <= sigma/2`, supported in `|xi| <= sigma`.
pub fn build_mollifier(sigma: f64) -> Result<Kernel> {
    positive_finite("sigma", sigma)?;
    Ok(Kernel {
        kind: KernelKind::Mollifier,
        profile: Profile::FlatTop {
            plateau: 0.5 * sigma,
            support: sigma,
        },
        sigma,
        eta: None,
        moment_order: MomentOrder::Infinite,
    })
}

impl Kernel {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    pub fn moment_order(&self) -> MomentOrder {
        self.moment_order
    }

    /// Short identifier used in profile metadata.
    pub fn id(&self) -> String {
        match (self.kind, self.eta) {
            (KernelKind::Mollifier, _) => format!("mollifier(support={})", self.support_radius()),
            (KernelKind::Lp, Some(eta)) => format!("lp(sigma={}, eta={eta})", self.sigma),
            (KernelKind::Lp, None) => format!("lp(sigma={})", self.sigma),
        }
    }

    /// Radius of the neighbourhood of zero where the symbol is exactly constant.
    pub fn flat_radius(&self) -> f64 {
        self.profile.flat_radius()
    }

    /// Spectrum of the dilate `K_y` on `torus` (i.e. `delta * K_y`).
    pub fn on_torus(&self, torus: Torus, y: f64) -> Result<SpectralFunction> {
        SpectralFunction::dirac(torus).convolve_scaled(self, y)
    }

    /// `L^1` norm of the kernel on the line, by rectangle quadrature of a
    /// wide periodic synthesis.
    pub fn l1_norm(&self) -> f64 {
        let (xs, vals) = self.spatial_samples(14);
        let h = xs[1] - xs[0];
        h * vals.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Samples `(x, K(x))` on `[-P/2, P/2)` with period `P` sized so the
    /// kernel has decayed below `1e-14` of its peak at the window edge.
    pub fn spatial_samples(&self, log2_points: u32) -> (Vec<f64>, Vec<f64>) {
        let support = self.support_radius();
        // Decay of a Gevrey-2 spectral step of width w is about exp(-2 sqrt(w |x|)).
        let width = match self.profile {
            Profile::FlatTop { plateau, support } => support - plateau,
            Profile::Annulus {
                inner_zero,
                inner_full,
                ..
            } => inner_full - inner_zero,
        };
        let reach = (36.0_f64 * 36.0) / (4.0 * width);
        let mut period = 4.0 * reach.max(2.0 * PI / support);
        let mut points = 1usize << log2_points;
        // Keep the grid at least twice as fine as the band limit requires.
        while period / points as f64 > PI / (2.0 * support) {
            points *= 2;
        }
        period = period.max(1e-12);
        let torus = Torus::new(period, points).expect("power-of-two synthesis grid");
        let spec = self.on_torus(torus, 1.0).expect("unit dilation is admissible");
        let vals = spec.synthesize();
        let n = points;
        let h = period / n as f64;
        let mut xs = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let j = (i + n / 2) % n;
            xs.push((i as f64 - (n / 2) as f64) * h);
            out.push(vals[j]);
        }
        (xs, out)
    }
}

/// A Littlewood-Paley pair together with the `(sigma, eta)` of its band conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpPair {
    pub phi: Kernel,
    pub psi: Kernel,
    pub sigma: f64,
    pub eta: f64,
}

impl LpPair {
    /// Arbitrary pair, checked only by [`verify_lp_conditions`].
    pub fn new(phi: Kernel, psi: Kernel, sigma: f64, eta: f64) -> Self {
        Self { phi, psi, sigma, eta }
    }

    /// Largest spectral support among the two kernels.
    pub fn support_radius(&self) -> f64 {
        self.phi.support_radius().max(self.psi.support_radius())
    }
}

/// Canonical pair: `phi` is a flat-top mollifier with plateau `|xi| <= sigma`,
/// `psi` an annular symbol, zero on `|xi| <= eta sigma / 2`, one on
/// `[eta sigma, sigma]`, both supported in `|xi| <= 2 sigma`.
pub fn build_lp_pair(sigma: f64, eta: f64) -> Result<LpPair> {
    positive_finite("sigma", sigma)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    let phi = Kernel {
        kind: KernelKind::Mollifier,
        profile: Profile::FlatTop {
            plateau: sigma,
            support: 2.0 * sigma,
        },
        sigma: 2.0 * sigma,
        eta: None,
        moment_order: MomentOrder::Infinite,
    };
    let psi = Kernel {
        kind: KernelKind::Lp,
        profile: Profile::Annulus {
            inner_zero: 0.5 * eta * sigma,
            inner_full: eta * sigma,
            outer_full: sigma,
            support: 2.0 * sigma,
        },
        sigma,
        eta: Some(eta),
        moment_order: MomentOrder::Infinite,
    };
    Ok(LpPair { phi, psi, sigma, eta })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int x^alpha K(x) dx`, read off the symbol as `(i d/dxi)^alpha K^(0)`.
///
/// The derivative is a central difference whose stencil stays inside the
/// neighbourhood where the symbol is constant, so for the kernels built here
/// the result is exact. [`moment_by_quadrature`] is the spatial cross-check.
pub fn moment(kernel: &Kernel, alpha: u32) -> Result<f64> {
    if alpha > 16 {
        return Err(Error::InvalidParameter(format!(
            "moment order {alpha} exceeds the supported limit 16"
        )));
    }
    if alpha == 0 {
        return Ok(kernel.symbol(0.0));
    }
    let h = kernel.flat_radius() / (alpha as f64 + 1.0);
    let mut diff = 0.0;
    for j in 0..=alpha {
        let x = (0.5 * alpha as f64 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        diff += sign * binomial(alpha, j) * kernel.symbol(x);
    }
    let derivative = diff / h.powi(alpha as i32);
    // i^alpha times a real number; odd orders of an even symbol vanish.
    let value = Complex64::new(0.0, 1.0).powu(alpha) * derivative;
    Ok(value.re + value.im)
}

/// Spatial moment with the tail mass used to judge its accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub tail_mass: f64,
}

/// `int x^alpha K(x) dx` by rectangle quadrature of the synthesized kernel.
///
/// The window is sized so the kernel has decayed below `1e-14` of its peak;
/// the absolute integrand mass over the outer half of the window is reported
/// as `tail_mass` and must stay below `tolerance`.
pub fn moment_by_quadrature(kernel: &Kernel, alpha: u32, tolerance: f64) -> Result<MomentEstimate> {
    if alpha > 16 {
        return Err(Error::InvalidParameter(format!(
            "moment order {alpha} exceeds the supported limit 16"
        )));
    }
    let (xs, vals) = kernel.spatial_samples(14);
    let h = xs[1] - xs[0];
    let edge = xs.last().copied().unwrap_or(0.0).abs() * 0.5;
    let mut value = 0.0;
    let mut tail = 0.0;
    for (&x, &k) in xs.iter().zip(&vals) {
        let w = x.powi(alpha as i32) * k * h;
        value += w;
        if x.abs() > edge {
            tail += w.abs();
        }
    }
    if tail > tolerance {
        return Err(Error::QuadratureInaccurate { tail, tolerance });
    }
    Ok(MomentEstimate { value, tail_mass: tail })
}

/// Outcome of checking the band and moment conditions of an LP-pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpDiagnostics {
    pub order: f64,
    pub sigma: f64,
    pub eta: f64,
    pub phi_min_on_ball: f64,
    pub psi_min_on_annulus: f64,
    pub moments_checked: Vec<(u32, f64)>,
    pub failures: Vec<String>,
    pub pass: bool,
}

const POSITIVITY_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-8;
const BAND_SAMPLES: usize = 2048;

/// Checks `|phi^| > 0` on `|xi| <= sigma`, `|psi^| > 0` on
/// `eta sigma <= |xi| <= sigma`, and the vanishing of the moments of `psi`
/// up to `floor(s)` (none when `s < 0`).
pub fn verify_lp_conditions(pair: &LpPair, s: f64) -> LpDiagnostics {
    let mut failures = Vec::new();
    let sample = |lo: f64, hi: f64, k: &Kernel| -> f64 {
        (0..=BAND_SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / BAND_SAMPLES as f64)
            .map(|xi| k.symbol(xi).abs())
            .fold(f64::INFINITY, f64::min)
    };
    let phi_min = sample(0.0, pair.sigma, &pair.phi);
    let psi_min = sample(pair.eta * pair.sigma, pair.sigma, &pair.psi);
    if phi_min <= POSITIVITY_TOL {
        failures.push(format!("phi symbol vanishes on |xi| <= {}", pair.sigma));
    }
    if psi_min <= POSITIVITY_TOL {
        failures.push(format!(
            "psi symbol vanishes on {} <= |xi| <= {}",
            pair.eta * pair.sigma,
            pair.sigma
        ));
    }
    if !(pair.eta > 0.0 && pair.eta < 1.0) {
        failures.push(format!("eta = {} outside (0, 1)", pair.eta));
    }
    let mut moments_checked = Vec::new();
    if s >= 0.0 {
        let top = s.floor() as u32;
        for alpha in 0..=top.min(16) {
            match moment(&pair.psi, alpha) {
                Ok(m) => {
                    if m.abs() >= MOMENT_TOL {
                        failures.push(format!("moment {alpha} of psi is {m:e}"));
                    }
                    moments_checked.push((alpha, m));
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
        if top > 16 {
            failures.push(format!("moment order {top} beyond supported limit 16"));
        }
    }
    LpDiagnostics {
        order: s,
        sigma: pair.sigma,
        eta: pair.eta,
        phi_min_on_ball: phi_min,
        psi_min_on_annulus: psi_min,
        moments_checked,
        pass: failures.is_empty(),
        failures,
    }
}

/// Real spectral bump `cos^{2M}(pi (x - center)/L)`, with bandwidth `M` modes.
pub fn cosine_bump(torus: Torus, center: f64, order: u32) -> SpectralFunction {
    let n = torus.size();
    let l = torus.period();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let norm = 4.0_f64.powi(order as i32);
    for m in -(order as i64)..=(order as i64) {
        if m.unsigned_abs() as usize >= n / 2 {
            continue;
        }
        let c = binomial(2 * order, (order as i64 - m) as u32) / norm;
        let phase = -2.0 * PI * m as f64 * center / l;
        coeffs[m.rem_euclid(n as i64) as usize] = Complex64::from_polar(c, phase);
    }
    SpectralFunction::from_coeffs(torus, coeffs, Tag::Function).expect("finite bump spectrum")
}
