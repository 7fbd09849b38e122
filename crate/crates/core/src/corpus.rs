//! Test functions with known regularity, built directly from their Fourier series.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::cosine_bump;
use crate::spectral::{SpectralFunction, Tag, Torus};

/// Default analysis torus: unit period, `2^14` points.
pub fn default_torus() -> Torus {
    Torus::unit(14)
}

fn put_real_mode(coeffs: &mut [Complex64], m: usize, c: Complex64) {
    let n = coeffs.len();
    if m == n / 2 {
        // The Nyquist slot stores the value shared by `+-N/2`.
        coeffs[m] = Complex64::new(c.re, 0.0);
    } else if m < n / 2 {
        coeffs[m] = c;
        coeffs[(n - m) % n] = c.conj();
    }
}

/// Indicator of `[0, L/2)`, i.e. the periodized Heaviside step with jumps at `0` and `L/2`.
pub fn heaviside(torus: Torus) -> SpectralFunction {
    let n = torus.size();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[0] = Complex64::new(0.5, 0.0);
    for m in (1..n / 2).step_by(2) {
        put_real_mode(&mut coeffs, m, Complex64::new(0.0, -1.0 / (PI * m as f64)));
    }
    SpectralFunction::from_coeffs(torus, coeffs, Tag::Function).expect("finite spectrum")
}

/// `|sin(2 pi x / L)|`: Lipschitz, with kinks at `0` and `L/2`.
pub fn kink(torus: Torus) -> SpectralFunction {
    let n = torus.size();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[0] = Complex64::new(2.0 / PI, 0.0);
    let mut j = 1usize;
    while 2 * j <= n / 2 {
        let c = -2.0 / (PI * (4.0 * (j * j) as f64 - 1.0));
        put_real_mode(&mut coeffs, 2 * j, Complex64::new(c, 0.0));
        j += 1;
    }
    SpectralFunction::from_coeffs(torus, coeffs, Tag::Function).expect("finite spectrum")
}

/// `sum_n 2^{-alpha n} cos(2^n pi x / L)` over every term the grid resolves.
pub fn lacunary(torus: Torus, alpha: f64) -> Result<SpectralFunction> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lacunary exponent must be positive, got {alpha}"
        )));
    }
    let n = torus.size();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut k = 1u32;
    while (1usize << (k - 1)) <= n / 2 {
        let m = 1usize << (k - 1);
        let amp = 0.5 * 2.0_f64.powf(-alpha * k as f64);
        put_real_mode(&mut coeffs, m, Complex64::new(amp, 0.0));
        k += 1;
    }
    SpectralFunction::from_coeffs(torus, coeffs, Tag::Function)
}

/// Trigonometric polynomial `1/4 + cos(2 pi x) + sin(6 pi x)/2` (unit period units).
pub fn smooth_trig(torus: Torus) -> SpectralFunction {
    let n = torus.size();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[0] = Complex64::new(0.25, 0.0);
    put_real_mode(&mut coeffs, 1, Complex64::new(0.5, 0.0));
    put_real_mode(&mut coeffs, 3, Complex64::new(0.0, -0.25));
    SpectralFunction::from_coeffs(torus, coeffs, Tag::Function).expect("finite spectrum")
}

/// Band-limited bump `cos^{24}(pi (x - 0.3 L) / L)`.
pub fn smooth_bump(torus: Torus) -> SpectralFunction {
    cosine_bump(torus, 0.3 * torus.period(), 12)
}

/// Smooth function vanishing outside `|x - center| < half_width`, sampled on the grid:
/// `exp(1 - 1 / (1 - t^2))` with `t = (x - center) / half_width`.
pub fn compact_bump(torus: Torus, center: f64, half_width: f64) -> Result<SpectralFunction> {
    if !(half_width > 0.0 && half_width < 0.5 * torus.period()) {
        return Err(Error::InvalidParameter(format!(
            "bump half-width {half_width} must lie in (0, L/2)"
        )));
    }
    let l = torus.period();
    let samples: Vec<f64> = torus
        .grid()
        .into_iter()
        .map(|x| {
            let d = (x - center).rem_euclid(l);
            let d = if d > 0.5 * l { d - l } else { d };
            let t = d / half_width;
            if t.abs() >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - t * t)).exp()
            }
        })
        .collect();
    SpectralFunction::from_samples(torus, &samples, Tag::Function)
}

/// Known smoothness exponent of a corpus member as a function of `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    /// `r = offset + slope / p`.
    Affine { offset: f64, inverse_p: f64 },
    Smooth,
}

impl Exponent {
    pub fn at(&self, p: f64) -> f64 {
        match *self {
            Exponent::Affine { offset, inverse_p } => offset + inverse_p / p,
            Exponent::Smooth => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub name: String,
    pub function: SpectralFunction,
    pub exponent: Exponent,
}

impl CorpusMember {
    pub fn is_smooth(&self) -> bool {
        self.exponent == Exponent::Smooth
    }
}

/// Dirac, Heaviside, kink, three lacunary series and two band-limited smooth functions.
pub fn standard_corpus(torus: Torus) -> Vec<CorpusMember> {
    let affine = |offset, inverse_p| Exponent::Affine { offset, inverse_p };
    let mut out = vec![
        CorpusMember {
            name: "dirac".into(),
            function: SpectralFunction::dirac(torus),
            exponent: affine(-1.0, 1.0),
        },
        CorpusMember {
            name: "heaviside".into(),
            function: heaviside(torus),
            exponent: affine(0.0, 1.0),
        },
        CorpusMember {
            name: "kink".into(),
            function: kink(torus),
            exponent: affine(1.0, 1.0),
        },
    ];
    for alpha in [0.3, 0.5, 0.7] {
        out.push(CorpusMember {
            name: format!("lacunary:{alpha}"),
            function: lacunary(torus, alpha).expect("positive exponent"),
            exponent: affine(alpha, 0.0),
        });
    }
    out.push(CorpusMember {
        name: "smooth".into(),
        function: smooth_trig(torus),
        exponent: Exponent::Smooth,
    });
    out.push(CorpusMember {
        name: "bump".into(),
        function: smooth_bump(torus),
        exponent: Exponent::Smooth,
    });
    out
}

/// Resolves a built-in name such as `dirac` or `lacunary:0.5`.
pub fn builtin(name: &str, torus: Torus) -> Result<SpectralFunction> {
    let unknown = || Error::Format {
        location: format!("builtin:{name}"),
        message: "unknown built-in; expected dirac, heaviside, kink, lacunary:<alpha>, smooth, bump or zero".into(),
    };
    if let Some(alpha) = name.strip_prefix("lacunary:") {
        let alpha: f64 = alpha.parse().map_err(|_| Error::Format {
            location: format!("builtin:{name}"),
            message: format!("cannot parse exponent {alpha:?}"),
        })?;
        return lacunary(torus, alpha);
    }
    Ok(match name {
        "dirac" => SpectralFunction::dirac(torus),
        "heaviside" => heaviside(torus),
        "kink" => kink(torus),
        "smooth" => smooth_trig(torus),
        "bump" => smooth_bump(torus),
        "zero" => SpectralFunction::zero(torus),
        _ => return Err(unknown()),
    })
}
