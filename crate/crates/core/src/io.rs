//! Input loading, spectrum files, profile tables and log-log plots.
//!
//! Accepted inputs:
//! * CSV with one column of samples, or two columns `x,value` (an optional
//!   header row is skipped); the sample count must be a power of two;
//! * JSON spectra `{"L": 1.0, "coeffs": [[re, im], ...]}` in FFT order;
//! * pseudo-paths `builtin:<name>` resolved by [`crate::corpus::builtin`].
//!
//! Nets are described by tagged JSON objects ([`NetFile`]).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::embed;
use crate::corpus;
use crate::error::{Error, Result};
use crate::kernels::build_mollifier;
use crate::nets::{perturbed, NetSpec, SpikeNet, SpikeVariant};
use crate::scale::{ExponentFit, ScaleProfile};
use crate::spectral::{SpectralFunction, Tag, Torus};

#[derive(Debug, Serialize, Deserialize)]
struct SpectrumFile {
    #[serde(rename = "L")]
    period: f64,
    coeffs: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<Tag>,
}

fn format_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        location: location.into(),
        message: message.into(),
    }
}

/// Loads a CSV file, JSON spectrum or `builtin:` pseudo-path. Built-ins are
/// generated on `builtin_torus`.
pub fn load_input(path: &str, builtin_torus: Torus) -> Result<SpectralFunction> {
    if let Some(name) = path.strip_prefix("builtin:") {
        return corpus::builtin(name, builtin_torus);
    }
    let text = fs::read_to_string(path)?;
    let is_json = Path::new(path)
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        spectrum_from_json(&text, path)
    } else {
        samples_from_csv(&text, path)
    }
}

/// Parses sample rows; `source` names the input in error locations.
pub fn samples_from_csv(text: &str, source: &str) -> Result<SpectralFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut xs = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(index as u64 + 1, |p| p.line());
            format_err(format!("{source}:{line}"), e.to_string())
        })?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, usize>> = record
            .iter()
            .enumerate()
            .map(|(col, f)| f.parse::<f64>().map_err(|_| col + 1))
            .collect();
        if index == 0 && parsed.iter().any(|r| r.is_err()) {
            // Header row.
            continue;
        }
        if !(1..=2).contains(&record.len()) {
            return Err(format_err(
                format!("{source}:{line}"),
                format!("expected 1 or 2 columns, found {}", record.len()),
            ));
        }
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(format_err(
                format!("{source}:{line}"),
                "inconsistent column count",
            ));
        }
        let mut row = Vec::with_capacity(2);
        for r in parsed {
            match r {
                Ok(v) if v.is_finite() => row.push(v),
                Ok(_) => {
                    return Err(format_err(format!("{source}:{line}:{}", row.len() + 1), "non-finite value"))
                }
                Err(col) => {
                    return Err(format_err(
                        format!("{source}:{line}:{col}"),
                        format!("cannot parse {:?} as a number", &record[col - 1]),
                    ))
                }
            }
        }
        if row.len() == 2 {
            xs.push(row[0]);
        }
        values.push(*row.last().expect("nonempty row"));
    }
    let n = values.len();
    if n == 0 {
        return Err(format_err(source, "no samples"));
    }
    if !n.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(n));
    }
    let period = if xs.len() >= 2 {
        let h = xs[1] - xs[0];
        let uniform = xs
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h.abs());
        if h.is_nan() || h <= 0.0 || !uniform {
            return Err(format_err(source, "x column must be increasing and uniformly spaced"));
        }
        h * n as f64
    } else {
        1.0
    };
    SpectralFunction::from_samples(Torus::new(period, n)?, &values, Tag::Function)
}

pub fn spectrum_from_json(text: &str, source: &str) -> Result<SpectralFunction> {
    let file: SpectrumFile = serde_json::from_str(text).map_err(|e| {
        format_err(format!("{source}:{}:{}", e.line(), e.column()), e.to_string())
    })?;
    let torus = Torus::new(file.period, file.coeffs.len())?;
    let coeffs = file
        .coeffs
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    SpectralFunction::from_coeffs(torus, coeffs, file.tag.unwrap_or(Tag::Function))
}

/// JSON spectrum with every coefficient printed to round-trip exactly.
pub fn spectrum_to_json(f: &SpectralFunction) -> String {
    let file = SpectrumFile {
        period: f.torus().period(),
        coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        tag: Some(f.tag()),
    };
    serde_json::to_string(&file).expect("finite spectrum serializes")
}

pub fn save_spectrum(f: &SpectralFunction, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, spectrum_to_json(f))?;
    Ok(())
}

/// `y,norm` table.
pub fn profile_to_csv(profile: &ScaleProfile) -> String {
    let mut out = String::from("y,norm\n");
    for (y, n) in profile.scales().iter().zip(profile.norms()) {
        let _ = writeln!(out, "{y:e},{n:e}");
    }
    out
}

/// Log-log plot of a profile with the fitted line and its window shaded.
pub fn profile_svg(profile: &ScaleProfile, fit: Option<&ExponentFit>, title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 56.0;
    let pts: Vec<(f64, f64)> = profile
        .scales()
        .iter()
        .zip(profile.norms())
        .filter(|(_, n)| **n > 0.0)
        .map(|(y, n)| (y.log10(), n.log10()))
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        svg.push_str("<text x=\"50%\" y=\"50%\" text-anchor=\"middle\" font-family=\"sans-serif\">profile vanishes</text>\n</svg>\n");
        return svg;
    }
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    if let Some(fit) = fit.filter(|f| !f.is_vanishing()) {
        let (a, b) = (fit.window.0.log10(), fit.window.1.log10());
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{M}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#dde8f6\"/>",
            sx(a),
            (sx(b) - sx(a)).max(1.0),
            H - 2.0 * M
        );
        // ln N = c + slope ln y  <=>  log10 N = c / ln 10 + slope log10 y.
        let line = |x: f64| fit.intercept / std::f64::consts::LN_10 + fit.slope * x;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>",
            sx(a),
            sy(line(a)),
            sx(b),
            sy(line(b))
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#c0392b\">slope {:.4} +- {:.4}</text>",
            M + 8.0,
            M + 16.0,
            fit.slope,
            fit.stderr
        );
    }
    let _ = writeln!(
        svg,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    for &(x, y) in &pts {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"#1f4e79\"/>",
            sx(x),
            sy(y)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 y  [{x0:.2}, {x1:.2}]</text>",
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log10 N  [{y0:.2}, {y1:.2}]</text>",
        H / 2.0,
        H / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A net described in JSON, see [`net_from_json`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NetFile {
    /// Constants `c eps^exponent`.
    Power { c: f64, exponent: f64 },
    /// Constants `c exp(rate eps^{-power})`.
    Exponential { c: f64, rate: f64, power: f64 },
    /// Constants read off a table, interpolated linearly in `log eps` and clamped at the ends.
    Table { eps: Vec<f64>, values: Vec<f64> },
    /// Spike net; `squared` takes the pointwise square.
    Spike {
        variant: String,
        q: f64,
        #[serde(default)]
        squared: bool,
    },
    /// `T * phi_eps` for the mollifier of band `sigma`; `T` defaults to the target.
    Embed {
        #[serde(default)]
        input: Option<String>,
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// `base + weight(eps) g`, with `weight` a net of constants and `g` an input path.
    Perturbed {
        base: Box<NetFile>,
        weight: Box<NetFile>,
        g: String,
    },
}

/// Context a [`NetFile`] is resolved in.
pub struct NetContext<'a> {
    pub torus: Torus,
    pub target: Option<&'a SpectralFunction>,
    pub sigma: f64,
}

fn table_net(eps: &[f64], values: &[f64]) -> Result<NetSpec> {
    if eps.len() != values.len() || eps.len() < 2 {
        return Err(Error::InvalidParameter("table needs matching eps and values, at least two rows".into()));
    }
    if eps.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("table eps must be positive and increasing, values finite".into()));
    }
    let logs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let values = values.to_vec();
    Ok(NetSpec::constant("table", move |e: f64| {
        let t = e.ln();
        let i = logs.partition_point(|l| *l < t);
        if i == 0 {
            values[0]
        } else if i == logs.len() {
            values[logs.len() - 1]
        } else {
            let w = (t - logs[i - 1]) / (logs[i] - logs[i - 1]);
            values[i - 1] + w * (values[i] - values[i - 1])
        }
    }))
}

impl NetFile {
    pub fn resolve(&self, ctx: &NetContext<'_>) -> Result<NetSpec> {
        Ok(match self {
            NetFile::Power { c, exponent } => {
                let (c, a) = (*c, *exponent);
                NetSpec::constant(format!("{c}*eps^{a}"), move |e: f64| c * e.powf(a))
            }
            NetFile::Exponential { c, rate, power } => {
                let (c, r, a) = (*c, *rate, *power);
                NetSpec::constant(format!("{c}*exp({r}*eps^-{a})"), move |e: f64| c * (r * e.powf(-a)).exp())
            }
            NetFile::Table { eps, values } => table_net(eps, values)?,
            NetFile::Spike { variant, q, squared } => {
                let net = SpikeNet::new(SpikeVariant::parse(variant)?, *q)?;
                NetSpec::spike(if *squared { net.squared() } else { net })
            }
            NetFile::Embed { input, sigma } => {
                let t = match (input, ctx.target) {
                    (Some(path), _) => load_input(path, ctx.torus)?,
                    (None, Some(t)) => t.clone(),
                    (None, None) => {
                        return Err(Error::InvalidParameter("embed net needs an input or a target".into()))
                    }
                };
                embed(&t, &build_mollifier(sigma.unwrap_or(ctx.sigma))?)?
            }
            NetFile::Perturbed { base, weight, g } => {
                let base = base.resolve(ctx)?;
                let weight = weight.resolve(ctx)?;
                let torus = match &base.kind() {
                    crate::nets::NetKind::Function(f) => *f(1.0)?.torus(),
                    _ => ctx.torus,
                };
                let g = load_input(g, torus)?;
                let label = format!("{}*g", weight.label());
                perturbed(&base, g, move |e| weight.value(e).unwrap_or(f64::NAN), &label)?
            }
        })
    }
}

pub fn net_from_json(text: &str, source: &str) -> Result<NetFile> {
    serde_json::from_str(text).map_err(|e| {
        // Errors raised after the tag is read carry no position.
        let location = if e.line() == 0 {
            source.to_string()
        } else {
            format!("{source}:{}:{}", e.line(), e.column())
        };
        format_err(location, e.to_string())
    })
}

pub fn load_net(path: &str) -> Result<NetFile> {
    net_from_json(&fs::read_to_string(path)?, path)
}
