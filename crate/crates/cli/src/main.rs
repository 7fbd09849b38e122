//! `besov`: regularity analysis, Besov norms, net classification and
//! association tests from the command line.
//!
//! Every subcommand prints a JSON report that embeds the resolved
//! configuration. Exit status is 0 for conclusive results, 2 for inconclusive
//! ones and 1 for errors, including invalid arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use besov_core::association::{association_verdict, bump_battery, AssociationOptions, AssociationVerdict};
use besov_core::besov::{analyze, besov_norm, default_grid, detect_at_order, DetectSettings};
use besov_core::corpus::{standard_corpus, Exponent};
use besov_core::io::{load_input, load_net, profile_svg, NetContext};
use besov_core::json::{encode, to_report_string};
use besov_core::kernels::{build_lp_pair, build_mollifier, moment, verify_lp_conditions, LpPair};
use besov_core::nets::{
    classify_moderate, classify_negligible, spike_integral, ClassifyOptions, NetKind, NetSpec,
    Negligibility, SpikeNet, SpikeVariant,
};
use besov_core::scale::{sweep, Convergence, ScaleGrid};
use besov_core::spectral::Torus;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "besov", version, about = "Besov and Hölder-Zygmund regularity toolkit")]
struct Cli {
    #[command(flatten)]
    grid: GridArgs,
    #[command(subcommand)]
    command: Command,
}

/// Grid and kernel settings shared by all subcommands.
#[derive(Args, Clone)]
struct GridArgs {
    /// Grid size N for built-in inputs (a power of two).
    #[arg(long = "n", global = true, env = "BESOV_N", default_value_t = 16384)]
    n: usize,
    /// Period L for built-in inputs.
    #[arg(long = "period", global = true, env = "BESOV_L", default_value_t = 1.0)]
    period: f64,
    /// Smallest scale of the sweep; defaults to the band limit of the kernels.
    #[arg(long, global = true, env = "BESOV_Y_MIN")]
    y_min: Option<f64>,
    /// Number of scales J.
    #[arg(long, global = true, env = "BESOV_SCALES", default_value_t = 48)]
    scales: usize,
    /// Band parameter sigma of the kernels.
    #[arg(long, global = true, env = "BESOV_SIGMA", default_value_t = 32.0)]
    sigma: f64,
    /// Annulus ratio eta of the LP pair.
    #[arg(long, global = true, env = "BESOV_ETA", default_value_t = 0.5)]
    eta: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the regularity exponent of an input.
    Analyze {
        /// CSV samples, JSON spectrum or `builtin:<name>`.
        #[arg(long, env = "BESOV_INPUT")]
        input: String,
        #[arg(long, env = "BESOV_P", default_value = "2", value_parser = parse_exponent)]
        p: f64,
        #[arg(long, env = "BESOV_Q", default_value = "inf", value_parser = parse_exponent)]
        q: f64,
        /// Derivative order, or `auto` to escalate.
        #[arg(long, env = "BESOV_K", default_value = "auto")]
        k: Order,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Log-log SVG of the profile behind the estimate.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Truncated Besov quantity of an input.
    Norm {
        #[arg(long, env = "BESOV_INPUT")]
        input: String,
        #[arg(long, env = "BESOV_S", default_value_t = 0.0, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, env = "BESOV_P", default_value = "2", value_parser = parse_exponent)]
        p: f64,
        #[arg(long, env = "BESOV_Q", default_value = "2", value_parser = parse_exponent)]
        q: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Operations on nets.
    Net {
        #[command(subcommand)]
        command: NetCommand,
    },
    /// Association between a target and a net.
    Associate {
        #[arg(long, env = "BESOV_TARGET")]
        target: String,
        /// JSON net description.
        #[arg(long)]
        net: PathBuf,
        #[arg(long, env = "BESOV_Q", default_value = "2", value_parser = parse_exponent)]
        q: f64,
        #[arg(long, env = "BESOV_SEED", default_value_t = 7)]
        seed: u64,
        /// Number of test functions.
        #[arg(long, default_value_t = 16)]
        battery: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Kernel diagnostics.
    Kernels {
        #[command(subcommand)]
        command: KernelCommand,
    },
    /// Built-in demonstrations.
    Demo {
        which: Demo,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NetCommand {
    /// Moderate and negligible verdicts for a spike net or a JSON net.
    Classify {
        /// Spike net variant (`remark1` or `remark2`).
        #[arg(long, conflicts_with = "spec")]
        variant: Option<String>,
        /// JSON net description.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Parameter q of the spike net.
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Integrability exponent of the test; defaults to `--q`.
        #[arg(long)]
        test_q: Option<f64>,
        /// Classify the pointwise square.
        #[arg(long)]
        square: bool,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value = "2", value_parser = parse_exponent)]
        p: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Moments of the mollifier and band/moment conditions of the LP pair.
    Verify {
        /// Order s of the LP-pair conditions.
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        order: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    Remark1,
    Remark2,
    Corpus,
}

#[derive(Clone, Copy, Debug)]
enum Order {
    Auto,
    Fixed(u32),
}

impl std::str::FromStr for Order {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Order::Auto);
        }
        s.parse().map(Order::Fixed).map_err(|_| format!("expected `auto` or an integer, got {s:?}"))
    }
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    let v = match s {
        "inf" | "infinity" | "Inf" => f64::INFINITY,
        _ => s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if v.is_nan() || v < 1.0 {
        return Err(format!("exponent must lie in [1, inf], got {s}"));
    }
    Ok(v)
}

/// Outcome of a subcommand: its report and whether it was conclusive.
struct Outcome {
    report: Value,
    conclusive: bool,
}

impl GridArgs {
    fn torus(&self) -> Result<Torus> {
        Torus::new(self.period, self.n).context("invalid --n / --period")
    }

    fn pair(&self) -> Result<LpPair> {
        build_lp_pair(self.sigma, self.eta).context("invalid --sigma / --eta")
    }

    fn scale_grid(&self, pair: &LpPair, torus: &Torus) -> Result<ScaleGrid> {
        let admissible = default_grid(pair, torus)?;
        let y_min = self.y_min.unwrap_or(admissible.y_min());
        Ok(ScaleGrid::new(y_min, 1.0, self.scales)?)
    }

    fn config(&self) -> Value {
        json!({
            "n": self.n,
            "period": self.period,
            "y_min": self.y_min.map_or(Value::Null, encode),
            "scales": self.scales,
            "sigma": self.sigma,
            "eta": self.eta,
        })
    }
}

fn resolved_grid(grid: &ScaleGrid, torus: &Torus) -> Value {
    json!({
        "N": torus.size(),
        "L": torus.period(),
        "y_min": grid.y_min(),
        "y_max": grid.y_max(),
        "J": grid.count(),
    })
}

fn run_analyze(g: &GridArgs, input: &str, p: f64, q: f64, k: Order, plot: Option<&Path>) -> Result<Outcome> {
    let t = load_input(input, g.torus()?).with_context(|| format!("loading {input}"))?;
    let pair = g.pair()?;
    let grid = g.scale_grid(&pair, t.torus())?;
    let settings = DetectSettings::new(p, q);
    let report = match k {
        Order::Auto => analyze(&t, &settings, &pair, &grid)?,
        Order::Fixed(k) => detect_at_order(&t, &settings.with_k(k), &pair, &grid)?,
    };
    if let Some(path) = plot {
        let profile = sweep(&t, &pair.phi, &grid, report.k_used, p, &pair.phi.id())?;
        let title = format!("{input}: ||T * phi_eps||_(W^{},{}) ", report.k_used, fmt_float(p));
        std::fs::write(path, profile_svg(&profile, Some(&report.fit), &title))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let conclusive = report.verdict.is_conclusive();
    Ok(Outcome {
        report: json!({
            "command": "analyze",
            "config": {
                "input": input,
                "p": encode(p),
                "q": encode(q),
                "k": match k { Order::Auto => json!("auto"), Order::Fixed(k) => json!(k) },
                "grid": resolved_grid(&grid, t.torus()),
                "kernels": { "phi": pair.phi.id(), "psi": pair.psi.id() },
                "options": g.config(),
            },
            "result": serde_json::to_value(&report)?,
        }),
        conclusive,
    })
}

fn run_norm(g: &GridArgs, input: &str, s: f64, p: f64, q: f64) -> Result<Outcome> {
    let t = load_input(input, g.torus()?).with_context(|| format!("loading {input}"))?;
    let pair = g.pair()?;
    let grid = g.scale_grid(&pair, t.torus())?;
    let norm = besov_norm(&t, s, p, q, &pair, &grid)?;
    Ok(Outcome {
        conclusive: norm.verdict != Convergence::Borderline,
        report: json!({
            "command": "norm",
            "config": {
                "input": input,
                "s": s,
                "p": encode(p),
                "q": encode(q),
                "grid": resolved_grid(&grid, t.torus()),
                "options": g.config(),
            },
            "result": serde_json::to_value(&norm)?,
        }),
    })
}

/// Grid for classifying `net`: the default grid for scalar nets, the band
/// limit of the mollifier for function nets.
fn classify_options(g: &GridArgs, net: &NetSpec) -> Result<ClassifyOptions> {
    let mut opts = ClassifyOptions::default();
    if let NetKind::Function(f) = net.kind() {
        let torus = *f(1.0)?.torus();
        let phi = build_mollifier(g.sigma)?;
        opts.grid = ScaleGrid::for_kernel(&phi, &torus, 1.0, g.scales)?;
        if let Some(y) = g.y_min {
            opts.grid = ScaleGrid::new(y, 1.0, g.scales)?;
        }
    }
    Ok(opts)
}

fn classify_report(g: &GridArgs, net: &NetSpec, q: f64, k: u32, p: f64) -> Result<Value> {
    let opts = classify_options(g, net)?;
    let moderate = classify_moderate(net, q, k, p, None, &opts)?;
    let negligible = classify_negligible(net, q, p, None, &opts)?;
    Ok(json!({
        "net": net.label(),
        "moderate": serde_json::to_value(&moderate)?,
        "negligible": serde_json::to_value(&negligible)?,
    }))
}

#[allow(clippy::too_many_arguments)]
fn run_classify(
    g: &GridArgs,
    variant: Option<&str>,
    spec: Option<&Path>,
    q: f64,
    test_q: Option<f64>,
    square: bool,
    k: u32,
    p: f64,
) -> Result<Outcome> {
    let test_q = test_q.unwrap_or(q);
    let mut net = match (variant, spec) {
        (Some(v), None) => NetSpec::spike(SpikeNet::new(SpikeVariant::parse(v)?, q)?),
        (None, Some(path)) => {
            let file = load_net(&path.to_string_lossy())?;
            let ctx = NetContext {
                torus: g.torus()?,
                target: None,
                sigma: g.sigma,
            };
            file.resolve(&ctx)?
        }
        _ => bail!("give exactly one of --variant and --spec"),
    };
    if square {
        net = net.squared()?;
    }
    let result = classify_report(g, &net, test_q, k, p)?;
    Ok(Outcome {
        conclusive: true,
        report: json!({
            "command": "net classify",
            "config": {
                "variant": variant,
                "spec": spec.map(|s| s.to_string_lossy().into_owned()),
                "q": q,
                "test_q": test_q,
                "square": square,
                "k": k,
                "p": encode(p),
                "options": g.config(),
            },
            "result": result,
        }),
    })
}

fn run_associate(g: &GridArgs, target: &str, net_path: &Path, q: f64, seed: u64, battery: usize) -> Result<Outcome> {
    let t = load_input(target, g.torus()?).with_context(|| format!("loading {target}"))?;
    let file = load_net(&net_path.to_string_lossy())?;
    let ctx = NetContext {
        torus: *t.torus(),
        target: Some(&t),
        sigma: g.sigma,
    };
    let net = file.resolve(&ctx)?;
    let pair = g.pair()?;
    let grid = g.scale_grid(&pair, t.torus())?;
    let tests = bump_battery(*t.torus(), battery, seed);
    let report = association_verdict(&t, &net, &tests, q, &grid, &AssociationOptions::default())?;
    Ok(Outcome {
        conclusive: !matches!(report.verdict, AssociationVerdict::Inconclusive { .. }),
        report: json!({
            "command": "associate",
            "config": {
                "target": target,
                "net": serde_json::to_value(&file)?,
                "q": encode(q),
                "seed": seed,
                "battery": battery,
                "grid": resolved_grid(&grid, t.torus()),
                "options": g.config(),
            },
            "result": serde_json::to_value(&report)?,
        }),
    })
}

fn run_kernels_verify(g: &GridArgs, order: f64) -> Result<Outcome> {
    let pair = g.pair()?;
    let phi = build_mollifier(g.sigma)?;
    let moments = (0..=10)
        .map(|a| Ok(json!({ "alpha": a, "value": moment(&phi, a)? })))
        .collect::<Result<Vec<Value>>>()?;
    let diag = verify_lp_conditions(&pair, order);
    Ok(Outcome {
        conclusive: true,
        report: json!({
            "command": "kernels verify",
            "config": { "order": order, "options": g.config() },
            "result": {
                "mollifier": phi.id(),
                "moments": moments,
                "lp_pair": serde_json::to_value(&diag)?,
            },
        }),
    })
}

fn run_demo(g: &GridArgs, which: Demo, q: f64) -> Result<Outcome> {
    let result = match which {
        Demo::Remark1 => {
            let net = SpikeNet::new(SpikeVariant::PolynomialDamped, q)?;
            let opts = ClassifyOptions::default();
            let f = classify_moderate(&NetSpec::spike(net), q, 0, 2.0, None, &opts)?;
            let f2 = classify_moderate(&NetSpec::spike(net.squared()), q, 0, 2.0, None, &opts)?;
            let at_zero = spike_integral(&net.squared(), 0.0, q);
            json!({
                "net": net.label(),
                "q": q,
                "f": serde_json::to_value(&f)?,
                "f_squared": serde_json::to_value(&f2)?,
                "f_squared_integral_s0": {
                    "verdict": serde_json::to_value(at_zero.verdict)?,
                    "log_partial_sum_at_nmax": at_zero.log_value,
                    "tail_ratios": serde_json::to_value(&at_zero.tail_ratios)?,
                },
            })
        }
        Demo::Remark2 => {
            let net = NetSpec::spike(SpikeNet::new(SpikeVariant::RootDamped, q)?);
            let opts = ClassifyOptions::default();
            let at_q = classify_negligible(&net, q, 2.0, None, &opts)?;
            let at_2q = classify_negligible(&net, 2.0 * q, 2.0, None, &opts)?;
            json!({
                "net": net.label(),
                "q": q,
                "negligible_at_q": serde_json::to_value(&at_q)?,
                "negligible_at_2q": serde_json::to_value(&at_2q)?,
                "differs": (at_q.verdict == Negligibility::Negligible) != (at_2q.verdict == Negligibility::Negligible),
            })
        }
        Demo::Corpus => {
            let torus = g.torus()?;
            let pair = g.pair()?;
            let grid = g.scale_grid(&pair, &torus)?;
            let mut rows = Vec::new();
            for member in standard_corpus(torus) {
                for p in [1.0, 2.0, f64::INFINITY] {
                    let r = analyze(&member.function, &DetectSettings::new(p, f64::INFINITY), &pair, &grid)?;
                    let expected = match member.exponent {
                        Exponent::Smooth => f64::INFINITY,
                        e => e.at(p),
                    };
                    rows.push(json!({
                        "name": member.name,
                        "p": encode(p),
                        "expected": encode(expected),
                        "r_hat": encode(r.r_hat),
                        "verdict": serde_json::to_value(&r.verdict)?,
                    }));
                }
            }
            json!({ "grid": resolved_grid(&grid, &torus), "rows": rows })
        }
    };
    Ok(Outcome {
        conclusive: true,
        report: json!({
            "command": "demo",
            "config": {
                "which": match which { Demo::Remark1 => "remark1", Demo::Remark2 => "remark2", Demo::Corpus => "corpus" },
                "q": q,
                "options": g.config(),
            },
            "result": result,
        }),
    })
}

fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn emit(outcome: &Outcome, path: Option<&Path>) -> Result<()> {
    let text = to_report_string(&outcome.report)? + "\n";
    if let Some(path) = path {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.grid;
    let (outcome, report) = match &cli.command {
        Command::Analyze { input, p, q, k, report, plot } => {
            (run_analyze(g, input, *p, *q, *k, plot.as_deref())?, report)
        }
        Command::Norm { input, s, p, q, report } => (run_norm(g, input, *s, *p, *q)?, report),
        Command::Net {
            command: NetCommand::Classify { variant, spec, q, test_q, square, k, p, report },
        } => (
            run_classify(g, variant.as_deref(), spec.as_deref(), *q, *test_q, *square, *k, *p)?,
            report,
        ),
        Command::Associate { target, net, q, seed, battery, report } => {
            (run_associate(g, target, net, *q, *seed, *battery)?, report)
        }
        Command::Kernels {
            command: KernelCommand::Verify { order, report },
        } => (run_kernels_verify(g, *order)?, report),
        Command::Demo { which, q, report } => (run_demo(g, *which, *q)?, report),
    };
    emit(&outcome, report.as_deref())?;
    Ok(outcome.conclusive)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_parse() {
        assert_eq!(parse_exponent("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_exponent("2").unwrap(), 2.0);
        assert!(parse_exponent("0.5").is_err());
        assert!(parse_exponent("x").is_err());
    }

    #[test]
    fn orders_parse() {
        assert!(matches!("auto".parse::<Order>().unwrap(), Order::Auto));
        assert!(matches!("3".parse::<Order>().unwrap(), Order::Fixed(3)));
        assert!("-1".parse::<Order>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn zero_input_has_zero_norm() {
        let g = GridArgs { n: 1024, period: 1.0, y_min: None, scales: 16, sigma: 32.0, eta: 0.5 };
        let out = run_norm(&g, "builtin:zero", 0.5, 2.0, 2.0).unwrap();
        assert_eq!(out.report["result"]["value"], json!(0.0));
        assert!(out.conclusive);
    }
}
