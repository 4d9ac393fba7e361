//! The `bibd` command-line front end.
//!
//! Every subcommand except `table` writes one canonical JSON document to
//! stdout. Errors go to stderr as JSON with a nonzero exit code: 2 for bad
//! parameters, 3 for an exhausted resource budget, 4 for a failed hypothesis,
//! 1 when `verify` finds a violation.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::asymptotics::{ln_psi_asymptotic, psi_asymptotic, return_prob_asymptotic};
use crate::bounds::{default_delta, return_prob_interval};
use crate::charfn::{enumerate_lambda_star, lambda_phase, CharFn, CIRCLE_TOL};
use crate::covariance::{build_n, det_m_closed, det_m_closed_exact, det_m_exact, det_m_numeric};
use crate::design::{binomial, derive_params, enumerate_columns, DesignParams};
use crate::error::Error;
use crate::exact_count::{count, ln_count, resolve_method, return_prob_exact, CountOptions, Method};
use crate::json::{envelope, float, to_canonical};
use crate::mc_walk::estimate_return_prob;
use crate::verify::run_all;

#[derive(Debug, Parser)]
#[command(
    name = "bibd",
    version,
    about = "Exact and asymptotic counts of BIBD incidence matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct VkArgs {
    /// Number of rows (points).
    #[arg(short = 'v', long = "v")]
    v: u32,
    /// Ones per column (block size).
    #[arg(short = 'k', long = "k")]
    k: u32,
}

#[derive(Debug, Args, Clone, Copy)]
struct VktArgs {
    #[command(flatten)]
    vk: VkArgs,
    /// Number of columns (blocks).
    #[arg(short = 't', long = "t")]
    t: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Dp,
    Multiset,
    Closed,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dp => Method::Dp,
            MethodArg::Multiset => Method::Multiset,
            MethodArg::Closed => Method::Closed,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Debug, Args, Clone, Copy)]
struct CountArgs {
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// State (DP) or node (multiset) budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Expand DP layers on a single thread.
    #[arg(long)]
    serial: bool,
}

impl CountArgs {
    fn options(&self) -> CountOptions {
        CountOptions {
            budget: self.budget,
            parallel: !self.serial,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DeltaScheme {
    /// `δ = t^{-5/12}`.
    Paper,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived parameters d, r, λ and admissibility.
    Params(VktArgs),
    /// List the columns of weight k.
    Columns(VkArgs),
    /// Exact count Ψ.
    Count {
        #[command(flatten)]
        vkt: VktArgs,
        #[command(flatten)]
        opts: CountArgs,
    },
    /// Asymptotic count Ψ̂.
    Asym(VktArgs),
    /// Return probability, asymptotic by default.
    Prob {
        #[command(flatten)]
        vkt: VktArgs,
        /// Exact value from the count.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        opts: CountArgs,
    },
    /// Rigorous interval around the return probability.
    Bounds {
        #[command(flatten)]
        vkt: VktArgs,
        /// Box half-width; defaults to `t^{-5/12}`
        #[arg(long, conflicts_with = "delta_scheme")]
        delta: Option<f64>,
        /// Named choice of δ
        #[arg(long, value_enum)]
        delta_scheme: Option<DeltaScheme>,
    },
    /// det M: closed form, exact elimination, floating point.
    Det(VkArgs),
    /// The set Λ★ with S values.
    Lambda(VkArgs),
    /// Φ_X and Φ_Y at a point.
    Charfn {
        #[command(flatten)]
        vk: VkArgs,
        /// Comma-separated angles, one per pair.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "gamma"
        )]
        theta: Option<Vec<f64>>,
        /// Evaluate at γ·1.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Monte Carlo estimate of the return probability.
    Mc {
        #[command(flatten)]
        vkt: VktArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// CSV of exact and asymptotic counts over several t.
    Table {
        #[command(flatten)]
        vk: VkArgs,
        /// Comma-separated t values.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        ts: Vec<u64>,
        #[command(flatten)]
        opts: CountArgs,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceBudgetExceeded { .. } => 3,
        Error::HypothesisFailed(_)
        | Error::OutOfDomain(_)
        | Error::MatrixSingular
        | Error::UpdateSingular
        | Error::MatrixNotPositiveDefinite(_) => 4,
        Error::Parameter(_) | Error::InadmissibleT { .. } | Error::EmptyRegion(_) | Error::Dimension(_) => 2,
    }
}

fn error_json(kind: &str, message: &str, code: i32) -> String {
    to_canonical(&json!({
        "schema_version": crate::json::SCHEMA_VERSION,
        "error": {"kind": kind, "message": message, "exit_code": code},
    }))
}

enum Output {
    Json(Value),
    Text(String),
    /// JSON document plus an exit code (used by `verify`).
    JsonWithCode(Value, i32),
}

fn vk_json(a: VkArgs) -> Value {
    json!({"v": a.v, "k": a.k})
}

fn vkt_json(a: VktArgs) -> Value {
    json!({"v": a.vk.v, "k": a.vk.k, "t": a.t})
}

/// Parses `args` (including the program name), runs the command, and
/// writes to `out`/`err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    let _ = writeln!(err, "{}", error_json("usage", first, 2));
                    2
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(Output::Json(v)) => {
            let _ = writeln!(out, "{}", to_canonical(&v));
            0
        }
        Ok(Output::JsonWithCode(v, code)) => {
            let _ = writeln!(out, "{}", to_canonical(&v));
            code
        }
        Ok(Output::Text(s)) => {
            let _ = write!(out, "{s}");
            0
        }
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(err, "{}", error_json(e.kind(), &e.to_string(), code));
            code
        }
    }
}

fn execute(cmd: Command) -> crate::Result<Output> {
    match cmd {
        Command::Params(a) => {
            let p = DesignParams::new(a.vk.v, a.vk.k, a.t)?;
            let d = derive_params(&p);
            Ok(Output::Json(envelope(
                "params",
                vkt_json(a),
                json!({
                    "d": d.d,
                    "r": d.r.to_string(),
                    "lambda": d.lambda.to_string(),
                    "r_integral": d.r_is_integer(),
                    "lambda_integral": d.lambda_is_integer(),
                    "admissible": d.admissible,
                    "columns": binomial(a.vk.v.into(), a.vk.k.into()).to_string(),
                }),
            )))
        }
        Command::Columns(a) => {
            let cols = enumerate_columns(a.v, a.k)?;
            let rows: Vec<Value> = cols
                .iter()
                .map(|c| {
                    let bits: String = c.bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
                    json!({"bits": bits, "pairs": c.pair_support()})
                })
                .collect();
            Ok(Output::Json(envelope(
                "columns",
                vk_json(a),
                json!({"count": rows.len(), "columns": rows}),
            )))
        }
        Command::Count { vkt, opts } => {
            let (v, k, t) = (vkt.vk.v, vkt.vk.k, vkt.t);
            let method = resolve_method(v, k, t, opts.method.into());
            let psi = count(v, k, t, method, opts.options())?;
            let mut params = vkt_json(vkt);
            params["method"] = Value::from(Method::from(opts.method).to_string());
            Ok(Output::Json(envelope(
                "count",
                params,
                json!({
                    "psi": psi.to_string(),
                    "method": method.to_string(),
                    "admissible": derive_params(&DesignParams::new(v, k, t)?).admissible,
                    "ln_psi": float(ln_count(&psi)),
                }),
            )))
        }
        Command::Asym(a) => {
            let r = psi_asymptotic(a.vk.v, a.vk.k, a.t)?;
            Ok(Output::Json(envelope(
                "asym",
                vkt_json(a),
                json!({
                    "ln_psi_hat": float(r.ln_value),
                    "log10_psi_hat": float(r.log10_value),
                    "leading_digits": r.leading_digits,
                    "scientific": r.scientific,
                }),
            )))
        }
        Command::Prob { vkt, exact, opts } => {
            let (v, k, t) = (vkt.vk.v, vkt.vk.k, vkt.t);
            let mut params = vkt_json(vkt);
            params["exact"] = Value::from(exact);
            let payload = if exact {
                let method = resolve_method(v, k, t, opts.method.into());
                let (p, f) = return_prob_exact(v, k, t, method)?;
                json!({"kind": "exact", "probability": p.to_string(), "value": float(f), "method": method.to_string()})
            } else {
                let p = return_prob_asymptotic(v, k, t)?;
                json!({"kind": "asymptotic", "value": float(p)})
            };
            Ok(Output::Json(envelope("prob", params, payload)))
        }
        Command::Bounds {
            vkt,
            delta,
            delta_scheme,
        } => {
            let delta = match (delta, delta_scheme) {
                (Some(d), _) => d,
                (None, _) => default_delta(vkt.t as f64),
            };
            let b = return_prob_interval(vkt.vk.v, vkt.vk.k, vkt.t, delta)?;
            let mut params = vkt_json(vkt);
            params["delta"] = float(delta);
            let lu = b.lu.map(|lu| json!({"lower": float(lu.lower), "upper": float(lu.upper), "ln_lower": float(lu.ln_lower), "ln_upper": float(lu.ln_upper)}));
            Ok(Output::Json(envelope(
                "bounds",
                params,
                json!({
                    "case": serde_json::to_value(b.case).unwrap_or(Value::Null),
                    "lower": float(b.lower),
                    "upper": float(b.upper),
                    "delta": float(b.delta),
                    "main_term": b.main_term.map(float),
                    "decay": b.decay.map(float),
                    "lu": lu,
                }),
            )))
        }
        Command::Det(a) => {
            let closed = det_m_closed(a.v, a.k)?;
            let cov = build_n(a.v, a.k)?;
            let numeric = det_m_numeric(&cov.m)?;
            let exact = det_m_exact(&cov.m)?;
            let closed_exact = det_m_closed_exact(a.v, a.k)?;
            let rel = if closed.value == numeric {
                0.0
            } else {
                (closed.value - numeric).abs() / closed.value.abs().max(numeric.abs())
            };
            Ok(Output::Json(envelope(
                "det",
                vk_json(a),
                json!({
                    "closed": float(closed.value),
                    "ln_closed": float(closed.ln),
                    "closed_exact": closed_exact.to_string(),
                    "elimination_exact": exact.to_string(),
                    "exact_agree": closed_exact == exact,
                    "numeric": float(numeric),
                    "relative_difference": float(rel),
                }),
            )))
        }
        Command::Lambda(a) => {
            let elems = enumerate_lambda_star(a.v, a.k)?;
            let cf = CharFn::new(a.v, a.k)?;
            let mut rows = Vec::with_capacity(elems.len());
            for el in &elems {
                let (s, phase) = lambda_phase(el, a.v, a.k);
                let phi = cf.phi_y(el.psi.angles())?;
                rows.push(json!({
                    "m1": el.m1,
                    "m": el.m,
                    "s": s,
                    "phase_re": float(phase.re),
                    "phase_im": float(phase.im),
                    "abs_phi_y": float(phi.norm()),
                }));
            }
            Ok(Output::Json(envelope(
                "lambda",
                vk_json(a),
                json!({"count": rows.len(), "elements": rows}),
            )))
        }
        Command::Charfn { vk, theta, gamma } => {
            let cf = CharFn::new(vk.v, vk.k)?;
            let theta = match (theta, gamma) {
                (Some(th), _) => th,
                (None, Some(g)) => vec![g; cf.d()],
                (None, None) => vec![0.0; cf.d()],
            };
            let (x, y) = cf.phi(&theta)?;
            let inside = cf.is_in_lambda_x(&theta, CIRCLE_TOL)?;
            let mut params = vk_json(vk);
            params["theta"] = Value::Array(theta.iter().map(|&t| float(t)).collect());
            Ok(Output::Json(envelope(
                "charfn",
                params,
                json!({
                    "phi_x": {"re": float(x.re), "im": float(x.im), "abs": float(x.norm())},
                    "phi_y": {"re": float(y.re), "im": float(y.im), "abs": float(y.norm())},
                    "in_lambda_x": inside,
                }),
            )))
        }
        Command::Mc { vkt, samples, seed } => {
            let r = estimate_return_prob(vkt.vk.v, vkt.vk.k, vkt.t, samples, seed)?;
            let mut params = vkt_json(vkt);
            params["samples"] = Value::from(samples);
            params["seed"] = Value::from(seed);
            Ok(Output::Json(envelope(
                "mc",
                params,
                json!({
                    "hits": r.hits,
                    "samples": r.samples,
                    "estimate": float(r.estimate),
                    "ci_low": float(r.ci_low),
                    "ci_high": float(r.ci_high),
                    "seed": r.seed,
                }),
            )))
        }
        Command::Verify { seed } => {
            let reports = run_all(seed);
            let all = reports.iter().all(|r| r.passed);
            let payload = json!({
                "passed": all,
                "checks": serde_json::to_value(&reports).unwrap_or(Value::Null),
            });
            let code = if all { 0 } else { 1 };
            Ok(Output::JsonWithCode(
                envelope("verify", json!({"seed": seed}), payload),
                code,
            ))
        }
        Command::Table { vk, ts, opts } => {
            let mut csv = String::from("t,psi_exact,psi_asym_log10,ratio\n");
            for t in ts {
                let method = resolve_method(vk.v, vk.k, t, opts.method.into());
                let psi = count(vk.v, vk.k, t, method, opts.options())?;
                let (log10, ratio) = match ln_psi_asymptotic(vk.v, vk.k, t) {
                    Ok(ln_hat) => {
                        let ratio = if psi.is_zero() {
                            0.0
                        } else {
                            (ln_count(&psi) - ln_hat).exp()
                        };
                        (
                            crate::json::format_float(ln_hat / std::f64::consts::LN_10),
                            crate::json::format_float(ratio),
                        )
                    }
                    Err(Error::InadmissibleT { .. }) => (String::new(), String::new()),
                    Err(e) => return Err(e),
                };
                csv.push_str(&format!("{t},{psi},{log10},{ratio}\n"));
            }
            Ok(Output::Text(csv))
        }
    }
}
