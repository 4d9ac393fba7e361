//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use bibd_walk::asymptotics::{f_vk, ln_psi_asymptotic};
use bibd_walk::bounds::{default_delta, l_u_bounds};
use bibd_walk::charfn::enumerate_lambda_star;
use bibd_walk::covariance::{box_constants, build_n, det_m_exact};
use bibd_walk::exact_count::{count_dp, count_k2_closed, count_multiset, ln_count};
use bibd_walk::mc_walk::{estimate_return_prob, wilson_interval};
use bibd_walk::scalar::ratio;
use bibd_walk::verify::{self, CheckReport};
use num_bigint::BigUint;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_checks(extra: Vec<(bool, String)>, report: Option<CheckReport>) -> Self {
        let mut passed = true;
        let mut notes = Vec::new();
        if let Some(r) = report {
            passed &= r.passed;
            notes.push(format!("{} comparisons in {:.2}s", r.comparisons, r.seconds));
            notes.extend(r.failures);
        }
        for (ok, msg) in extra {
            passed &= ok;
            if !ok {
                notes.push(format!("FAILED {msg}"));
            }
        }
        Outcome {
            passed,
            detail: notes.join("; "),
        }
    }
}

const SEED: u64 = 2024;

type Criterion = (u32, &'static str, fn() -> Outcome);

fn c1() -> Outcome {
    let start = Instant::now();
    let report = verify::check_determinants();
    let frozen: [(u32, u32, &str); 9] = [
        (4, 2, "1/46656"),
        (5, 2, "1/10000000000"),
        (5, 3, "1/39062500"),
        (6, 2, "1/437893890380859375"),
        (6, 3, "81/500000000000000"),
        (6, 4, "1/7415771484375"),
        (7, 3, "417942208512/53267084511116409969329833984375"),
        (7, 4, "54226471004352/53267084511116409969329833984375"),
        (8, 4, "7625597484987/175470938318153366461487197875976562500"),
    ];
    let mut extra = Vec::new();
    for (v, k, want) in frozen {
        let got = build_n(v, k)
            .and_then(|c| det_m_exact(&c.m))
            .map(|d| d.to_string());
        extra.push((
            got.as_deref() == Ok(want),
            format!("det M({v},{k}) = {got:?}, want {want}"),
        ));
    }
    let m42 = build_n(4, 2).and_then(|c| det_m_exact(&c.m));
    extra.push((m42 == Ok(ratio(1, 6i64.pow(6))), "det M(4,2) = 6^-6".into()));
    let secs = start.elapsed().as_secs_f64();
    extra.push((secs < 10.0, format!("runtime {secs:.2}s < 10s")));
    Outcome::from_checks(extra, Some(report))
}

fn c2() -> Outcome {
    let report = verify::check_f_link();
    let a = f_vk(6, 2).map(|x| x.0).unwrap_or(f64::NAN);
    let b = f_vk(6, 4).map(|x| x.0).unwrap_or(f64::NAN);
    let extra = vec![(
        (a / b - 1.0).abs() <= 1e-12,
        format!("f(6,2) = {a:e} vs f(6,4) = {b:e}"),
    )];
    Outcome::from_checks(extra, Some(report))
}

fn c3() -> Outcome {
    Outcome::from_checks(Vec::new(), Some(verify::check_covariance(SEED)))
}

fn c4() -> Outcome {
    let report = verify::check_lambda();
    let n53 = enumerate_lambda_star(5, 3).map(|l| l.len()).unwrap_or(0);
    let n64 = enumerate_lambda_star(6, 4).map(|l| l.len()).unwrap_or(0);
    let extra = vec![
        (n53 == 16, format!("|Λ★(5,3)| = {n53}")),
        (n64 == 243, format!("|Λ★(6,4)| = {n64}")),
    ];
    Outcome::from_checks(extra, Some(report))
}

fn c5() -> Outcome {
    let report = verify::check_counts();
    let mut extra = Vec::new();
    let pinned: [(u32, u32, u64, u64); 4] = [
        (4, 2, 6, 720),
        (4, 2, 12, 7_484_400),
        (5, 2, 10, 3_628_800),
        (6, 3, 5, 0),
    ];
    for (v, k, t, want) in pinned {
        let got = count_dp(v, k, t);
        extra.push((
            got == Ok(BigUint::from(want)),
            format!("DP Ψ({v},{k},{t}) = {got:?}, want {want}"),
        ));
    }
    let start = Instant::now();
    let dp = count_dp(5, 3, 10);
    let secs = start.elapsed().as_secs_f64();
    let ms = count_multiset(5, 3, 10);
    extra.push((
        dp.is_ok() && dp == ms,
        format!("Ψ(5,3,10): dp {dp:?} vs multiset {ms:?}"),
    ));
    // regression snapshot after dual-oracle agreement
    extra.push((
        dp == Ok(BigUint::from(3_628_800u64)),
        format!("Ψ(5,3,10) snapshot, got {dp:?}"),
    ));
    extra.push((secs < 60.0, format!("DP(5,3,10) took {secs:.2}s")));
    Outcome::from_checks(extra, Some(report))
}

fn c6() -> Outcome {
    let dev = |t: u64| -> f64 {
        let psi = count_k2_closed(4, t).expect("closed form");
        let ln_hat = ln_psi_asymptotic(4, 2, t).expect("admissible");
        ((ln_count(&psi) - ln_hat).exp() - 1.0).abs()
    };
    let (d120, d240) = (dev(120), dev(240));
    let mut extra = vec![
        (d120 <= 0.05, format!("|Ψ/Ψ̂ - 1| at t=120 is {d120}")),
        (
            d240 < d120,
            format!("deviation at 240 ({d240}) not below 120 ({d120})"),
        ),
    ];
    for (t, r) in [(6u64, 0.62345), (12, 0.78576), (120, 0.97599), (240, 0.98792)] {
        let got = 1.0 - dev(t);
        extra.push((
            (got - r).abs() <= 1e-5,
            format!("ratio at t={t} is {got}, frozen {r}"),
        ));
    }
    let mut o = Outcome::from_checks(extra, None);
    if o.passed {
        o.detail = format!("dev(120) = {d120:.5}, dev(240) = {d240:.5}");
    }
    o
}

fn c7() -> Outcome {
    let report = verify::check_bounds(SEED);
    let t = 1e18;
    let lu = box_constants(5, 3).and_then(|b| l_u_bounds(5, 3, t, default_delta(t), b.d1, b.d2));
    let extra = match lu {
        Ok(lu) => vec![
            (
                (lu.lower - 0.991374).abs() <= 1e-5,
                format!("L(5,3,1e18) = {}", lu.lower),
            ),
            (
                (lu.upper - 1.0).abs() <= 1e-8,
                format!("U(5,3,1e18) = {}", lu.upper),
            ),
        ],
        Err(e) => vec![(false, format!("L/U: {e}"))],
    };
    Outcome::from_checks(extra, Some(report))
}

fn c8() -> Outcome {
    let exact = 3.0 / 32.0;
    let a = estimate_return_prob(4, 3, 4, 100_000, 42);
    let b = estimate_return_prob(4, 3, 4, 100_000, 42);
    let mut extra = Vec::new();
    match (&a, &b) {
        (Ok(a), Ok(b)) => {
            let (lo, hi) = wilson_interval(a.hits, a.samples, 4.0);
            extra.push((
                a.ci_low <= a.estimate && a.estimate <= a.ci_high,
                "estimate inside its 95% interval".into(),
            ));
            extra.push((
                lo <= exact && exact <= hi,
                format!("3/32 outside 4σ Wilson [{lo}, {hi}]"),
            ));
            extra.push((
                a == b && a.estimate.to_bits() == b.estimate.to_bits(),
                "reruns differ".into(),
            ));
        }
        _ => extra.push((false, format!("mc failed: {a:?}"))),
    }
    let mut o = Outcome::from_checks(extra, None);
    if let (true, Ok(a)) = (o.passed, a) {
        o.detail = format!(
            "estimate {} from {} hits, 95% [{:.5}, {:.5}]",
            a.estimate, a.hits, a.ci_low, a.ci_high
        );
    }
    o
}

fn c9() -> Outcome {
    Outcome::from_checks(Vec::new(), Some(verify::check_linalg(SEED)))
}

fn c10() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_bibd")).arg("verify").output();
    let secs = start.elapsed().as_secs_f64();
    let extra = match out {
        Ok(o) => {
            let body: Result<serde_json::Value, _> = serde_json::from_slice(&o.stdout);
            let passed_flag = body
                .as_ref()
                .ok()
                .and_then(|b| b["payload"]["passed"].as_bool())
                .unwrap_or(false);
            let criteria: Vec<u64> = body
                .as_ref()
                .ok()
                .and_then(|b| b["payload"]["checks"].as_array().cloned())
                .unwrap_or_default()
                .iter()
                .filter_map(|c| c["criterion"].as_u64())
                .collect();
            vec![
                (
                    o.status.code() == Some(0),
                    format!("exit status {:?}", o.status.code()),
                ),
                (passed_flag, "payload.passed is not true".into()),
                (
                    criteria == [1, 2, 3, 4, 5, 7, 9],
                    format!("criteria run: {criteria:?}"),
                ),
                (secs < 300.0, format!("took {secs:.1}s")),
            ]
        }
        Err(e) => vec![(false, format!("could not run bibd: {e}"))],
    };
    let mut o = Outcome::from_checks(extra, None);
    if o.passed {
        o.detail = format!("bibd verify exited 0 in {secs:.2}s");
    }
    o
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "determinant closed form", c1),
        (2, "f(v,k) and det M link", c2),
        (3, "covariance identities", c3),
        (4, "maximal set", c4),
        (5, "exact counts", c5),
        (6, "asymptotic convergence (4,2)", c6),
        (7, "bound suite", c7),
        (8, "Monte Carlo", c8),
        (9, "linear-algebra identities", c9),
        (10, "verify command", c10),
    ];
    let mut all = true;
    for (n, name, f) in criteria {
        let o = f();
        all &= o.passed;
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}: {name} ({})", o.detail);
    }
    if all {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
