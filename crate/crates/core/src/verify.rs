//! End-to-end invariant suite behind `bibd verify`.
//!
//! Each check returns a [`CheckReport`]; a check passes only if every
//! individual comparison inside it passes.

use std::f64::consts::TAU;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{f_vk, f_vk_exact};
use crate::bounds::{default_delta, envelope_constants, gaussian_box_bounds, l_u_bounds, real_power_bounds};
use crate::charfn::{
    circular_residue, enumerate_lambda_star, lambda_phase, lambda_root_sum, max_difference_residue, CharFn,
    Region, Sampler,
};
use crate::covariance::{
    box_constants, build_n, centered_moments, decompose, det_m_closed, det_m_closed_exact, det_m_exact, ones,
    q_matrix, quadratic_form, y_vec,
};
use crate::design::{binomial_u64, derive_params, pair_count, pairs0, DesignParams};
use crate::exact_count::{count_dp, count_exhaustive, count_k2_closed, count_multiset};
use crate::linalg::{bareiss_determinant, inverse, rank_update_det, rank_update_inverse, Matrix};
use crate::scalar::{ratio, rational_to_f64};

/// `(v, k)` pairs used by the determinant checks.
pub const DET_GRID: [(u32, u32); 9] = [
    (4, 2),
    (5, 2),
    (5, 3),
    (6, 2),
    (6, 3),
    (6, 4),
    (7, 3),
    (7, 4),
    (8, 4),
];

/// `(v, k)` pairs used by the region-bound checks.
pub const REGION_GRID: [(u32, u32); 4] = [(5, 3), (6, 3), (6, 4), (7, 3)];

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub criterion: u32,
    pub name: &'static str,
    pub passed: bool,
    pub comparisons: u64,
    pub failures: Vec<String>,
    pub seconds: f64,
}

/// Collects comparisons; keeps the first few failure messages.
struct Tally {
    comparisons: u64,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Self {
            comparisons: 0,
            failures: Vec::new(),
            failed: 0,
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.comparisons += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < 20 {
                self.failures.push(msg());
            }
        }
    }

    fn ok<T, E: std::fmt::Display>(&mut self, r: std::result::Result<T, E>, what: &str) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.check(false, || format!("{what}: {e}"));
                None
            }
        }
    }

    fn finish(mut self, criterion: u32, name: &'static str, start: Instant) -> CheckReport {
        if self.failed > self.failures.len() as u64 {
            let more = self.failed - self.failures.len() as u64;
            self.failures.push(format!("... and {more} more"));
        }
        CheckReport {
            criterion,
            name,
            passed: self.failed == 0,
            comparisons: self.comparisons,
            failures: self.failures,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn random_rational(rng: &mut ChaCha8Rng, span: i64) -> BigRational {
    ratio(rng.random_range(-span..=span), rng.random_range(1..=span))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<BigRational> {
    Matrix::from_fn(rows, cols, |_, _| random_rational(rng, 6))
}

/// Closed-form `det M` against exact elimination, plus the `k = 2` value.
pub fn check_determinants() -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (v, k) in DET_GRID {
        let Some(cov) = t.ok(build_n(v, k), "build_n") else {
            continue;
        };
        let Some(exact) = t.ok(det_m_exact(&cov.m), "det_m_exact") else {
            continue;
        };
        let Some(closed) = t.ok(det_m_closed(v, k), "det_m_closed") else {
            continue;
        };
        let ex = rational_to_f64(&exact);
        t.check(rel_diff(closed.value, ex) <= 1e-10, || {
            format!("({v},{k}): closed {} vs exact {ex}", closed.value)
        });
        if let Some(ce) = t.ok(det_m_closed_exact(v, k), "det_m_closed_exact") {
            t.check(ce == exact, || {
                format!("({v},{k}): exact closed form {ce} vs {exact}")
            });
        }
    }
    if let Ok(cov) = build_n(4, 2) {
        let det = det_m_exact(&cov.m).ok();
        t.check(det == Some(ratio(1, 46656)), || {
            format!("(4,2): det M = {det:?}, want 6^-6")
        });
    }
    let elapsed = start.elapsed().as_secs_f64();
    t.check(elapsed < 10.0, || format!("took {elapsed:.2} s (limit 10 s)"));
    t.finish(1, "determinant closed form", start)
}

/// `f(v,k) (k-1)^{2(v-1)} = det M` and the `k <-> v-k` symmetry of `f`.
pub fn check_f_link() -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (v, k) in DET_GRID {
        let (Some((f, _)), Some(det)) = (t.ok(f_vk(v, k), "f_vk"), t.ok(det_m_closed(v, k), "det")) else {
            continue;
        };
        let lhs = f * f64::from(k - 1).powi(2 * (v as i32 - 1));
        t.check(rel_diff(lhs, det.value) <= 1e-12, || {
            format!("({v},{k}): f (k-1)^(2(v-1)) = {lhs:e} vs det M = {:e}", det.value)
        });
        let kk = v - k;
        if kk >= 2 {
            if let (Ok((a, _)), Ok((b, _))) = (f_vk(v, k), f_vk(v, kk)) {
                t.check(rel_diff(a, b) <= 1e-12, || {
                    format!("f({v},{k}) = {a:e} vs f({v},{kk}) = {b:e}")
                });
            }
            if let (Ok(a), Ok(b)) = (f_vk_exact(v, k), f_vk_exact(v, kk)) {
                t.check(a == b, || format!("exact f({v},{k}) != f({v},{kk})"));
            }
        }
    }
    t.finish(2, "f(v,k) and det M", start)
}

/// `N 1 = 0`, the second-moment identity, the `M` decomposition and `Q(5)`.
pub fn check_covariance(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (v, k) in DET_GRID {
        let Some(cov) = t.ok(build_n(v, k), "build_n") else {
            continue;
        };
        let d = pair_count(v);
        let n1 = &cov.n * &ones(d);
        t.check(n1.iter().all(Zero::is_zero), || format!("({v},{k}): N 1 != 0"));
        for _ in 0..100 {
            let mu: Vec<BigRational> = (0..d).map(|_| random_rational(&mut rng, 9)).collect();
            let Some((first, second)) = t.ok(centered_moments(v, k, &mu), "moments") else {
                break;
            };
            let q = quadratic_form(&cov.n, &mu);
            t.check(first.is_zero() && second == q, || {
                format!("({v},{k}): E[μ·ΔY] = {first}, E[(μ·ΔY)²] = {second}, μᵀNμ = {q}")
            });
        }
        if let Some(dec) = t.ok(decompose(v, k), "decompose") {
            t.check(dec.reconstruct() == cov.m, || {
                format!("({v},{k}): a1 I + a2 xxᵀ + a3 QQᵀ != M")
            });
        }
    }
    let printed: [[i64; 5]; 9] = [
        [1, 1, 0, 0, 0],
        [1, 0, 1, 0, 0],
        [1, 0, 0, 1, 0],
        [1, 0, 0, 0, 1],
        [0, 1, 1, 0, 0],
        [0, 1, 0, 1, 0],
        [0, 1, 0, 0, 1],
        [0, 0, 1, 1, 0],
        [0, 0, 1, 0, 1],
    ];
    let want = Matrix::from_fn(9, 5, |i, j| BigRational::from_integer(printed[i][j].into()));
    t.check(q_matrix(5) == want, || {
        "Q(5) differs from the printed matrix".into()
    });
    t.finish(3, "covariance identities", start)
}

/// `Λ★` size, unit modulus, phase, root sums and the two congruences.
pub fn check_lambda() -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (v, k, want) in [(5u32, 3u32, 16usize), (6, 4, 243)] {
        let n = enumerate_lambda_star(v, k).map(|l| l.len()).ok();
        t.check(n == Some(want), || format!("|Λ★({v},{k})| = {n:?}, want {want}"));
    }
    for (v, k) in [(5u32, 3u32), (6, 3), (6, 4), (7, 3), (7, 4)] {
        let (Some(cf), Some(elems)) = (
            t.ok(CharFn::new(v, k), "charfn"),
            t.ok(enumerate_lambda_star(v, k), "Λ★"),
        ) else {
            continue;
        };
        let h = TAU / (f64::from(k) - 1.0);
        let pairs = pairs0(v);
        let idx = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
        for el in &elems {
            let reduced = cf.phi_y(el.psi.angles()).unwrap_or_default();
            t.check((reduced.norm() - 1.0).abs() <= 1e-10, || {
                format!("({v},{k}) m1={} m={:?}: |Φ_Y| = {}", el.m1, el.m, reduced.norm())
            });
            let raw = cf.phi_y(&el.psi_box(v, k)).unwrap_or_default();
            let (s, phase) = lambda_phase(el, v, k);
            t.check((raw - phase).norm() <= 1e-10, || {
                format!("({v},{k}) S={s}: Φ_Y = {raw} vs e^(i2πkS/v) = {phase}")
            });
            let psi = el.psi.angles();
            let first = psi[0];
            t.check(
                psi.iter().all(|&x| circular_residue(x - first, h) <= 1e-10),
                || format!("({v},{k}): coordinates not congruent mod 2π/(k-1)"),
            );
            let vv = v as usize;
            for a in 0..vv {
                for b in a + 1..vv {
                    let diffs: Vec<f64> = (0..vv)
                        .filter(|&j| j != a && j != b)
                        .map(|j| psi[idx(a, j)] - psi[idx(b, j)])
                        .collect();
                    let d0 = diffs[0];
                    t.check(
                        diffs.iter().all(|&x| circular_residue(x - d0, TAU) <= 1e-10),
                        || format!("({v},{k}) rows {a},{b}: ψ_aj - ψ_bj depends on j"),
                    );
                }
            }
        }
    }
    for (v, k, tt, want) in [(6u32, 3u32, 10u64, 32.0), (6, 3, 5, 0.0)] {
        if let Some(z) = t.ok(lambda_root_sum(v, k, tt), "root sum") {
            t.check((z - Complex64::new(want, 0.0)).norm() <= 1e-8, || {
                format!("root sum ({v},{k},{tt}) = {z}, want {want}")
            });
        }
    }
    t.finish(4, "maximal set", start)
}

/// Pinned counts, and DP against the multiset oracle on the small grid.
pub fn check_counts() -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let pinned: [(u32, u32, u64, u64, &str); 5] = [
        (4, 2, 6, 720, "closed"),
        (4, 2, 12, 7_484_400, "closed"),
        (5, 2, 10, 3_628_800, "closed"),
        (4, 3, 4, 24, "exhaustive"),
        (6, 3, 5, 0, "dp"),
    ];
    for (v, k, tt, want, how) in pinned {
        let got = match how {
            "closed" => count_k2_closed(v, tt),
            "exhaustive" => count_exhaustive(v, k, tt),
            _ => count_dp(v, k, tt),
        };
        if let Some(g) = t.ok(got, "pinned count") {
            t.check(g == BigUint::from(want), || {
                format!("Ψ({v},{k},{tt}) = {g}, want {want}")
            });
        }
    }
    for v in 3u32..=12 {
        for k in 2..v {
            if binomial_u64(v.into(), k.into()) > 10 {
                continue;
            }
            for tt in 1..=12u64 {
                let admissible = DesignParams::new(v, k, tt)
                    .map(|p| derive_params(&p).admissible)
                    .unwrap_or(false);
                if !admissible {
                    continue;
                }
                let (Some(a), Some(b)) = (
                    t.ok(count_dp(v, k, tt), "dp"),
                    t.ok(count_multiset(v, k, tt), "multiset"),
                ) else {
                    continue;
                };
                t.check(a == b, || format!("({v},{k},{tt}): dp {a} vs multiset {b}"));
            }
        }
    }
    let timer = Instant::now();
    let dp = count_dp(5, 3, 10);
    let secs = timer.elapsed().as_secs_f64();
    let ms = count_multiset(5, 3, 10);
    if let (Some(a), Some(b)) = (t.ok(dp, "dp(5,3,10)"), t.ok(ms, "multiset(5,3,10)")) {
        t.check(a == b, || format!("(5,3,10): dp {a} vs multiset {b}"));
    }
    t.check(secs < 60.0, || {
        format!("DP(5,3,10) took {secs:.1} s (limit 60 s)")
    });
    t.finish(5, "exact counts", start)
}

/// Region envelopes, the tube, the two sandwiches, and `L`/`U` at `t = 1e18`.
pub fn check_bounds(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    for (i, (v, k)) in REGION_GRID.into_iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let d = pair_count(v) as f64;
        let Some(env_b) = t.ok(envelope_constants(v, k, 1.0), "envelope") else {
            continue;
        };
        let delta_b = env_b.delta_max / 2.0;
        let Some(env_b) = t.ok(envelope_constants(v, k, delta_b), "envelope") else {
            continue;
        };
        if let Some(mut sb) = t.ok(Sampler::new(v, k, delta_b, s), "sampler B") {
            for _ in 0..1000 {
                let Some(mu) = t.ok(sb.sample(Region::B), "sample B") else {
                    break;
                };
                let phi = sb
                    .charfn()
                    .phi_x(mu.angles())
                    .map(|z| z.norm())
                    .unwrap_or(f64::NAN);
                t.check(phi <= env_b.bound_b, || {
                    format!("({v},{k}) B: |Φ_X| = {phi} > {}", env_b.bound_b)
                });
            }
        }
        let delta_c = 0.01;
        let Some(env_c) = t.ok(envelope_constants(v, k, delta_c), "envelope") else {
            continue;
        };
        if let Some(mut sc) = t.ok(Sampler::new(v, k, delta_c, s), "sampler C") {
            for _ in 0..1000 {
                let Some(mu) = t.ok(sc.sample(Region::C), "sample C") else {
                    break;
                };
                t.check(max_difference_residue(mu.angles(), k) >= 2.0 * delta_c, || {
                    "C residue".into()
                });
                let phi = sc
                    .charfn()
                    .phi_x(mu.angles())
                    .map(|z| z.norm())
                    .unwrap_or(f64::NAN);
                t.check(phi <= env_c.bound_c, || {
                    format!("({v},{k}) C: |Φ_X| = {phi} > {}", env_c.bound_c)
                });
            }
        }
        let delta_tube = 0.5 / d;
        if let Some(mut st) = t.ok(Sampler::new(v, k, delta_tube, s), "sampler tube") {
            for _ in 0..1000 {
                let mu = st.sample_tube();
                let re = st.charfn().phi_y(&mu).map(|z| z.re).unwrap_or(f64::NAN);
                t.check(re >= 1.0 / 3.0, || format!("({v},{k}) tube: Re Φ_Y = {re}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut done = 0;
    while done < 10_000 {
        let tt: u64 = rng.random_range(1..=20);
        let re: f64 = rng.random_range(0.1..2.0);
        let im: f64 = rng.random_range(-1.0..1.0) * re / tt as f64;
        let z = Complex64::new(re, im);
        let Ok((lo, hi)) = real_power_bounds(z, tt) else {
            continue;
        };
        done += 1;
        let exact = z.powu(tt as u32).re;
        let slack = 1e-9 * exact.abs().max(hi.abs());
        t.check(lo - slack <= exact && exact <= hi + slack, || {
            format!("z = {z}, t = {tt}: Re z^t = {exact} outside [{lo}, {hi}]")
        });
    }
    for _ in 0..10_000 {
        let rho: f64 = rng.random_range(1e-9..10.0);
        if let Some((lo, mid, hi)) = t.ok(gaussian_box_bounds(rho), "gaussian") {
            t.check(lo <= mid && mid <= hi, || {
                format!("ρ = {rho}: {lo} <= {mid} <= {hi} fails")
            });
        }
    }
    let tt = 1e18;
    let delta = default_delta(tt);
    if let Some(sq) = t.ok(box_constants(5, 3), "box constants") {
        if let Some(lu) = t.ok(l_u_bounds(5, 3, tt, delta, sq.d1, sq.d2), "L/U") {
            t.check(
                (lu.lower - 1.0).abs() <= 0.01 && (lu.upper - 1.0).abs() <= 0.01,
                || format!("t = 1e18: L = {}, U = {}", lu.lower, lu.upper),
            );
        }
    }
    t.finish(7, "bound suite", start)
}

fn rational_is_zero_det(a: &Matrix<BigRational>) -> bool {
    bareiss_determinant(a).map(|d| d.is_zero()).unwrap_or(true)
}

/// Determinant lemma and generalized Woodbury over exact rationals.
pub fn check_linalg(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=3);
        let w = random_matrix(&mut rng, n, n);
        if rational_is_zero_det(&w) {
            continue;
        }
        let u = random_matrix(&mut rng, n, m);
        let v = random_matrix(&mut rng, n, m);
        let full = &w + &(&u * &v.transpose());
        let direct = bareiss_determinant(&full).unwrap_or_else(|_| BigRational::zero());
        if let Some(lemma) = t.ok(rank_update_det(&w, &u, &v), "determinant lemma") {
            t.check(lemma == direct, || {
                format!("det lemma {lemma} vs direct {direct}")
            });
        }
        done += 1;
    }
    done = 0;
    while done < 200 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=2);
        let l = rng.random_range(1..=3);
        let w = random_matrix(&mut rng, n, n);
        if rational_is_zero_det(&w) {
            continue;
        }
        let updates: Vec<_> = (0..l)
            .map(|_| (random_matrix(&mut rng, n, m), random_matrix(&mut rng, n, m)))
            .collect();
        let mut full = w.clone();
        for (u, v) in &updates {
            full = &full + &(u * &v.transpose());
        }
        if rational_is_zero_det(&full) {
            continue;
        }
        if let (Some(a), Some(b)) = (
            t.ok(rank_update_inverse(&w, &updates), "woodbury"),
            t.ok(inverse(&full), "inverse"),
        ) {
            t.check(a == b, || format!("woodbury mismatch at n={n}, m={m}, L={l}"));
        }
        done += 1;
    }
    // G = w I + (a3/a1) x xᵀ - (a3/a1) y yᵀ against I + (a3/a1) QᵀQ
    for (v, k) in DET_GRID.into_iter().filter(|&(_, k)| k >= 3) {
        let Some(dec) = t.ok(decompose(v, k), "decompose") else {
            continue;
        };
        let vv = v as usize;
        let c = &dec.a3 / &dec.a1;
        let w_scalar = BigRational::one() + &c * BigRational::from_integer(BigInt::from(v - 2));
        let w = Matrix::<BigRational>::identity(vv).scale(&w_scalar);
        let x = ones(vv);
        let y = y_vec(vv);
        let neg_c = -c.clone();
        let updates = vec![(x.scale(&c), x.clone()), (y.scale(&neg_c), y.clone())];
        let g = &Matrix::identity(vv) + &(&dec.q.transpose() * &dec.q).scale(&c);
        let Some(g_inv) = t.ok(inverse(&g), "G inverse") else {
            continue;
        };
        if let Some(wood) = t.ok(rank_update_inverse(&w, &updates), "G woodbury") {
            t.check(wood == g_inv, || {
                format!("({v},{k}): L = 2 Woodbury for G disagrees")
            });
        }
        let det_g = bareiss_determinant(&g).unwrap_or_else(|_| BigRational::zero());
        let u_all = x
            .scale(&c)
            .hstack(&y.scale(&neg_c))
            .unwrap_or_else(|_| Matrix::zeros(vv, 2));
        let v_all = x.hstack(&y).unwrap_or_else(|_| Matrix::zeros(vv, 2));
        if let Some(lemma) = t.ok(rank_update_det(&w, &u_all, &v_all), "G det lemma") {
            t.check(lemma == det_g && det_g.is_positive(), || {
                format!("({v},{k}): det G {lemma} vs {det_g}")
            });
        }
    }
    t.finish(9, "linear-algebra identities", start)
}

/// Criteria 1-5, 7 and 9 in order.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        check_determinants(),
        check_f_link(),
        check_covariance(seed),
        check_lambda(),
        check_counts(),
        check_bounds(seed),
        check_linalg(seed),
    ]
}
