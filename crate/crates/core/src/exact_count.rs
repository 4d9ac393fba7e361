//! Exact counts `Ψ_{v,k,t}` of `v x t` incidence matrices with column weight
//! `k` and every pairwise row inner product equal to `λ`.
//!
//! Three independent routes: a layered DP over partial pair sums, a multiset
//! enumeration weighted by multinomials, and the `k = 2` factorial formula.
//! A brute-force enumeration is kept for tiny inputs.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::design::{
    binomial, binomial_u64, check_exhaustive, derive_params, enumerate_columns, pair_count, pairs0,
    DesignParams,
};
use crate::error::{param, Error, Result};
use crate::scalar::rational_to_f64;

pub const DEFAULT_STATE_BUDGET: u64 = 50_000_000;
pub const DEFAULT_NODE_BUDGET: u64 = 500_000_000;
/// Largest number of distinct columns the multiset oracle accepts.
pub const MULTISET_MAX_COLUMNS: u64 = 20;
/// Layers at least this large are expanded on the rayon pool.
const PARALLEL_LAYER: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dp,
    Multiset,
    Closed,
    Auto,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dp" => Ok(Method::Dp),
            "multiset" => Ok(Method::Multiset),
            "closed" => Ok(Method::Closed),
            "auto" => Ok(Method::Auto),
            other => param(format!("unknown method {other:?} (dp|multiset|closed|auto)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dp => "dp",
            Method::Multiset => "multiset",
            Method::Closed => "closed",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    /// Cap on states per DP layer, or on search nodes for the multiset oracle.
    pub budget: Option<u64>,
    pub parallel: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            budget: None,
            parallel: true,
        }
    }
}

/// Validates and returns `λ`, or `None` when the count is trivially zero.
fn setup(v: u32, k: u32, t: u64) -> Result<Option<u64>> {
    check_exhaustive(v, k)?;
    if k < 2 {
        return param(format!("counting needs k >= 2, got k={k}"));
    }
    let derived = derive_params(&DesignParams::new(v, k, t)?);
    if !derived.admissible {
        return Ok(None);
    }
    let lambda = derived
        .lambda_u64()
        .ok_or_else(|| Error::Parameter("λ does not fit in 64 bits".into()))?;
    if lambda > 254 {
        return param(format!("λ = {lambda} exceeds the supported maximum 254"));
    }
    Ok(Some(lambda))
}

/// A column as pair and row bitmasks plus its pair support.
struct Column {
    pairs: u128,
    rows: u32,
    support: Vec<usize>,
}

fn column_list(v: u32, k: u32) -> Result<Vec<Column>> {
    Ok(enumerate_columns(v, k)?
        .iter()
        .map(|c| {
            let support = c.pair_support();
            Column {
                pairs: support.iter().fold(0u128, |m, &r| m | (1u128 << r)),
                rows: c.support().iter().fold(0u32, |m, &i| m | (1u32 << i)),
                support,
            }
        })
        .collect())
}

/// DP state keys.
trait StateKey: Hash + Eq + Clone + Send + Sync {
    fn origin(d: usize) -> Self;
    fn coord(&self, r: usize, ctx: &KeyCtx) -> u8;
    fn bump(&self, col: usize, ctx: &KeyCtx) -> Self;
}

struct KeyCtx {
    d: usize,
    v: usize,
    /// Bits per coordinate in the packed key.
    width: usize,
    field: u128,
    /// Packed increment per column (valid only for the packed key).
    deltas: Vec<u128>,
    supports: Vec<Vec<usize>>,
    /// Rows `(i, j)` of each pair coordinate.
    pair_rows: Vec<(usize, usize)>,
    /// Final row sum `λ(v-1)` and the per-step row gain `k-1`.
    row_target: u64,
    row_step: u64,
}

impl StateKey for u128 {
    fn origin(_: usize) -> Self {
        0
    }

    fn coord(&self, r: usize, ctx: &KeyCtx) -> u8 {
        ((self >> (ctx.width * r)) & ctx.field) as u8
    }

    fn bump(&self, col: usize, ctx: &KeyCtx) -> Self {
        self + ctx.deltas[col]
    }
}

impl StateKey for Box<[u8]> {
    fn origin(d: usize) -> Self {
        vec![0u8; d].into_boxed_slice()
    }

    fn coord(&self, r: usize, _: &KeyCtx) -> u8 {
        self[r]
    }

    fn bump(&self, col: usize, ctx: &KeyCtx) -> Self {
        let mut next = self.clone();
        for &r in &ctx.supports[col] {
            next[r] += 1;
        }
        next
    }
}

/// Path counts stored per DP state: `u128` first, `BigUint` on overflow.
trait PathCount: Clone + Send + Sync {
    fn empty() -> Self;
    fn unit() -> Self;
    fn add(&mut self, other: &Self) -> std::result::Result<(), Abort>;
    fn into_big(self) -> BigUint;
}

impl PathCount for u128 {
    fn empty() -> Self {
        0
    }

    fn unit() -> Self {
        1
    }

    fn add(&mut self, other: &Self) -> std::result::Result<(), Abort> {
        *self = self.checked_add(*other).ok_or(Abort::Overflow)?;
        Ok(())
    }

    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl PathCount for BigUint {
    fn empty() -> Self {
        Zero::zero()
    }

    fn unit() -> Self {
        One::one()
    }

    fn add(&mut self, other: &Self) -> std::result::Result<(), Abort> {
        *self += other;
        Ok(())
    }

    fn into_big(self) -> BigUint {
        self
    }
}

enum Abort {
    Budget(u64),
    Overflow,
}

type Layer<K, C> = FxHashMap<K, C>;

fn add_into<K: StateKey, C: PathCount>(
    out: &mut Layer<K, C>,
    key: K,
    count: &C,
    budget: u64,
) -> std::result::Result<(), Abort> {
    out.entry(key).or_insert_with(C::empty).add(count)?;
    if out.len() as u64 > budget {
        return Err(Abort::Budget(out.len() as u64));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn expand<K: StateKey, C: PathCount>(
    key: &K,
    count: &C,
    remaining_before: u64,
    lambda: u64,
    cols: &[Column],
    ctx: &KeyCtx,
    budget: u64,
    out: &mut Layer<K, C>,
) -> std::result::Result<(), Abort> {
    let mut full = 0u128;
    let mut needed = 0u128;
    let mut row_sums = [0u64; 32];
    for r in 0..ctx.d {
        let c = u64::from(key.coord(r, ctx));
        let (i, j) = ctx.pair_rows[r];
        row_sums[i] += c;
        row_sums[j] += c;
        if c == lambda {
            full |= 1 << r;
        } else if c + remaining_before - 1 < lambda {
            // must rise on this very step
            needed |= 1 << r;
        }
    }
    // rows that cannot reach their total without this step
    let reach_after = ctx.row_step * (remaining_before - 1);
    let mut rows_needed = 0u32;
    for (i, &s) in row_sums[..ctx.v].iter().enumerate() {
        if ctx.row_target - s > reach_after {
            rows_needed |= 1 << i;
        }
    }
    for (col, c) in cols.iter().enumerate() {
        if c.pairs & full != 0 || needed & !c.pairs != 0 || rows_needed & !c.rows != 0 {
            continue;
        }
        add_into(out, key.bump(col, ctx), count, budget)?;
    }
    Ok(())
}

fn merge<K: StateKey, C: PathCount>(
    a: Layer<K, C>,
    b: Layer<K, C>,
    budget: u64,
) -> std::result::Result<Layer<K, C>, Abort> {
    let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    for (k, c) in small {
        add_into(&mut big, k, &c, budget)?;
    }
    Ok(big)
}

fn run_dp<K: StateKey, C: PathCount>(
    t: u64,
    lambda: u64,
    cols: &[Column],
    ctx: &KeyCtx,
    target: &K,
    opts: CountOptions,
) -> std::result::Result<C, Abort> {
    let budget = opts.budget.unwrap_or(DEFAULT_STATE_BUDGET);
    let mut layer: Layer<K, C> = Layer::default();
    layer.insert(K::origin(ctx.d), C::unit());
    for step in 0..t {
        let remaining_before = t - step;
        let next = if opts.parallel && layer.len() >= PARALLEL_LAYER {
            let items: Vec<(K, C)> = layer.into_iter().collect();
            let chunk = items.len().div_ceil(rayon::current_num_threads()).max(1024);
            items
                .par_chunks(chunk)
                .map(|part| {
                    let mut local = Layer::default();
                    for (key, count) in part {
                        expand(
                            key,
                            count,
                            remaining_before,
                            lambda,
                            cols,
                            ctx,
                            budget,
                            &mut local,
                        )?;
                    }
                    Ok(local)
                })
                .try_reduce(Layer::default, |a, b| merge(a, b, budget))?
        } else {
            let mut out = Layer::default();
            for (key, count) in &layer {
                expand(key, count, remaining_before, lambda, cols, ctx, budget, &mut out)?;
            }
            out
        };
        if next.is_empty() {
            return Ok(C::empty());
        }
        layer = next;
    }
    Ok(layer.remove(target).unwrap_or_else(C::empty))
}

fn run_dp_any<K: StateKey>(
    t: u64,
    lambda: u64,
    cols: &[Column],
    ctx: &KeyCtx,
    target: K,
    opts: CountOptions,
) -> Result<BigUint> {
    let budget = opts.budget.unwrap_or(DEFAULT_STATE_BUDGET);
    let exceeded = |reached| Error::ResourceBudgetExceeded {
        what: "dp layer states",
        reached,
        budget,
    };
    match run_dp::<K, u128>(t, lambda, cols, ctx, &target, opts) {
        Ok(c) => Ok(c.into_big()),
        Err(Abort::Budget(n)) => Err(exceeded(n)),
        Err(Abort::Overflow) => match run_dp::<K, BigUint>(t, lambda, cols, ctx, &target, opts) {
            Ok(c) => Ok(c),
            Err(Abort::Budget(n)) => Err(exceeded(n)),
            Err(Abort::Overflow) => unreachable!("big integers do not overflow"),
        },
    }
}

/// Layered DP over partial pair sums, pruned to states that can still reach `λ·1`.
pub fn count_dp(v: u32, k: u32, t: u64) -> Result<BigUint> {
    count_dp_with(v, k, t, CountOptions::default())
}

pub fn count_dp_with(v: u32, k: u32, t: u64, opts: CountOptions) -> Result<BigUint> {
    let Some(lambda) = setup(v, k, t)? else {
        return Ok(BigUint::zero());
    };
    let d = pair_count(v);
    let cols = column_list(v, k)?;
    let width = (u64::BITS - lambda.leading_zeros()) as usize;
    let supports: Vec<Vec<usize>> = cols.iter().map(|c| c.support.clone()).collect();
    let mut ctx = KeyCtx {
        d,
        v: v as usize,
        width,
        field: (1u128 << width) - 1,
        deltas: Vec::new(),
        supports,
        pair_rows: pairs0(v),
        row_target: lambda * u64::from(v - 1),
        row_step: u64::from(k - 1),
    };
    if width * d <= 128 {
        ctx.deltas = ctx
            .supports
            .iter()
            .map(|s| s.iter().map(|&r| 1u128 << (width * r)).sum())
            .collect();
        let target: u128 = (0..d).map(|r| u128::from(lambda) << (width * r)).sum();
        run_dp_any(t, lambda, &cols, &ctx, target, opts)
    } else {
        let target: Box<[u8]> = vec![lambda as u8; d].into_boxed_slice();
        run_dp_any(t, lambda, &cols, &ctx, target, opts)
    }
}

struct MultisetSearch<'a> {
    lambda: u64,
    supports: &'a [Vec<usize>],
    /// Pairs whose last covering column is this one.
    closing: Vec<Vec<usize>>,
    factorials: Vec<BigUint>,
    partial: Vec<u64>,
    picks: Vec<u64>,
    nodes: u64,
    budget: u64,
    total: BigUint,
}

impl MultisetSearch<'_> {
    fn run(&mut self, col: usize, remaining: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::ResourceBudgetExceeded {
                what: "multiset search nodes",
                reached: self.nodes,
                budget: self.budget,
            });
        }
        let n = self.supports.len();
        if col == n {
            if remaining == 0 {
                let denom = self
                    .picks
                    .iter()
                    .fold(BigUint::one(), |acc, &p| acc * &self.factorials[p as usize]);
                let t = self.picks.iter().sum::<u64>() as usize;
                self.total += &self.factorials[t] / denom;
            }
            return Ok(());
        }
        let slack = self.supports[col]
            .iter()
            .map(|&r| self.lambda - self.partial[r])
            .min()
            .unwrap_or(u64::MAX);
        let hi = remaining.min(slack);
        let lo = if col + 1 == n { remaining } else { 0 };
        if lo > hi {
            return Ok(());
        }
        for m in lo..=hi {
            for &r in &self.supports[col] {
                self.partial[r] += m;
            }
            let closed_ok = self.closing[col].iter().all(|&r| self.partial[r] == self.lambda);
            if closed_ok {
                self.picks[col] = m;
                self.run(col + 1, remaining - m)?;
            }
            for &r in &self.supports[col] {
                self.partial[r] -= m;
            }
        }
        self.picks[col] = 0;
        Ok(())
    }
}

/// Sums `t! / Π n_i!` over column multiplicities `n` with `Σ n_i Z_i = λ·1`.
pub fn count_multiset(v: u32, k: u32, t: u64) -> Result<BigUint> {
    count_multiset_with(v, k, t, CountOptions::default())
}

pub fn count_multiset_with(v: u32, k: u32, t: u64, opts: CountOptions) -> Result<BigUint> {
    check_exhaustive(v, k)?;
    let columns = binomial_u64(v.into(), k.into());
    if columns > MULTISET_MAX_COLUMNS {
        return Err(Error::ResourceBudgetExceeded {
            what: "multiset columns",
            reached: columns,
            budget: MULTISET_MAX_COLUMNS,
        });
    }
    let Some(lambda) = setup(v, k, t)? else {
        return Ok(BigUint::zero());
    };
    let supports: Vec<Vec<usize>> = column_list(v, k)?.into_iter().map(|c| c.support).collect();
    let d = pair_count(v);
    let mut last = vec![usize::MAX; d];
    for (i, s) in supports.iter().enumerate() {
        for &r in s {
            last[r] = i;
        }
    }
    let mut closing = vec![Vec::new(); supports.len()];
    for (r, &i) in last.iter().enumerate() {
        if i != usize::MAX {
            closing[i].push(r);
        } else if lambda != 0 {
            return Ok(BigUint::zero());
        }
    }
    let t_usize = usize::try_from(t).map_err(|_| Error::Parameter("t too large".into()))?;
    let mut factorials = Vec::with_capacity(t_usize + 1);
    factorials.push(BigUint::one());
    for i in 1..=t_usize {
        let next = &factorials[i - 1] * i;
        factorials.push(next);
    }
    let mut search = MultisetSearch {
        lambda,
        supports: &supports,
        closing,
        factorials,
        partial: vec![0; d],
        picks: vec![0; supports.len()],
        nodes: 0,
        budget: opts.budget.unwrap_or(DEFAULT_NODE_BUDGET),
        total: BigUint::zero(),
    };
    search.run(0, t)?;
    Ok(search.total)
}

/// `t! / ((t/d)!)^d`, or zero when `d` does not divide `t`.
pub fn count_k2_closed(v: u32, t: u64) -> Result<BigUint> {
    if v < 3 {
        return param(format!("k = 2 needs v >= 3, got v={v}"));
    }
    let d = pair_count(v) as u64;
    if !t.is_multiple_of(d) {
        return Ok(BigUint::zero());
    }
    let q = t / d;
    let fact = |n: u64| (1..=n).fold(BigUint::one(), |acc, i| acc * i);
    Ok(fact(t) / fact(q).pow(d as u32))
}

/// Enumerates all `C(v,k)^t` column sequences; only for tiny inputs.
pub fn count_exhaustive(v: u32, k: u32, t: u64) -> Result<BigUint> {
    let cols = column_list(v, k)?;
    let n = cols.len() as u64;
    let budget = 10_000_000u64;
    let total = n
        .checked_pow(t as u32)
        .filter(|&x| x <= budget)
        .ok_or(Error::ResourceBudgetExceeded {
            what: "exhaustive sequences",
            reached: u64::MAX,
            budget,
        })?;
    let derived = derive_params(&DesignParams::new(v, k, t)?);
    let Some(lambda) = derived.lambda_u64() else {
        return Ok(BigUint::zero());
    };
    let d = pair_count(v);
    let mut hits = 0u64;
    let mut sums = vec![0u64; d];
    for code in 0..total {
        sums.iter_mut().for_each(|s| *s = 0);
        let mut c = code;
        for _ in 0..t {
            for &r in &cols[(c % n) as usize].support {
                sums[r] += 1;
            }
            c /= n;
        }
        if sums.iter().all(|&s| s == lambda) {
            hits += 1;
        }
    }
    Ok(BigUint::from(hits))
}

/// Resolves `auto` to a concrete method.
pub fn resolve_method(v: u32, k: u32, t: u64, method: Method) -> Method {
    match method {
        Method::Auto => {
            if k == 2 {
                Method::Closed
            } else if binomial_u64(v.into(), k.into()) <= 10 && t <= 14 {
                Method::Multiset
            } else {
                Method::Dp
            }
        }
        m => m,
    }
}

pub fn count(v: u32, k: u32, t: u64, method: Method, opts: CountOptions) -> Result<BigUint> {
    check_exhaustive(v, k)?;
    match resolve_method(v, k, t, method) {
        Method::Dp => count_dp_with(v, k, t, opts),
        Method::Multiset => count_multiset_with(v, k, t, opts),
        Method::Closed => {
            if k != 2 {
                return param("the closed form only applies to k = 2");
            }
            count_k2_closed(v, t)
        }
        Method::Auto => unreachable!("resolved above"),
    }
}

/// `Ψ / C(v,k)^t` exactly, plus its `f64` value.
pub fn return_prob_exact(v: u32, k: u32, t: u64, method: Method) -> Result<(BigRational, f64)> {
    let psi = count(v, k, t, method, CountOptions::default())?;
    let denom = binomial(v.into(), k.into())
        .pow(u32::try_from(t).map_err(|_| Error::Parameter("t too large".into()))?);
    let p = BigRational::new(BigInt::from(psi), BigInt::from(denom));
    let f = rational_to_f64(&p);
    Ok((p, f))
}

/// Decimal digits of a count; convenience for output layers.
pub fn to_decimal(n: &BigUint) -> String {
    n.to_str_radix(10)
}

/// `ln Ψ`, or `-inf` for zero.
pub fn ln_count(n: &BigUint) -> f64 {
    if n.is_zero() {
        f64::NEG_INFINITY
    } else {
        crate::scalar::ln_bigint(&BigInt::from(n.clone()))
    }
}

/// `Ψ` as `u64` when it fits.
pub fn count_u64(n: &BigUint) -> Option<u64> {
    n.to_u64()
}
