//! Prime infrastructure: segmented and monolithic sieves (kept as independent
//! implementations so one can audit the other), least-prime-factor and Möbius
//! tables, maximal-gap scans, and interval prime-count statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---- budgets ---------------------------------------------------------------

const MAX_SIEVE_SPAN: u64 = 200_000_000;
const MAX_SIEVE_HI: u64 = 1 << 50;
const MAX_TABLE_LIMIT: usize = 1 << 31;
const SEGMENT: usize = 1 << 16;

// ---- basic primality -------------------------------------------------------

/// Deterministic trial-division primality for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = 7u64;
    // 30-wheel steps starting at 7: 7,11,13,17,19,23,29,31,...
    let steps = [4u64, 2, 4, 2, 4, 6, 2, 6];
    let mut idx = 0;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += steps[idx];
        idx = (idx + 1) % steps.len();
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    loop {
        if is_prime_u64(c) {
            return c;
        }
        c += 1;
    }
}

/// Trial-division prime listing for narrow windows (test oracle grade).
pub fn trial_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..hi).filter(|&n| is_prime_u64(n)).collect()
}

// ---- segmented sieve -------------------------------------------------------

fn base_primes(limit: u64) -> Vec<u64> {
    // Plain odd-only sieve up to `limit` inclusive.
    if limit < 2 {
        return vec![];
    }
    let n = limit as usize;
    let mut composite = vec![false; n / 2 + 1]; // index i ↦ 2i+1
    let mut p = 3usize;
    while p * p <= n {
        if !composite[p / 2] {
            let mut m = p * p;
            while m <= n {
                composite[m / 2] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    let mut primes = vec![2];
    primes.extend((1..=n / 2).filter(|&i| !composite[i] && 2 * i + 1 <= n).map(|i| (2 * i + 1) as u64));
    primes
}

/// Calls `emit(p)` for every prime in `[lo, hi)`, in increasing order,
/// sieving one segment at a time.
fn sieve_segments(lo: u64, hi: u64, mut emit: impl FnMut(u64)) -> Result<()> {
    if lo < 2 || lo >= hi {
        return Err(Error::InvalidParam(format!("bad sieve range [{lo}, {hi})")));
    }
    if hi > MAX_SIEVE_HI || hi - lo > MAX_SIEVE_SPAN {
        return Err(Error::RangeTooLarge(format!(
            "sieve range [{lo}, {hi}) exceeds span budget {MAX_SIEVE_SPAN}"
        )));
    }
    let root = (hi as f64).sqrt() as u64 + 2;
    let base = base_primes(root);
    let mut mark = vec![false; SEGMENT];
    let mut seg_lo = lo;
    while seg_lo < hi {
        let seg_hi = (seg_lo + SEGMENT as u64).min(hi);
        let width = (seg_hi - seg_lo) as usize;
        mark[..width].fill(false);
        for &p in &base {
            if p * p >= seg_hi {
                break;
            }
            let mut m = (seg_lo.div_ceil(p) * p).max(p * p);
            while m < seg_hi {
                mark[(m - seg_lo) as usize] = true;
                m += p;
            }
        }
        for i in 0..width {
            if !mark[i] {
                let n = seg_lo + i as u64;
                if n >= 2 {
                    emit(n);
                }
            }
        }
        seg_lo = seg_hi;
    }
    Ok(())
}

/// Primes in `[lo, hi)` by segmented sieving.
pub fn sieve_range(lo: u64, hi: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    sieve_segments(lo, hi, |p| out.push(p))?;
    Ok(out)
}

/// Primes below `limit` by a single monolithic pass — deliberately a separate
/// implementation from  [`sieve_range`] so the two can cross-check each other.
pub fn sieve_below(limit: u64) -> Result<Vec<u64>> {
    if limit > MAX_SIEVE_SPAN {
        return Err(Error::RangeTooLarge(format!(
            "monolithic sieve limit {limit} exceeds budget {MAX_SIEVE_SPAN}"
        )));
    }
    let n = limit as usize;
    let mut composite = vec![false; n.max(2)];
    let mut primes = Vec::new();
    for p in 2..n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m < n {
                composite[m] = true;
                m += p;
            }
        }
    }
    Ok(primes)
}

/// π(limit): count of primes below `limit`, via the segmented path.
pub fn prime_count_below(limit: u64) -> Result<u64> {
    if limit <= 2 {
        return Ok(0);
    }
    let mut count = 0u64;
    sieve_segments(2, limit, |_| count += 1)?;
    Ok(count)
}

// ---- factor tables ---------------------------------------------------------

/// Least-prime-factor and Möbius tables on `[0, limit)`.
pub struct FactorTables {
    pub lpf: Vec<u32>,
    pub mobius: Vec<i8>,
}

impl FactorTables {
    /// Squarefree divisors of `n` (all < table limit), unsorted product order.
    pub fn squarefree_divisors(&self, mut n: u64) -> Vec<u64> {
        let mut divisors = vec![1u64];
        while n > 1 {
            let p = self.lpf[n as usize] as u64;
            let len = divisors.len();
            for i in 0..len {
                divisors.push(divisors[i] * p);
            }
            while n % p == 0 {
                n /= p;
            }
        }
        divisors.sort_unstable();
        divisors.dedup();
        divisors
    }
}

/// Linear (Euler) sieve building lpf and Möbius in one pass.
pub fn least_factor_tables(limit: usize) -> Result<FactorTables> {
    if limit > MAX_TABLE_LIMIT {
        return Err(Error::RangeTooLarge(format!(
            "factor table limit {limit} exceeds budget {MAX_TABLE_LIMIT}"
        )));
    }
    let n = limit.max(2);
    let mut lpf = vec![0u32; n];
    let mut mobius = vec![0i8; n];
    if n > 1 {
        mobius[1] = 1;
        lpf[1] = 1;
    }
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..n {
        if lpf[i] == 0 {
            lpf[i] = i as u32;
            mobius[i] = -1;
            primes.push(i);
        }
        for &p in &primes {
            let ip = i * p;
            if p > lpf[i] as usize || ip >= n {
                break;
            }
            lpf[ip] = p as u32;
            mobius[ip] = if i % p == 0 { 0 } else { -mobius[i] };
        }
    }
    Ok(FactorTables { lpf, mobius })
}

// ---- maximal gaps ----------------------------------------------------------

/// One record gap: `next` is the least prime above `p`, and the gap exceeded
/// every gap between smaller consecutive primes at the time it was seen.
/// A gap counts as "below limit" when its lower endpoint is.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GapRecord {
    pub p: u64,
    pub next: u64,
    pub gap: u64,
    pub maximal: bool,
}

/// Sieving margin wide enough to find the successor of the last prime < limit.
fn gap_margin(limit: u64) -> u64 {
    ((limit as f64).ln().powi(2) * 4.0) as u64 + 100
}

fn records_from_stream(limit: u64, primes: impl Iterator<Item = u64>) -> Vec<GapRecord> {
    let mut records = Vec::new();
    let mut prev: Option<u64> = None;
    let mut best = 0u64;
    for p in primes {
        if let Some(q) = prev {
            if q >= limit {
                break;
            }
            let gap = p - q;
            if gap > best {
                best = gap;
                records.push(GapRecord { p: q, next: p, gap, maximal: true });
            }
        }
        prev = Some(p);
    }
    records
}

/// Maximal prime gaps starting below `limit`, via the segmented sieve.
pub fn max_gap_scan(limit: u64) -> Result<Vec<GapRecord>> {
    if limit < 3 {
        return Err(Error::InvalidParam("gap scan needs limit ≥ 3".into()));
    }
    let mut records = Vec::new();
    let mut prev: Option<u64> = None;
    let mut best = 0u64;
    let mut done = false;
    sieve_segments(2, limit + gap_margin(limit), |p| {
        if done {
            return;
        }
        if let Some(q) = prev {
            if q >= limit {
                done = true;
                return;
            }
            let gap = p - q;
            if gap > best {
                best = gap;
                records.push(GapRecord { p: q, next: p, gap, maximal: true });
            }
        }
        prev = Some(p);
    })?;
    Ok(records)
}

/// Second, independent pass over the monolithic sieve; used to audit
/// [`max_gap_scan`].
pub fn max_gap_scan_oracle(limit: u64) -> Result<Vec<GapRecord>> {
    if limit < 3 {
        return Err(Error::InvalidParam("gap scan needs limit ≥ 3".into()));
    }
    let primes = sieve_below(limit + gap_margin(limit))?;
    Ok(records_from_stream(limit, primes.into_iter()))
}

// ---- interval prime counts -------------------------------------------------

/// Histogram of `#primes in [x, x+y]` over starting points `x ∈ [X, 2X]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalReport {
    pub x_lo: u64,
    pub y: u64,
    /// count value → number of sampled starting points attaining it
    pub histogram: BTreeMap<u64, u64>,
    pub windows: u64,
    pub exhaustive: bool,
    pub mean_count: f64,
    /// the configurable threshold c·ln(y)
    pub threshold_c: f64,
    pub threshold_value: f64,
    /// number of sampled x with at least ⌈c·ln y⌉ primes in the window
    pub attaining_threshold: u64,
}

/// Exact when `X ≤ budget` (exhaustive over all x); deterministic stratified
/// sampling of starting points otherwise.
pub fn interval_prime_counts(x_lo: u64, y: u64, budget: u64, c: f64) -> Result<IntervalReport> {
    if x_lo < 2 || y == 0 {
        return Err(Error::InvalidParam(format!(
            "interval counts need X ≥ 2 and y ≥ 1, got X={x_lo}, y={y}"
        )));
    }
    let hi = 2 * x_lo + y + 1;
    if hi - x_lo > MAX_SIEVE_SPAN {
        return Err(Error::RangeTooLarge(format!(
            "interval scan spans {} > budget {MAX_SIEVE_SPAN}",
            hi - x_lo
        )));
    }
    // Prime indicator for [x_lo, hi).
    let span = (hi - x_lo) as usize;
    let mut is_p = vec![false; span];
    sieve_segments(x_lo.max(2), hi, |p| is_p[(p - x_lo) as usize] = true)?;
    let exhaustive = x_lo <= budget;
    let stride = if exhaustive { 1 } else { (x_lo / budget).max(1) };
    // Prefix sums make each window count O(1).
    let mut prefix = vec![0u64; span + 1];
    for i in 0..span {
        prefix[i + 1] = prefix[i] + u64::from(is_p[i]);
    }
    let count_in = |x: u64| {
        let a = (x - x_lo) as usize;
        let b = ((x + y + 1) - x_lo) as usize; // closed interval [x, x+y]
        prefix[b.min(span)] - prefix[a]
    };
    let threshold_value = c * (y as f64).ln();
    let threshold_int = threshold_value.ceil().max(0.0) as u64;
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut windows = 0u64;
    let mut total = 0u64;
    let mut attaining = 0u64;
    let mut x = x_lo;
    while x <= 2 * x_lo {
        let n = count_in(x);
        *histogram.entry(n).or_insert(0) += 1;
        total += n;
        if n >= threshold_int.max(1) {
            attaining += 1;
        }
        windows += 1;
        x += stride;
    }
    Ok(IntervalReport {
        x_lo,
        y,
        histogram,
        windows,
        exhaustive,
        mean_count: total as f64 / windows as f64,
        threshold_c: c,
        threshold_value,
        attaining_threshold: attaining,
    })
}

// ---- gap growth curves -----------------------------------------------------

/// One row of the growth comparison table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRow {
    pub x: u64,
    pub max_gap: u64,
    pub log2_x: f64,
    /// ln X · lnln X · lnlnlnln X / lnlnln X; absent where the triple log
    /// is not positive (so the quadruple log is undefined), X ≤ e^e ≈ 15.
    pub rankin_form: Option<f64>,
}

/// ln X·lnln X·lnlnlnln X / lnlnln X when defined over the reals.
pub fn rankin_form(x: f64) -> Option<f64> {
    let l1 = x.ln();
    if l1 <= 0.0 {
        return None;
    }
    let l2 = l1.ln();
    if l2 <= 0.0 {
        return None;
    }
    let l3 = l2.ln();
    if l3 <= 0.0 {
        return None;
    }
    let l4 = l3.ln();
    Some(l1 * l2 * l4 / l3)
}

/// Running maximal gap sampled at multiples of `step`, with the comparison
/// columns log²X and the nested-log form.
pub fn gap_growth_curves(limit: u64, step: u64) -> Result<Vec<GrowthRow>> {
    if limit < 1000 {
        return Err(Error::InvalidParam("growth curves need limit ≥ 1000".into()));
    }
    if step == 0 || step > limit {
        return Err(Error::InvalidParam(format!("bad step {step} for limit {limit}")));
    }
    let mut rows = Vec::new();
    let mut prev: Option<u64> = None;
    let mut best = 0u64;
    let mut next_mark = step;
    let row = |x: u64, best: u64| GrowthRow {
        x,
        max_gap: best,
        log2_x: (x as f64).ln().powi(2),
        rankin_form: rankin_form(x as f64),
    };
    sieve_segments(2, limit + gap_margin(limit), |p| {
        // The pair (prev, p) counts toward exactly the marks above its lower
        // endpoint: flush marks ≤ prev first, then fold the gap in.
        if let Some(q) = prev {
            while next_mark <= limit && next_mark <= q {
                rows.push(row(next_mark, best));
                next_mark += step;
            }
            if p - q > best {
                best = p - q;
            }
        }
        while next_mark <= limit && next_mark < p {
            rows.push(row(next_mark, best));
            next_mark += step;
        }
        prev = Some(p);
    })?;
    while next_mark <= limit {
        rows.push(row(next_mark, best));
        next_mark += step;
    }
    Ok(rows)
}

// ---- tests -----------------------------------------------------------------
