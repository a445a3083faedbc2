//! Admissible shift tuples: verification with per-prime witnesses, the
//! shifted-primes construction, narrowest-tuple search (exhaustive and
//! provably optimal through k = 8, greedy beyond), and the end-to-end
//! (θ, certified ratio) → gap-bound pipeline.

use std::sync::LazyLock;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{
    guaranteed_primes, min_k_certify_bracketed, ExpectationParams, MinKReport,
};
use crate::primes::{next_prime, sieve_below};
use crate::simplex::BasisFamily;

// ---- admissibility ----------------------------------------------------------

/// Witness accompanying an admissibility decision.  Only primes `p ≤ k` are
/// listed: `k` residues can never occupy all classes of a prime `p > k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibilityWitness {
    /// For every prime `p ≤ k`, a residue class mod `p` that no shift hits.
    /// An integer `n ≡ −r (mod p)` then makes every `n + h_i` coprime to `p`.
    Admissible { omitted: Vec<(u64, u64)> },
    /// The shifts occupy every residue class modulo this prime, so some
    /// `n + h_i` is divisible by it for every `n`.
    Inadmissible { prime: u64 },
}

impl AdmissibilityWitness {
    pub fn is_admissible(&self) -> bool {
        matches!(self, AdmissibilityWitness::Admissible { .. })
    }
}

/// Decides admissibility of a strictly increasing shift sequence and returns
/// a checkable witness either way.  The decision is translation- and
/// reflection-invariant; the witness refers to the shifts exactly as given.
pub fn is_admissible(shifts: &[u64]) -> Result<AdmissibilityWitness> {
    if shifts.is_empty() {
        return Err(Error::InvalidParam("shift sequence is empty".into()));
    }
    if shifts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("shifts must be strictly increasing".into()));
    }
    let k = shifts.len() as u64;
    let mut omitted = Vec::new();
    for p in sieve_below(k + 1)? {
        let mut hit = vec![false; p as usize];
        for &h in shifts {
            hit[(h % p) as usize] = true;
        }
        match hit.iter().position(|&b| !b) {
            Some(r) => omitted.push((p, r as u64)),
            None => return Ok(AdmissibilityWitness::Inadmissible { prime: p }),
        }
    }
    Ok(AdmissibilityWitness::Admissible { omitted })
}

/// A canonical admissible tuple: strictly increasing shifts with `h_1 = 0`.
/// Serializes as a bare JSON array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdmissibleTuple {
    shifts: Vec<u64>,
}

impl AdmissibleTuple {
    /// Validates, translates so the first shift is 0, and checks
    /// admissibility; the returned witness refers to the canonical shifts.
    pub fn new(shifts: &[u64]) -> Result<(AdmissibleTuple, AdmissibilityWitness)> {
        if shifts.is_empty() {
            return Err(Error::InvalidParam("shift sequence is empty".into()));
        }
        if shifts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParam("shifts must be strictly increasing".into()));
        }
        let base = shifts[0];
        let canonical: Vec<u64> = shifts.iter().map(|&h| h - base).collect();
        let witness = is_admissible(&canonical)?;
        if let AdmissibilityWitness::Inadmissible { prime } = witness {
            return Err(Error::InadmissibleTuple { prime });
        }
        Ok((AdmissibleTuple { shifts: canonical }, witness))
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    pub fn k(&self) -> u32 {
        self.shifts.len() as u32
    }

    pub fn diameter(&self) -> u64 {
        *self.shifts.last().expect("tuples are nonempty")
    }
}

/// Integer linear functions `a_i·n + b_i`: the general shape the tuple
/// machinery instantiates with `a_i = 1, b_i = h_i` (and `b_i = h_i·q` in
/// covering constructions).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    functions: Vec<(u64, i64)>,
}

impl LinearSystem {
    /// Requires every leading coefficient ≥ 1 and all pairs distinct.
    pub fn new(functions: Vec<(u64, i64)>) -> Result<LinearSystem> {
        if functions.is_empty() {
            return Err(Error::InvalidParam("no linear functions given".into()));
        }
        if functions.iter().any(|&(a, _)| a == 0) {
            return Err(Error::InvalidParam("leading coefficients must be ≥ 1".into()));
        }
        let mut seen = functions.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParam("linear functions must be distinct".into()));
        }
        Ok(LinearSystem { functions })
    }

    pub fn from_tuple(tuple: &AdmissibleTuple) -> LinearSystem {
        LinearSystem {
            functions: tuple.shifts().iter().map(|&h| (1, h as i64)).collect(),
        }
    }

    pub fn functions(&self) -> &[(u64, i64)] {
        &self.functions
    }
}

// ---- constructions ----------------------------------------------------------

/// The first `k` primes above `k`, translated to start at 0.  Always
/// admissible: each entry is a prime exceeding `k`, so no prime `p ≤ k`
/// divides any of them and the class 0 mod p is omitted pre-translation.
pub fn primes_after_k_tuple(k: u32) -> Result<(AdmissibleTuple, AdmissibilityWitness)> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be ≥ 1".into()));
    }
    let mut shifts = Vec::with_capacity(k as usize);
    let mut p = k as u64;
    for _ in 0..k {
        p = next_prime(p);
        shifts.push(p);
    }
    AdmissibleTuple::new(&shifts)
}

/// The diameter-270 admissible 54-tuple shipped as a data constant (the
/// shifts used by the classical two-primes gap bound); its admissibility is
/// re-verified by tests rather than trusted.
pub static REFERENCE_54_TUPLE: LazyLock<AdmissibleTuple> = LazyLock::new(|| {
    let shifts: Vec<u64> = serde_json::from_str(include_str!("../data/tuple54.json"))
        .expect("embedded 54-tuple parses");
    AdmissibleTuple::new(&shifts).expect("embedded 54-tuple is admissible").0
});

// ---- narrowest tuple search -------------------------------------------------

/// Result of a narrowest-tuple search.  `proven_optimal` is set only by the
/// exhaustive branch-and-bound (k ≤ 8); larger k report the best tuple found
/// by the greedy class sieve within budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NarrowestTuple {
    pub tuple: AdmissibleTuple,
    pub proven_optimal: bool,
    pub method: String,
}

/// Largest `k` the exhaustive search covers.
pub const EXHAUSTIVE_K_LIMIT: u32 = 8;

/// Finds a narrowest admissible `k`-tuple.  For `k ≤ 8` the result is proven
/// minimal-diameter by exhaustive branch-and-bound (lexicographically
/// smallest among minimal tuples).  Beyond that, a deterministic greedy
/// class sieve shrinks the diameter from the shifted-primes seed (and, for
/// k = 54, from the stored reference tuple); `budget` caps the number of
/// candidate diameters probed.
pub fn narrowest_tuple(k: u32, budget: u64) -> Result<NarrowestTuple> {
    if k < 2 {
        return Err(Error::InvalidParam("narrowest-tuple search needs k ≥ 2".into()));
    }
    if k <= EXHAUSTIVE_K_LIMIT {
        let (seed, _) = primes_after_k_tuple(k)?;
        let shifts = exhaustive_narrowest(k, seed.diameter());
        let (tuple, _) = AdmissibleTuple::new(&shifts)?;
        return Ok(NarrowestTuple {
            tuple,
            proven_optimal: true,
            method: "exhaustive-branch-and-bound".into(),
        });
    }
    let (seed, _) = primes_after_k_tuple(k)?;
    let mut best = seed;
    let mut method = "shifted-primes-seed".to_string();
    if k == REFERENCE_54_TUPLE.k() && REFERENCE_54_TUPLE.diameter() < best.diameter() {
        best = REFERENCE_54_TUPLE.clone();
        method = "stored-reference-seed".into();
    }
    // Greedy descent: probe successively smaller diameters, keeping the best
    // admissible packing; tolerate a run of failures before giving up, since
    // greedy success is not exactly monotone in the diameter.
    let primes = sieve_below(k as u64 + 1)?;
    let mut d = best.diameter() - 1;
    let mut misses = 0u32;
    let mut probes = 0u64;
    while d + 1 >= k as u64 && misses < 20 && probes < budget {
        probes += 1;
        match greedy_pack(k, d, &primes) {
            Some(shifts) => {
                let (tuple, _) = AdmissibleTuple::new(&shifts)?;
                debug_assert!(tuple.diameter() <= d);
                d = tuple.diameter();
                if tuple.diameter() < best.diameter()
                    || (tuple.diameter() == best.diameter()
                        && tuple.shifts() < best.shifts())
                {
                    best = tuple;
                    method = "greedy-class-sieve".into();
                }
                misses = 0;
            }
            None => misses += 1,
        }
        if d == 0 {
            break;
        }
        d -= 1;
    }
    Ok(NarrowestTuple { tuple: best, proven_optimal: false, method })
}

/// Greedy packing into `[0, d]`: for each prime `p ≤ k` in increasing order,
/// delete the residue class with the fewest survivors (ties to the smallest
/// residue).  Every prime then has an explicitly omitted class, so any `k`
/// survivors form an admissible tuple.
fn greedy_pack(k: u32, d: u64, primes: &[u64]) -> Option<Vec<u64>> {
    let mut survivors: Vec<u64> = (0..=d).collect();
    for &p in primes {
        let mut counts = vec![0u32; p as usize];
        for &n in &survivors {
            counts[(n % p) as usize] += 1;
        }
        let omit = counts
            .iter()
            .enumerate()
            .min_by_key(|&(r, &c)| (c, r))
            .map(|(r, _)| r as u64)
            .expect("p ≥ 2 classes");
        survivors.retain(|&n| n % p != omit);
        if survivors.len() < k as usize {
            return None;
        }
    }
    Some(survivors[..k as usize].to_vec())
}

/// Exhaustive minimal-diameter search: for each candidate diameter in
/// increasing order, depth-first over interior shifts in lexicographic order
/// with residue-occupancy pruning; the first completed tuple is therefore
/// the lexicographically smallest one of minimal diameter.
fn exhaustive_narrowest(k: u32, diameter_cap: u64) -> Vec<u64> {
    let primes = sieve_below(k as u64 + 1).expect("tiny sieve");
    for d in (k as u64 - 1)..=diameter_cap {
        // Occupancy counts per prime class; a class at count 0 is free.
        let mut occupancy: Vec<Vec<u32>> =
            primes.iter().map(|&p| vec![0u32; p as usize]).collect();
        let mut chosen = vec![0u64];
        place(&mut occupancy, &primes, 0, 1);
        place(&mut occupancy, &primes, d, 1);
        if let Some(result) = dfs(d, k, &primes, &mut occupancy, &mut chosen) {
            return result;
        }
    }
    unreachable!("the shifted-primes tuple bounds the search from above");
}

fn place(occupancy: &mut [Vec<u32>], primes: &[u64], h: u64, delta: i32) {
    for (row, &p) in occupancy.iter_mut().zip(primes) {
        let slot = &mut row[(h % p) as usize];
        *slot = slot.checked_add_signed(delta).expect("occupancy underflow");
    }
}

fn dfs(
    d: u64,
    k: u32,
    primes: &[u64],
    occupancy: &mut Vec<Vec<u32>>,
    chosen: &mut Vec<u64>,
) -> Option<Vec<u64>> {
    if chosen.len() == k as usize - 1 {
        // Interior complete; the tuple is chosen ∪ {d}, admissible iff every
        // prime still has a free class.
        if occupancy.iter().all(|row| row.iter().any(|&c| c == 0)) {
            let mut result = chosen.clone();
            result.push(d);
            return Some(result);
        }
        return None;
    }
    let needed = k as u64 - 1 - chosen.len() as u64; // interior shifts still to place
    let lo = chosen.last().copied().unwrap_or(0) + 1;
    for h in lo..d {
        // Capacity: enough interior room must remain above h.
        if d - h < needed {
            break;
        }
        place(occupancy, primes, h, 1);
        let viable = occupancy.iter().all(|row| row.iter().any(|&c| c == 0));
        if viable {
            chosen.push(h);
            if let Some(hit) = dfs(d, k, primes, occupancy, chosen) {
                return Some(hit);
            }
            chosen.pop();
        }
        place(occupancy, primes, h, -1);
    }
    None
}

// ---- gap-bound pipeline -----------------------------------------------------

/// Full evidence chain of a (θ → k → tuple → bound) run.
#[derive(Clone, Debug, Serialize)]
pub struct GapBoundReport {
    /// Level of distribution, exact.
    pub theta: String,
    /// Required ratio 2/θ: primes guaranteed exceeds 1 iff ratio·θ/2 > 1.
    pub target_ratio: String,
    /// Smallest k the budgeted schedule certified (minimality is relative to
    /// the schedule and the monotone bracketing, recorded in `search`).
    pub k: u32,
    pub lambda_max: f64,
    pub exact_rayleigh: String,
    pub expectation_limit: String,
    pub primes_guaranteed: u32,
    pub search: MinKReport,
    pub tuple: NarrowestTuple,
    /// Diameter of the selected tuple: infinitely many intervals of this
    /// length contain `primes_guaranteed` primes, under the θ hypothesis.
    pub gap_bound: u64,
}

/// Runs the end-to-end reduction: from a level of distribution θ, certify
/// the smallest k (within the schedule and range) whose ratio exceeds 2/θ,
/// pick a narrowest available admissible k-tuple, and report its diameter as
/// the gap bound.  A range exhausted without certification is an error.
pub fn gap_bound_pipeline(
    theta: &BigRational,
    family: BasisFamily,
    degree_schedule: &[u32],
    k_range: (u32, u32),
    tuple_budget: u64,
    tolerance: f64,
) -> Result<GapBoundReport> {
    if theta <= &BigRational::zero() || theta > &BigRational::one() {
        return Err(Error::InvalidParam(format!("theta must lie in (0, 1], got {theta}")));
    }
    let target = BigRational::from_integer(2.into()) / theta;
    let search = min_k_certify_bracketed(
        &target,
        family,
        degree_schedule,
        k_range.0,
        k_range.1,
        tolerance,
    )?;
    let (k, cert) = search.certified.clone().expect("certified by construction");
    let params = ExpectationParams {
        theta: theta.clone(),
        ratio: BigRational::from_float(cert.lambda_max)
            .ok_or_else(|| Error::InvalidParam("non-finite certified ratio".into()))?,
        k,
    };
    let (expectation_limit, primes_guaranteed) = guaranteed_primes(&params)?;
    let tuple = narrowest_tuple(k, tuple_budget)?;
    let gap_bound = tuple.tuple.diameter();
    Ok(GapBoundReport {
        theta: theta.to_string(),
        target_ratio: target.to_string(),
        k,
        lambda_max: cert.lambda_max,
        exact_rayleigh: cert.exact_rayleigh.clone(),
        expectation_limit: crate::dyadic::Df::from_rational(&expectation_limit).to_decimal(12),
        primes_guaranteed,
        search,
        tuple,
        gap_bound,
    })
}

// ---- tests ------------------------------------------------------------------
