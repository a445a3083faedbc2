//! Exact integration of symmetric polynomials over the unit simplex
//! `{t ∈ [0,∞)^k : Σt_i ≤ 1}`, plus enumeration of the symmetric basis
//! families used by the sieve optimizer.
//!
//! Everything here is exact `BigRational` arithmetic.  The only closed form
//! needed is the Dirichlet-type monomial integral
//!
//! ```text
//! ∫ Π t_i^{a_i} · (1 − Σt_i)^β dt  =  β! · Π a_i! / (k + β + Σa_i)!
//! ```
//!
//! and every basis-element product is reduced to it by expanding power sums
//! into monomial orbits.  Floats appear nowhere in this module.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---- factorial table -------------------------------------------------------

/// Shared append-only factorial memo; entries up to ~200! are routine here.
static FACTORIALS: LazyLock<RwLock<Vec<BigInt>>> =
    LazyLock::new(|| RwLock::new(vec![BigInt::one()]));

/// `n!` as an exact integer, from the shared memo table.
pub fn factorial(n: u32) -> BigInt {
    {
        let table = FACTORIALS.read().unwrap();
        if (n as usize) < table.len() {
            return table[n as usize].clone();
        }
    }
    let mut table = FACTORIALS.write().unwrap();
    while table.len() <= n as usize {
        let next = table.last().unwrap() * BigInt::from(table.len() as u64);
        table.push(next);
    }
    table[n as usize].clone()
}

/// Binomial coefficient `C(n, k)` as an exact integer.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Number of distinct monomials in the symmetric orbit of a sorted exponent
/// multiset `parts` inside `k` variables: `k! / ((k-m)! · Π mult_v!)`.
/// Zero when the multiset has more parts than there are variables.
pub fn orbit_count(k: u32, parts: &[u32]) -> BigInt {
    let m = parts.len() as u32;
    if m > k {
        return BigInt::zero();
    }
    // Falling factorial k·(k−1)···(k−m+1), then divide by multiplicities.
    let mut count = BigInt::one();
    for i in 0..m {
        count *= BigInt::from((k - i) as u64);
    }
    let mut run = 1u32;
    for i in 1..parts.len() {
        if parts[i] == parts[i - 1] {
            run += 1;
        } else {
            count /= factorial(run);
            run = 1;
        }
    }
    if !parts.is_empty() {
        count /= factorial(run);
    }
    count
}

// ---- signatures ------------------------------------------------------------

/// Index of a symmetric basis element or monomial orbit: a sorted multiset of
/// positive exponents plus a power of the boundary factor `(1 − Σt_i)`.
///
/// Two readings share this type and agree on the ordering invariants:
///
/// * as a **monomial orbit** inside a [`SymPoly`], `exponents` are the nonzero
///   exponents of one representative monomial (the orbit is its symmetrization)
///   and `boundary_power` multiplies by `(1 − Σt_i)^β`;
/// * as a **basis index** from [`enumerate_signatures`], each exponent `e`
///   stands for a power-sum factor `P_e = Σt_i^e`, so the element is
///   `(1 − P₁)^β · Π_e P_e` (see [`expand_signature`]).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Signature {
    exponents: Vec<u32>,
    boundary_power: u32,
}

impl Signature {
    /// Canonicalizes: sorts descending and drops zero exponents.
    pub fn new(mut exponents: Vec<u32>, boundary_power: u32) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        Signature { exponents, boundary_power }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn boundary_power(&self) -> u32 {
        self.boundary_power
    }

    /// Σ exponents + boundary power.
    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().sum::<u32>() + self.boundary_power
    }

    /// Multiset union of exponents, boundary powers added: the index of the
    /// product of two basis elements (both readings are multiplicative).
    pub fn merge(&self, other: &Signature) -> Signature {
        let mut exps = self.exponents.clone();
        exps.extend_from_slice(&other.exponents);
        Signature::new(exps, self.boundary_power + other.boundary_power)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.boundary_power > 0 {
            write!(f, "(1-P1)^{}", self.boundary_power)?;
        }
        for e in &self.exponents {
            write!(f, "·P{e}")?;
        }
        if self.boundary_power == 0 && self.exponents.is_empty() {
            write!(f, "1")?;
        }
        Ok(())
    }
}

// ---- symmetric polynomials -------------------------------------------------

/// A symmetric polynomial on the `k`-simplex, stored as orbit terms:
/// each `(Signature, c)` contributes `c · m_λ(t) · (1 − Σt_i)^β` where
/// `m_λ` is the sum of the distinct monomials with exponent multiset `λ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymPoly {
    k: u32,
    terms: BTreeMap<Signature, BigRational>,
}

impl SymPoly {
    pub fn zero(k: u32) -> Self {
        SymPoly { k, terms: BTreeMap::new() }
    }

    pub fn one(k: u32) -> Self {
        Self::constant(k, BigRational::one())
    }

    pub fn constant(k: u32, c: BigRational) -> Self {
        let mut p = Self::zero(k);
        if !c.is_zero() {
            p.terms.insert(Signature::new(vec![], 0), c);
        }
        p
    }

    /// Builds from `(signature, coefficient)` pairs; enforces the dimension
    /// invariant (no orbit may use more variables than `k`) and drops zeros.
    pub fn from_terms<I>(k: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Signature, BigRational)>,
    {
        let mut map: BTreeMap<Signature, BigRational> = BTreeMap::new();
        for (sig, c) in terms {
            if sig.exponents().len() > k as usize {
                return Err(Error::MonomialTooLong { len: sig.exponents().len(), k });
            }
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(sig).or_insert_with(BigRational::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SymPoly { k, terms: map })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Signature, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `self + other` (dimensions must agree).
    pub fn add(&self, other: &SymPoly) -> Result<SymPoly> {
        if self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.k as usize,
                got: other.k as usize,
            });
        }
        let mut terms = self.terms.clone();
        for (sig, c) in &other.terms {
            let entry = terms.entry(sig.clone()).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(SymPoly { k: self.k, terms })
    }

    /// `c · self`.
    pub fn scale(&self, c: &BigRational) -> SymPoly {
        if c.is_zero() {
            return SymPoly::zero(self.k);
        }
        let terms = self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect();
        SymPoly { k: self.k, terms }
    }

    /// Evaluates at a concrete point (used by the empirical weight probe;
    /// exponential in orbit size, intended for small `k` only).
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.k as usize, "point dimension mismatch");
        let boundary = 1.0 - point.iter().sum::<f64>();
        let mut total = 0.0;
        for (sig, c) in &self.terms {
            let c = rational_to_f64(c);
            let orbit = orbit_sum(sig.exponents(), point);
            total += c * orbit * boundary.powi(sig.boundary_power() as i32);
        }
        total
    }
}

/// Σ over distinct assignments of `parts` to distinct coordinates of `point`
/// of the resulting monomial value.  Runs of equal exponents are forced onto
/// ascending coordinate positions so each distinct monomial is counted once.
fn orbit_sum(parts: &[u32], point: &[f64]) -> f64 {
    fn rec(parts: &[u32], point: &[f64], used: &mut [bool], floor: usize, prev: u32) -> f64 {
        let Some((&e, rest)) = parts.split_first() else {
            return 1.0;
        };
        let start = if e == prev { floor } else { 0 };
        let mut acc = 0.0;
        for i in start..point.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            acc += point[i].powi(e as i32) * rec(rest, point, used, i + 1, e);
            used[i] = false;
        }
        acc
    }
    let mut used = vec![false; point.len()];
    rec(parts, point, &mut used, 0, 0)
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

// ---- monomial integral ------------------------------------------------------

/// `∫ over the k-simplex of Π t_i^{a_i} · (1 − Σt_i)^β dt`, exactly:
/// `β!·Πa_i! / (k + β + Σa_i)!`.
pub fn monomial_simplex_integral(a: &[u32], k: u32, beta: u32) -> Result<BigRational> {
    if a.len() > k as usize {
        return Err(Error::MonomialTooLong { len: a.len(), k });
    }
    let mut num = factorial(beta);
    let mut degree = beta;
    for &ai in a {
        num *= factorial(ai);
        degree += ai;
    }
    let den = factorial(k + degree);
    Ok(BigRational::new(num, den))
}

// ---- orbit expansion engine -------------------------------------------------

/// Expansion of a symmetric polynomial into monomial orbits: sorted exponent
/// multiset → coefficient of each individual monomial in that orbit.
type OrbitMap = BTreeMap<Vec<u32>, BigInt>;

/// Multiplies an orbit expansion by the power sum `P_r = Σ t_i^r`.
///
/// For the coefficient of a target orbit `μ`, every way of removing `r` from
/// one part of `μ` must land on a source orbit: equal parts contribute once
/// per occurrence.
fn orbit_mul_power_sum(f: &OrbitMap, r: u32) -> OrbitMap {
    debug_assert!(r >= 1);
    // Forward-generate candidate targets, then pull coefficients backward.
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    for lambda in f.keys() {
        let mut appended = lambda.clone();
        appended.push(r);
        appended.sort_unstable_by(|a, b| b.cmp(a));
        candidates.push(appended);
        for i in 0..lambda.len() {
            if i > 0 && lambda[i] == lambda[i - 1] {
                continue; // same target as bumping the previous equal part
            }
            let mut bumped = lambda.clone();
            bumped[i] += r;
            bumped.sort_unstable_by(|a, b| b.cmp(a));
            candidates.push(bumped);
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut out = OrbitMap::new();
    for mu in candidates {
        let mut coeff = BigInt::zero();
        let mut i = 0;
        while i < mu.len() {
            let v = mu[i];
            let mut mult = 1u32;
            while licit_run(&mu, i, mult, v) {
                mult += 1;
            }
            if v >= r {
                let mut reduced = mu.clone();
                reduced.remove(i);
                if v > r {
                    reduced.push(v - r);
                    reduced.sort_unstable_by(|a, b| b.cmp(a));
                }
                if let Some(c) = f.get(&reduced) {
                    coeff += c * BigInt::from(mult as u64);
                }
            }
            i += mult as usize;
        }
        if !coeff.is_zero() {
            out.insert(mu, coeff);
        }
    }
    out
}

// Helper used only to keep the run-length scan readable.
fn licit_run(mu: &[u32], start: usize, mult: u32, v: u32) -> bool {
    let idx = start + mult as usize;
    idx < mu.len() && mu[idx] == v
}

/// Memoized expansion of a product of power sums `Π_e P_e` (exponent multiset
/// sorted descending) into monomial orbits.  Keyed independently of the
/// dimension: orbits wider than `k` simply get orbit count zero later.
static POWER_PRODUCTS: LazyLock<RwLock<HashMap<Vec<u32>, Arc<OrbitMap>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn power_product_expansion(gens: &[u32]) -> Arc<OrbitMap> {
    {
        let memo = POWER_PRODUCTS.read().unwrap();
        if let Some(hit) = memo.get(gens) {
            return Arc::clone(hit);
        }
    }
    let expansion = if gens.is_empty() {
        let mut one = OrbitMap::new();
        one.insert(vec![], BigInt::one());
        Arc::new(one)
    } else {
        // Recurse on the prefix (gens sorted descending, drop the smallest).
        let prefix = power_product_expansion(&gens[..gens.len() - 1]);
        Arc::new(orbit_mul_power_sum(&prefix, gens[gens.len() - 1]))
    };
    let mut memo = POWER_PRODUCTS.write().unwrap();
    Arc::clone(memo.entry(gens.to_vec()).or_insert(expansion))
}

/// Exact `∫ (1 − P₁)^β · Π_e P_e` over the `k`-simplex.
///
/// All orbits of a fixed generator multiset share the same total degree
/// `S = Σe`, so the whole sum sits over the single denominator `(k+β+S)!`.
pub(crate) fn family_integral(k: u32, beta: u32, gens: &[u32]) -> BigRational {
    static MEMO: LazyLock<RwLock<HashMap<(u32, u32, Vec<u32>), BigRational>>> =
        LazyLock::new(|| RwLock::new(HashMap::new()));
    let key = (k, beta, gens.to_vec());
    {
        let memo = MEMO.read().unwrap();
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
    }
    let expansion = power_product_expansion(gens);
    let total: u32 = gens.iter().sum();
    let mut num = BigInt::zero();
    for (lambda, c) in expansion.iter() {
        let orbit = orbit_count(k, lambda);
        if orbit.is_zero() {
            continue;
        }
        let mut term = c * orbit;
        for &part in lambda {
            term *= factorial(part);
        }
        num += term;
    }
    num *= factorial(beta);
    let value = BigRational::new(num, factorial(k + beta + total));
    let mut memo = MEMO.write().unwrap();
    memo.entry(key).or_insert(value).clone()
}

// ---- basis families ---------------------------------------------------------

/// Supported symmetric basis families.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisFamily {
    /// `(1 − P₁)^a · P₂^b` with `a + 2b ≤ max_degree` — every pairwise
    /// product integral reduces to the closed form directly.
    OneMinusP1P2,
    /// `P₁^{c₁} P₂^{c₂} P₃^{c₃}` with `c₁ + 2c₂ + 3c₃ ≤ max_degree`.
    PowerSums,
    /// `(1 − P₁)^a · P₂^{b₂} ⋯ P_R^{b_R}` with `a + Σ r·b_r ≤ max_degree`.
    /// Same span as power sums up to `P_R` but far better conditioned, since
    /// `(1 − P₁)` powers stay O(1) on the simplex.  `R = 2` reproduces the
    /// two-generator family; higher `R` is needed for tight eigenvalues at
    /// large `k` (the two-generator span saturates well short of the true
    /// supremum).
    BoundaryPowerSums(u32),
}

impl BasisFamily {
    pub const DEFAULT: BasisFamily = BasisFamily::OneMinusP1P2;

    pub fn tag(self) -> String {
        match self {
            BasisFamily::OneMinusP1P2 => "one-minus-p1-p2".into(),
            BasisFamily::PowerSums => "power-sums".into(),
            BasisFamily::BoundaryPowerSums(r) => format!("one-minus-p1-up-to-p{r}"),
        }
    }

    /// Largest power-sum generator index used by the family.
    pub fn max_generator(self) -> u32 {
        match self {
            BasisFamily::OneMinusP1P2 => 2,
            BasisFamily::PowerSums => 3,
            BasisFamily::BoundaryPowerSums(r) => r.max(2),
        }
    }
}

impl fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for BasisFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(r) = s.strip_prefix("one-minus-p1-up-to-p") {
            let r: u32 = r
                .parse()
                .map_err(|_| Error::UnknownFamily(s.to_string()))?;
            if !(2..=16).contains(&r) {
                return Err(Error::UnknownFamily(s.to_string()));
            }
            return Ok(BasisFamily::BoundaryPowerSums(r));
        }
        match s {
            "one-minus-p1-p2" | "default" => Ok(BasisFamily::OneMinusP1P2),
            "power-sums" => Ok(BasisFamily::PowerSums),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// Enumerates the basis indices of `family` up to `max_degree`, duplicate-free,
/// sorted by total degree then lexicographically on exponents.
pub fn enumerate_signatures(k: u32, family: BasisFamily, max_degree: u32) -> Vec<Signature> {
    assert!(k >= 1, "dimension must be positive");
    // Power sums P_r with r > k are polynomials in P_1..P_k, so keeping them
    // would only introduce linear dependencies (and a singular I form) without
    // enlarging the span; clamp every family's generators to r ≤ k.
    let mut out = Vec::new();
    match family {
        BasisFamily::OneMinusP1P2 => {
            let b_top = if k >= 2 { max_degree / 2 } else { 0 };
            for b in 0..=b_top {
                for a in 0..=(max_degree - 2 * b) {
                    out.push(Signature::new(vec![2; b as usize], a));
                }
            }
        }
        BasisFamily::PowerSums => {
            let c3_top = if k >= 3 { max_degree / 3 } else { 0 };
            for c3 in 0..=c3_top {
                let c2_top = if k >= 2 { (max_degree - 3 * c3) / 2 } else { 0 };
                for c2 in 0..=c2_top {
                    for c1 in 0..=(max_degree - 3 * c3 - 2 * c2) {
                        let mut exps = vec![3u32; c3 as usize];
                        exps.extend(std::iter::repeat_n(2u32, c2 as usize));
                        exps.extend(std::iter::repeat_n(1u32, c1 as usize));
                        out.push(Signature::new(exps, 0));
                    }
                }
            }
        }
        BasisFamily::BoundaryPowerSums(max_r) => {
            // Depth-first over generator exponent multisets of weight ≤ d,
            // then every admissible boundary power on top.
            fn rec(r: u32, budget: u32, exps: &mut Vec<u32>, out: &mut Vec<Signature>) {
                if r < 2 {
                    for a in 0..=budget {
                        out.push(Signature::new(exps.clone(), a));
                    }
                    return;
                }
                for copies in 0..=(budget / r) {
                    exps.extend(std::iter::repeat_n(r, copies as usize));
                    rec(r - 1, budget - r * copies, exps, out);
                    exps.truncate(exps.len() - copies as usize);
                }
            }
            let top = if k >= 2 { max_r.min(k).max(2) } else { 1 };
            rec(top, max_degree, &mut Vec::new(), &mut out);
        }
    }
    out.sort_by(|x, y| {
        (x.total_degree(), x.exponents(), x.boundary_power())
            .cmp(&(y.total_degree(), y.exponents(), y.boundary_power()))
    });
    out.dedup();
    out
}

/// Expands a basis index into its concrete [`SymPoly`] in dimension `k`:
/// `(1 − P₁)^β · Π_e P_e` as monomial orbits (orbits wider than `k` vanish).
pub fn expand_signature(k: u32, sig: &Signature) -> SymPoly {
    let expansion = power_product_expansion(sig.exponents());
    let beta = sig.boundary_power();
    let terms = expansion
        .iter()
        .filter(|(lambda, _)| lambda.len() <= k as usize)
        .map(|(lambda, c)| {
            (
                Signature::new(lambda.clone(), beta),
                BigRational::from_integer(c.clone()),
            )
        });
    SymPoly::from_terms(k, terms).expect("orbit widths are filtered to fit k")
}

// ---- full monomial expansion ------------------------------------------------

/// One orbit of the fully expanded polynomial: representative exponents
/// (no boundary factor left), the per-monomial coefficient, and the orbit size.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialTerm {
    pub exponents: Vec<u32>,
    pub coefficient: BigRational,
    pub orbit_size: BigInt,
}

impl MonomialTerm {
    /// Coefficient with the orbit multiplicity folded in.
    pub fn folded_coefficient(&self) -> BigRational {
        &self.coefficient * BigRational::from_integer(self.orbit_size.clone())
    }
}

/// Result of [`expand_to_monomials`]: orbits sorted by exponent multiset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialExpansion {
    pub k: u32,
    pub terms: Vec<MonomialTerm>,
}

impl MonomialExpansion {
    /// Integrates the expansion term by term (round-trip test hook).
    pub fn integral(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for t in &self.terms {
            let i = monomial_simplex_integral(&t.exponents, self.k, 0)
                .expect("expansion orbits fit the dimension");
            acc += &t.coefficient * BigRational::from_integer(t.orbit_size.clone()) * i;
        }
        acc
    }
}

/// Expands every boundary power `(1 − P₁)^β` of `p` into raw monomial orbits
/// with combinatorial multiplicities.
pub fn expand_to_monomials(p: &SymPoly) -> MonomialExpansion {
    let k = p.k();
    let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    for (sig, c) in p.terms() {
        let mut e = OrbitMap::new();
        e.insert(sig.exponents().to_vec(), BigInt::one());
        for _ in 0..sig.boundary_power() {
            // f ← f − f·P₁
            let shifted = orbit_mul_power_sum(&e, 1);
            for (lambda, v) in shifted {
                let entry = e.entry(lambda).or_insert_with(BigInt::zero);
                *entry -= v;
            }
            e.retain(|_, v| !v.is_zero());
        }
        for (lambda, v) in e {
            if lambda.len() > k as usize {
                continue; // orbit does not exist in k variables
            }
            let entry = acc.entry(lambda).or_insert_with(BigRational::zero);
            *entry += c * BigRational::from_integer(v);
        }
    }
    let terms = acc
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(exponents, coefficient)| {
            let orbit_size = orbit_count(k, &exponents);
            MonomialTerm { exponents, coefficient, orbit_size }
        })
        .collect();
    MonomialExpansion { k, terms }
}

/// Exact `∫_simplex p dt`.
pub fn integrate_sympoly(p: &SymPoly) -> BigRational {
    let mut acc = BigRational::zero();
    for (sig, c) in p.terms() {
        let orbit = orbit_count(p.k(), sig.exponents());
        if orbit.is_zero() {
            continue;
        }
        let i = monomial_simplex_integral(sig.exponents(), p.k(), sig.boundary_power())
            .expect("SymPoly invariant bounds orbit width by k");
        acc += c * BigRational::from_integer(orbit) * i;
    }
    acc
}

// ---- tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    // ---- monomial integral --------------------------------------------------

    #[test]
    fn monomial_integral_matches_hand_values() {
        assert_eq!(monomial_simplex_integral(&[], 1, 0).unwrap(), rat(1, 1));
        assert_eq!(monomial_simplex_integral(&[], 2, 0).unwrap(), rat(1, 2));
        assert_eq!(monomial_simplex_integral(&[1], 2, 0).unwrap(), rat(1, 6));
        assert_eq!(monomial_simplex_integral(&[], 1, 2).unwrap(), rat(1, 3));
    }

    #[test]
    fn monomial_integral_rejects_too_many_exponents() {
        assert!(matches!(
            monomial_simplex_integral(&[1, 1, 1], 2, 0),
            Err(Error::MonomialTooLong { len: 3, k: 2 })
        ));
    }

    #[test]
    fn monomial_integral_is_positive() {
        for k in 1..6 {
            for beta in 0..4 {
                let v = monomial_simplex_integral(&[2, 1], k.max(2), beta).unwrap();
                assert!(v.is_positive());
            }
        }
    }

    // ---- orbit machinery ----------------------------------------------------

    #[test]
    fn orbit_counts() {
        assert_eq!(orbit_count(3, &[]), BigInt::from(1));
        assert_eq!(orbit_count(3, &[4]), BigInt::from(3));
        assert_eq!(orbit_count(3, &[2, 2]), BigInt::from(3));
        assert_eq!(orbit_count(4, &[2, 1]), BigInt::from(12));
        assert_eq!(orbit_count(2, &[1, 1, 1]), BigInt::from(0));
    }

    #[test]
    fn power_product_p2_squared() {
        // (Σt_i²)² = Σt_i⁴ + 2·Σ_{i<j} t_i²t_j²
        let e = power_product_expansion(&[2, 2]);
        assert_eq!(e.len(), 2);
        assert_eq!(e[&vec![4]], BigInt::from(1));
        assert_eq!(e[&vec![2, 2]], BigInt::from(2));
    }

    #[test]
    fn power_product_p1_cubed() {
        // (Σt_i)³ = Σt_i³ + 3·t_i²t_j (i≠j) + 6·t_it_jt_l (i<j<l)
        let e = power_product_expansion(&[1, 1, 1]);
        assert_eq!(e[&vec![3]], BigInt::from(1));
        assert_eq!(e[&vec![2, 1]], BigInt::from(3));
        assert_eq!(e[&vec![1, 1, 1]], BigInt::from(6));
    }

    // ---- enumeration --------------------------------------------------------

    #[test]
    fn enumerate_degree_zero_is_constant_only() {
        let basis = enumerate_signatures(2, BasisFamily::OneMinusP1P2, 0);
        assert_eq!(basis, vec![Signature::new(vec![], 0)]);
    }

    #[test]
    fn enumerate_degree_two_families() {
        let basis = enumerate_signatures(2, BasisFamily::OneMinusP1P2, 2);
        assert_eq!(
            basis,
            vec![
                Signature::new(vec![], 0),  // 1
                Signature::new(vec![], 1),  // (1−P₁)
                Signature::new(vec![], 2),  // (1−P₁)²
                Signature::new(vec![2], 0), // P₂
            ]
        );
    }

    #[test]
    fn enumerate_count_at_headline_size() {
        assert_eq!(enumerate_signatures(54, BasisFamily::OneMinusP1P2, 23).len(), 156);
    }

    #[test]
    fn enumerate_power_sums_small() {
        let basis = enumerate_signatures(3, BasisFamily::PowerSums, 2);
        // 1, P₁, P₁², P₂ — degree then lexicographic ([1,1] before [2]).
        assert_eq!(
            basis,
            vec![
                Signature::new(vec![], 0),
                Signature::new(vec![1], 0),
                Signature::new(vec![1, 1], 0),
                Signature::new(vec![2], 0),
            ]
        );
    }

    #[test]
    fn enumerate_clamps_dependent_generators() {
        // In k variables P_r with r > k is a polynomial in P_1..P_k, so low
        // dimensions must not enumerate it (it would make the I form singular).
        for sig in enumerate_signatures(2, BasisFamily::PowerSums, 6) {
            assert!(sig.exponents().iter().all(|&e| e <= 2), "{sig:?}");
        }
        for sig in enumerate_signatures(1, BasisFamily::PowerSums, 6) {
            assert!(sig.exponents().iter().all(|&e| e <= 1), "{sig:?}");
        }
        for sig in enumerate_signatures(3, BasisFamily::BoundaryPowerSums(5), 6) {
            assert!(sig.exponents().iter().all(|&e| e <= 3), "{sig:?}");
        }
        // k=1: the boundary powers alone already span polynomials in P₁
        let flat = enumerate_signatures(1, BasisFamily::OneMinusP1P2, 6);
        assert_eq!(flat.len(), 7);
        assert!(flat.iter().all(|s| s.exponents().is_empty()));
    }

    #[test]
    fn family_tags_round_trip() {
        for family in [BasisFamily::OneMinusP1P2, BasisFamily::PowerSums] {
            assert_eq!(family.tag().parse::<BasisFamily>().unwrap(), family);
        }
        assert!(matches!(
            "fourier".parse::<BasisFamily>(),
            Err(Error::UnknownFamily(_))
        ));
    }

    // ---- expansion ----------------------------------------------------------

    #[test]
    fn expand_p2_in_two_variables() {
        let p = expand_signature(2, &Signature::new(vec![2], 0));
        let e = expand_to_monomials(&p);
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].exponents, vec![2]);
        assert_eq!(e.terms[0].coefficient, rat(1, 1));
        assert_eq!(e.terms[0].orbit_size, BigInt::from(2));
    }

    #[test]
    fn expand_one_minus_p1_in_two_variables() {
        let p = expand_signature(2, &Signature::new(vec![], 1));
        let e = expand_to_monomials(&p);
        // 1 − t₁ − t₂: constant +1, orbit {t₁} with folded coefficient −2.
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.terms[0].exponents, Vec::<u32>::new());
        assert_eq!(e.terms[0].coefficient, rat(1, 1));
        assert_eq!(e.terms[1].exponents, vec![1]);
        assert_eq!(e.terms[1].coefficient, rat(-1, 1));
        assert_eq!(e.terms[1].folded_coefficient(), rat(-2, 1));
    }

    #[test]
    fn expand_p2_squared_in_three_variables() {
        let p = expand_signature(3, &Signature::new(vec![2, 2], 0));
        let e = expand_to_monomials(&p);
        let quartic = e.terms.iter().find(|t| t.exponents == vec![4]).unwrap();
        assert_eq!(quartic.orbit_size, BigInt::from(3));
        assert_eq!(quartic.coefficient, rat(1, 1));
        let cross = e.terms.iter().find(|t| t.exponents == vec![2, 2]).unwrap();
        assert_eq!(cross.orbit_size, BigInt::from(3));
        assert_eq!(cross.coefficient, rat(2, 1));
    }

    // ---- integration --------------------------------------------------------

    #[test]
    fn integrate_constant_is_simplex_volume() {
        assert_eq!(integrate_sympoly(&SymPoly::one(3)), rat(1, 6));
    }

    #[test]
    fn integrate_boundary_powers() {
        for k in [1u32, 2, 5, 54] {
            for ell in 0..4u32 {
                let p = SymPoly::from_terms(
                    k,
                    [(Signature::new(vec![], 2 * ell), BigRational::one())],
                )
                .unwrap();
                let expect = BigRational::new(factorial(2 * ell), factorial(k + 2 * ell));
                assert_eq!(integrate_sympoly(&p), expect);
            }
        }
    }

    #[test]
    fn integrate_p1_in_two_variables() {
        let p = expand_signature(2, &Signature::new(vec![1], 0));
        assert_eq!(integrate_sympoly(&p), rat(1, 3));
    }

    #[test]
    fn family_integral_p2_squared_three_vars() {
        // ∫ (Σt_i²)² over the 3-simplex = 3·4!/7! + 2·3·(2!2!)/7! = 2/105.
        assert_eq!(family_integral(3, 0, &[2, 2]), rat(2, 105));
    }

    #[test]
    fn expansion_round_trip_matches_direct_integral() {
        // p = (1−P₁)²·P₂ + 3·P₁ − 1/2, in 3 variables.
        let a = expand_signature(3, &Signature::new(vec![2], 2));
        let b = expand_signature(3, &Signature::new(vec![1], 0)).scale(&rat(3, 1));
        let c = SymPoly::constant(3, rat(-1, 2));
        let p = a.add(&b).unwrap().add(&c).unwrap();
        assert_eq!(expand_to_monomials(&p).integral(), integrate_sympoly(&p));
    }

    #[test]
    fn sympoly_rejects_orbits_wider_than_dimension() {
        let r = SymPoly::from_terms(2, [(Signature::new(vec![1, 1, 1], 0), rat(1, 1))]);
        assert!(matches!(r, Err(Error::MonomialTooLong { len: 3, k: 2 })));
    }

    #[test]
    fn evaluate_small_cases() {
        // P₂ at (0.5, 0.25) = 0.3125; (1−P₁) at same point = 0.25.
        let p2 = expand_signature(2, &Signature::new(vec![2], 0));
        assert!((p2.evaluate(&[0.5, 0.25]) - 0.3125).abs() < 1e-12);
        let b = expand_signature(2, &Signature::new(vec![], 1));
        assert!((b.evaluate(&[0.5, 0.25]) - 0.25).abs() < 1e-12);
        // P₁·P₂-style mixed orbit: m_{2,1} at (x,y) = x²y + y²x.
        let m21 = SymPoly::from_terms(2, [(Signature::new(vec![2, 1], 0), rat(1, 1))]).unwrap();
        let x: f64 = 0.3;
        let y: f64 = 0.2;
        assert!((m21.evaluate(&[x, y]) - (x * x * y + y * y * x)).abs() < 1e-12);
    }
}
